//! Data-driven step tables for the MAJ, UMA and logical-AND blocks.
//!
//! The tables live in `data/templates/*.csv` and are the calibration surface
//! of the micro simulator: the code only interprets them.

use serde::{Deserialize, Serialize};

use super::layout::{RowKind, Variant};
use crate::error::{domain, Result};

const GIDNEY_CSV: &str = include_str!("../../data/templates/gidney.csv");
const CUCCARO_CSV: &str = include_str!("../../data/templates/cuccaro.csv");

/// Prefix marking the steps of a logical-AND inside a MAJ block.
pub const LAND_PREFIX: &str = "land:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Move,
    TwoQubitGate,
    SingleQubitGate,
    TInject,
    Measure,
    ClassicalFixup,
    SwapPickdrop,
}

impl StepKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "move" => StepKind::Move,
            "two_qubit_gate" => StepKind::TwoQubitGate,
            "single_qubit_gate" => StepKind::SingleQubitGate,
            "t_inject" => StepKind::TInject,
            "measure" => StepKind::Measure,
            "classical_fixup" => StepKind::ClassicalFixup,
            "swap_pickdrop" => StepKind::SwapPickdrop,
            _ => return None,
        })
    }
}

/// Who moves during a step. `Control` is the fanned-out control copy of a
/// controlled adder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mover {
    Row(RowKind),
    Control,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BridgeEvent {
    /// Bell pair of this bit is prepared at step start.
    Init,
    /// Bell pair is measured out at step end.
    Consume,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEntry {
    pub label: String,
    pub kind: StepKind,
    /// Depth in reaction ticks; classically controlled fixups count half.
    pub weight: f64,
    pub movers: Vec<Mover>,
    /// Distance travelled by each mover, in patch spans.
    pub spans: f64,
    pub t_states: u32,
    pub bridge: Option<BridgeEvent>,
}

impl StepEntry {
    pub fn is_land(&self) -> bool {
        self.label.starts_with(LAND_PREFIX)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleTemplate {
    pub variant: Variant,
    pub controlled: bool,
    pub maj_steps: Vec<StepEntry>,
    pub uma_steps: Vec<StepEntry>,
    /// The logical-AND subsequence of `maj_steps` (empty for Cuccaro).
    pub land_steps: Vec<StepEntry>,
}

/// Extra control-distribution step of a controlled adder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlKnobs {
    pub extra_weight: f64,
    pub spans: f64,
}

impl Default for ControlKnobs {
    fn default() -> Self {
        Self {
            extra_weight: 1.0,
            spans: 2.0,
        }
    }
}

pub fn total_weight(steps: &[StepEntry]) -> f64 {
    steps.iter().map(|s| s.weight).sum()
}

impl ScheduleTemplate {
    pub fn maj_weight(&self) -> f64 {
        total_weight(&self.maj_steps)
    }

    pub fn uma_weight(&self) -> f64 {
        total_weight(&self.uma_steps)
    }

    pub fn depth(&self) -> f64 {
        self.maj_weight() + self.uma_weight()
    }

    pub fn t_states_per_bit(&self) -> u32 {
        self.maj_steps
            .iter()
            .chain(&self.uma_steps)
            .map(|s| s.t_states)
            .sum()
    }
}

pub fn schedule_template(variant: Variant, controlled: bool) -> Result<ScheduleTemplate> {
    schedule_template_with(variant, controlled, ControlKnobs::default())
}

pub fn schedule_template_with(
    variant: Variant,
    controlled: bool,
    knobs: ControlKnobs,
) -> Result<ScheduleTemplate> {
    let csv = match variant {
        Variant::Gidney => GIDNEY_CSV,
        Variant::Cuccaro => CUCCARO_CSV,
    };
    let (mut maj_steps, uma_steps) = parse_template(csv)?;
    if controlled {
        maj_steps.insert(
            0,
            StepEntry {
                label: "ctrl_fanout".into(),
                kind: StepKind::TwoQubitGate,
                weight: knobs.extra_weight,
                movers: vec![Mover::Control],
                spans: knobs.spans,
                t_states: 0,
                bridge: None,
            },
        );
    }
    let land_steps = maj_steps.iter().filter(|s| s.is_land()).cloned().collect();
    Ok(ScheduleTemplate {
        variant,
        controlled,
        maj_steps,
        uma_steps,
        land_steps,
    })
}

#[derive(Debug, Deserialize)]
struct Row {
    block: String,
    label: String,
    kind: String,
    weight: f64,
    movers: String,
    spans: f64,
    t_states: u32,
    bridge: String,
}

/// Parses a template table into (MAJ, UMA) step lists.
pub fn parse_template(text: &str) -> Result<(Vec<StepEntry>, Vec<StepEntry>)> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let (mut maj, mut uma) = (Vec::new(), Vec::new());
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row = row?;
        let line = i + 2;
        let kind = StepKind::parse(&row.kind).ok_or_else(|| {
            crate::Error::Domain(format!("line {line}: unknown step kind `{}`", row.kind))
        })?;
        let movers = row
            .movers
            .split('|')
            .filter(|m| !m.is_empty())
            .map(|m| match m {
                "control" => Ok(Mover::Control),
                other => RowKind::parse(other).map(Mover::Row).ok_or_else(|| {
                    crate::Error::Domain(format!("line {line}: unknown mover `{other}`"))
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        let bridge = match row.bridge.as_str() {
            "" => None,
            "init" => Some(BridgeEvent::Init),
            "consume" => Some(BridgeEvent::Consume),
            other => return domain(format!("line {line}: unknown bridge event `{other}`")),
        };
        if kind == StepKind::ClassicalFixup && row.weight != 0.5 {
            return domain(format!("line {line}: classical fixups count at half depth"));
        }
        if kind != StepKind::ClassicalFixup && row.weight < 1.0 {
            return domain(format!("line {line}: step weight below one tick"));
        }
        let step = StepEntry {
            label: row.label,
            kind,
            weight: row.weight,
            movers,
            spans: row.spans,
            t_states: row.t_states,
            bridge,
        };
        match row.block.as_str() {
            "maj" => maj.push(step),
            "uma" => uma.push(step),
            other => return domain(format!("line {line}: unknown block `{other}`")),
        }
    }
    Ok((maj, uma))
}
