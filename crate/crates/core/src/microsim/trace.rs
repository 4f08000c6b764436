//! Per-tick frames of an adder run and their line-delimited text form.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::layout::Variant;
use crate::error::{domain, Result};

pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitRole {
    Data,
    Bridge,
    LandAncilla,
    FactoryProduct,
    Control,
    Pg,
}

impl QubitRole {
    pub fn name(self) -> &'static str {
        match self {
            QubitRole::Data => "data",
            QubitRole::Bridge => "bridge",
            QubitRole::LandAncilla => "land_ancilla",
            QubitRole::FactoryProduct => "factory_product",
            QubitRole::Control => "control",
            QubitRole::Pg => "pg",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "data" => QubitRole::Data,
            "bridge" => QubitRole::Bridge,
            "land_ancilla" => QubitRole::LandAncilla,
            "factory_product" => QubitRole::FactoryProduct,
            "control" => QubitRole::Control,
            "pg" => QubitRole::Pg,
            _ => return None,
        })
    }

    /// Transient qubits (delivered T states, control copies) are not bound to
    /// a layout slot.
    pub fn is_transient(self) -> bool {
        matches!(self, QubitRole::FactoryProduct | QubitRole::Control)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QubitStatus {
    Idle,
    InFlight { remaining: u32, dest: (i32, i32) },
    Entangled,
    Consumed,
    Reset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitRecord {
    pub id: usize,
    pub role: QubitRole,
    pub col: i32,
    pub row: i32,
    pub status: QubitStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickFrame {
    pub tick: u64,
    /// Sorted by id.
    pub qubits: Vec<QubitRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub variant: Variant,
    pub w: usize,
    pub controlled: bool,
    pub seed: u64,
    pub params_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickTrace {
    pub header: TraceHeader,
    pub frames: Vec<TickFrame>,
}

impl TickTrace {
    /// Recounts in-flight qubits frame by frame.
    pub fn dof_series(&self) -> Vec<u32> {
        self.frames
            .iter()
            .map(|f| {
                f.qubits
                    .iter()
                    .filter(|q| matches!(q.status, QubitStatus::InFlight { .. }))
                    .count() as u32
            })
            .collect()
    }
}

/// Renders the trace as a header line followed by one line per tick.
pub fn export_trace(trace: &TickTrace) -> Vec<String> {
    let h = &trace.header;
    let mut lines = Vec::with_capacity(trace.frames.len() + 1);
    lines.push(format!(
        "# oqft-trace v{TRACE_VERSION} variant={} w={} controlled={} seed={} params={}",
        h.variant, h.w, h.controlled, h.seed, h.params_hash
    ));
    for frame in &trace.frames {
        let mut line = format!("{}:", frame.tick);
        for (k, q) in frame.qubits.iter().enumerate() {
            line.push_str(if k == 0 { " " } else { "; " });
            let _ = write!(line, "{} {} {} {} ", q.id, q.role.name(), q.col, q.row);
            let _ = match q.status {
                QubitStatus::Idle => write!(line, "idle"),
                QubitStatus::InFlight { remaining, dest } => {
                    write!(line, "flight {remaining} {} {}", dest.0, dest.1)
                }
                QubitStatus::Entangled => write!(line, "entangled"),
                QubitStatus::Consumed => write!(line, "consumed"),
                QubitStatus::Reset => write!(line, "reset"),
            };
        }
        lines.push(line);
    }
    lines
}

/// Inverse of [`export_trace`].
pub fn parse_trace<S: AsRef<str>>(lines: &[S]) -> Result<TickTrace> {
    let Some((head, body)) = lines.split_first() else {
        return domain("empty trace");
    };
    let head = head.as_ref();
    let rest = head
        .strip_prefix(&format!("# oqft-trace v{TRACE_VERSION} "))
        .ok_or_else(|| crate::Error::Domain(format!("unsupported trace header `{head}`")))?;
    let mut fields = std::collections::HashMap::new();
    for kv in rest.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| crate::Error::Domain(format!("bad header field `{kv}`")))?;
        fields.insert(k, v);
    }
    let get = |k: &str| {
        fields
            .get(k)
            .copied()
            .ok_or_else(|| crate::Error::Domain(format!("trace header lacks `{k}`")))
    };
    let header = TraceHeader {
        variant: get("variant")?.parse()?,
        w: num(get("w")?)?,
        controlled: get("controlled")? == "true",
        seed: num(get("seed")?)?,
        params_hash: get("params")?.to_string(),
    };
    let mut frames = Vec::with_capacity(body.len());
    for line in body {
        let line = line.as_ref();
        let (tick, records) = line
            .split_once(':')
            .ok_or_else(|| crate::Error::Domain(format!("bad frame `{line}`")))?;
        let mut qubits = Vec::new();
        for rec in records.split(';').map(str::trim).filter(|r| !r.is_empty()) {
            qubits.push(parse_record(rec)?);
        }
        frames.push(TickFrame {
            tick: num(tick)?,
            qubits,
        });
    }
    Ok(TickTrace { header, frames })
}

fn num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| crate::Error::Domain(format!("bad number `{s}`")))
}

fn parse_record(rec: &str) -> Result<QubitRecord> {
    let t: Vec<&str> = rec.split_whitespace().collect();
    if t.len() < 5 {
        return domain(format!("bad qubit record `{rec}`"));
    }
    let role = QubitRole::parse(t[1])
        .ok_or_else(|| crate::Error::Domain(format!("unknown role `{}`", t[1])))?;
    let status = match (t[4], t.len()) {
        ("idle", 5) => QubitStatus::Idle,
        ("entangled", 5) => QubitStatus::Entangled,
        ("consumed", 5) => QubitStatus::Consumed,
        ("reset", 5) => QubitStatus::Reset,
        ("flight", 8) => QubitStatus::InFlight {
            remaining: num(t[5])?,
            dest: (num(t[6])?, num(t[7])?),
        },
        _ => return domain(format!("bad qubit status in `{rec}`")),
    };
    Ok(QubitRecord {
        id: num(t[0])?,
        role,
        col: num(t[2])?,
        row: num(t[3])?,
        status,
    })
}
