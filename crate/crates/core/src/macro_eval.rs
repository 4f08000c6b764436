//! Whole-register OQFT and serial QFT timing composed from per-width adder
//! statistics. Hot zones take block pairs round-robin; a barrier closes every
//! layer.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::census::{truncated_qft_additions, Addition, BlockOp, OqftPlan, OQFT_LAYERS};
use crate::error::{domain, Error, Result};
use crate::io::{read_stats_csv, StatsRecord};
use crate::microsim::{build_zone_layout, AdderStats, Variant, MAX_WIDTH, MIN_WIDTH};
use crate::params::SystemParams;

const BUNDLED_TABLE: &str = include_str!("../data/stats/default_table.csv");
pub const BUNDLED_MANIFEST: &str = include_str!("../data/stats/default_table.manifest");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsEntry {
    pub mean_ticks: f64,
    pub avg_dof: f64,
    pub peak_dof_max: u32,
    pub samples: usize,
}

/// Per-width adder means keyed by (controlled, width).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsTable {
    pub variant: Variant,
    pub zone_width: usize,
    pub entries: BTreeMap<(bool, usize), StatsEntry>,
    pub provenance: String,
}

impl StatsTable {
    pub fn from_stats(stats: &[AdderStats], provenance: impl Into<String>) -> Result<Self> {
        let records: Vec<StatsRecord> = stats.iter().map(StatsRecord::from).collect();
        Self::from_records(&records, provenance)
    }

    pub fn from_records(records: &[StatsRecord], provenance: impl Into<String>) -> Result<Self> {
        let Some(first) = records.first() else {
            return domain("empty statistics table");
        };
        let mut entries = BTreeMap::new();
        for r in records {
            if r.variant != first.variant || r.zone_width != first.zone_width {
                return domain("statistics table mixes variants or zone widths");
            }
            let entry = StatsEntry {
                mean_ticks: r.total_ticks_mean,
                avg_dof: r.avg_dof_mean,
                peak_dof_max: r.peak_dof_max,
                samples: r.samples,
            };
            if entries.insert((r.controlled, r.w), entry).is_some() {
                return domain(format!(
                    "duplicate table row w={} controlled={}",
                    r.w, r.controlled
                ));
            }
        }
        Ok(Self {
            variant: first.variant,
            zone_width: first.zone_width,
            entries,
            provenance: provenance.into(),
        })
    }

    pub fn from_csv(text: &str, provenance: impl Into<String>) -> Result<Self> {
        Self::from_records(&read_stats_csv(text)?, provenance)
    }

    /// Table shipped with the crate, produced by a 20-seed campaign of
    /// Gidney adders in a 32-column zone.
    pub fn bundled() -> Result<Self> {
        Self::from_csv(BUNDLED_TABLE, "bundled")
    }

    pub fn get(&self, controlled: bool, w: usize) -> Result<&StatsEntry> {
        self.entries
            .get(&(controlled, w))
            .ok_or(Error::MissingWidth(w))
    }

    /// Entry used for an addition; one-bit additions run on the two-bit
    /// adder, the smallest simulated width.
    pub fn for_addition(&self, add: Addition) -> Result<&StatsEntry> {
        self.get(add.controlled, add.width.max(MIN_WIDTH))
    }

    pub fn is_complete(&self, controlled: bool) -> bool {
        (MIN_WIDTH..=MAX_WIDTH).all(|w| self.entries.contains_key(&(controlled, w)))
    }

    /// Peak DOF a zone must support for stall-free plain adders of every
    /// width; falls back to controlled rows when no plain rows exist.
    pub fn zone_peak_dof(&self) -> u32 {
        let plain = self
            .entries
            .iter()
            .filter(|((c, _), _)| !c)
            .map(|(_, e)| e.peak_dof_max)
            .max();
        plain.unwrap_or_else(|| {
            self.entries
                .values()
                .map(|e| e.peak_dof_max)
                .max()
                .unwrap_or(0)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroKnobs {
    pub hop_ticks: f64,
    /// PG shifts that fit in one tick.
    pub pg_batch: usize,
    pub reflection_ticks: f64,
    /// Resource-row width of each zone.
    pub zone_width: usize,
}

impl Default for MacroKnobs {
    fn default() -> Self {
        Self {
            hop_ticks: 1.0,
            pg_batch: 7,
            reflection_ticks: 1.0,
            zone_width: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZoneOp {
    pub layer: usize,
    /// Index into `plan.layers[layer]`.
    pub op: usize,
    pub pair: usize,
    pub reflected: bool,
    pub hop_before: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroSchedule {
    pub n: usize,
    pub m: usize,
    pub num_blocks: usize,
    pub hz: usize,
    pub plan: OqftPlan,
    /// `zones[layer][zone]` in execution order.
    pub zones: Vec<Vec<Vec<ZoneOp>>>,
}

impl MacroSchedule {
    pub fn op(&self, z: &ZoneOp) -> &BlockOp {
        &self.plan.layers[z.layer][z.op]
    }
}

pub fn max_hot_zones(n: usize, m: usize) -> usize {
    (n / m.max(1)) / 2
}

pub fn plan_macro(n: usize, m: usize, hz: usize, plan: &OqftPlan) -> Result<MacroSchedule> {
    if plan.n != n || plan.m != m {
        return domain(format!(
            "plan is for n={} m={}, asked for n={n} m={m}",
            plan.n, plan.m
        ));
    }
    if plan.layers.len() != OQFT_LAYERS {
        return domain(format!(
            "plan has {} layers, expected {OQFT_LAYERS}",
            plan.layers.len()
        ));
    }
    let max = max_hot_zones(n, m);
    if hz == 0 || hz > max {
        return domain(format!(
            "hot-zone count {hz} outside 1..={max} for {} blocks",
            plan.num_blocks
        ));
    }
    let mut last_pair: Vec<Option<usize>> = vec![None; hz];
    let mut qfts_seen = vec![0usize; hz];
    let mut zones = Vec::with_capacity(OQFT_LAYERS);
    for (layer, ops) in plan.layers.iter().enumerate() {
        let mut order: Vec<(usize, usize)> = ops
            .iter()
            .enumerate()
            .map(|(i, op)| (op.blocks[0] / 2, i))
            .collect();
        order.sort();
        let mut per_zone = vec![Vec::new(); hz];
        for (pair, i) in order {
            let z = pair % hz;
            let reflected = ops[i].kind.is_qft() && qfts_seen[z] % 2 == 1;
            if ops[i].kind.is_qft() {
                qfts_seen[z] += 1;
            }
            per_zone[z].push(ZoneOp {
                layer,
                op: i,
                pair,
                reflected,
                hop_before: last_pair[z].is_some_and(|p| p != pair),
            });
            last_pair[z] = Some(pair);
        }
        zones.push(per_zone);
    }
    Ok(MacroSchedule {
        n,
        m,
        num_blocks: plan.num_blocks,
        hz,
        plan: plan.clone(),
        zones,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroResult {
    pub n: usize,
    /// Zero for the serial baseline.
    pub hz: usize,
    pub total_ticks: f64,
    pub time_s: f64,
    pub footprint_qubits: usize,
    pub volume: f64,
    pub avg_dof: f64,
    pub peak_dof: u32,
    pub ancilla_overhead: usize,
    pub adder_ticks: f64,
    pub hop_ticks: f64,
    pub pg_ticks: f64,
    pub reflection_ticks: f64,
    /// Completion tick of each layer (barrier times).
    pub layer_ends: Vec<f64>,
}

impl MacroResult {
    pub fn is_baseline(&self) -> bool {
        self.hz == 0
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct ZoneCost {
    adder: f64,
    hop: f64,
    pg: f64,
    reflection: f64,
    dof_weight: f64,
}

impl ZoneCost {
    fn total(&self) -> f64 {
        self.adder + self.hop + self.pg + self.reflection
    }

    fn add_ops(&mut self, adds: &[Addition], t: &StatsTable) -> Result<()> {
        for &a in adds {
            let e = t.for_addition(a)?;
            self.adder += e.mean_ticks;
            self.dof_weight += e.mean_ticks * e.avg_dof;
        }
        Ok(())
    }
}

fn pg_cycle_ticks(shifts: usize, k: &MacroKnobs) -> f64 {
    shifts.div_ceil(k.pg_batch.max(1)) as f64
}

/// Hot-zone resource qubits, PG row included.
pub fn zone_resource_qubits(variant: Variant, k: &MacroKnobs) -> Result<usize> {
    let w = k.zone_width.min(MAX_WIDTH);
    let layout = build_zone_layout(variant, w, k.zone_width, true)?;
    Ok(layout.total_patches() - 2 * w)
}

pub fn evaluate_macro(
    s: &MacroSchedule,
    t: &StatsTable,
    p: &SystemParams,
    k: &MacroKnobs,
) -> Result<MacroResult> {
    let mut total = 0.0;
    let mut layer_ends = Vec::with_capacity(s.zones.len());
    let mut critical = ZoneCost::default();
    let (mut adder_sum, mut dof_sum) = (0.0, 0.0);
    for layer in &s.zones {
        let mut worst = ZoneCost::default();
        for zone in layer {
            let mut c = ZoneCost::default();
            for z in zone {
                let op = s.op(z);
                c.add_ops(&op.additions, t)?;
                if op.kind.is_qft() {
                    c.pg += pg_cycle_ticks(op.additions.len(), k);
                }
                if z.reflected {
                    c.reflection += k.reflection_ticks;
                }
                if z.hop_before {
                    c.hop += k.hop_ticks;
                }
            }
            adder_sum += c.adder;
            dof_sum += c.dof_weight;
            if c.total() > worst.total() {
                worst = c;
            }
        }
        total += worst.total();
        layer_ends.push(total);
        critical.adder += worst.adder;
        critical.hop += worst.hop;
        critical.pg += worst.pg;
        critical.reflection += worst.reflection;
    }
    let zone_avg = if adder_sum > 0.0 {
        dof_sum / adder_sum
    } else {
        0.0
    };
    let per_zone = zone_resource_qubits(t.variant, k)?;
    Ok(finish(
        s.n,
        s.hz,
        s.hz,
        total,
        s.n + s.hz * per_zone,
        zone_avg,
        t.zone_peak_dof(),
        critical,
        layer_ends,
        p,
    ))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    n: usize,
    hz_label: usize,
    zones: usize,
    total_ticks: f64,
    footprint: usize,
    zone_avg_dof: f64,
    zone_peak: u32,
    c: ZoneCost,
    layer_ends: Vec<f64>,
    p: &SystemParams,
) -> MacroResult {
    let time_s = total_ticks * p.t_r;
    MacroResult {
        n,
        hz: hz_label,
        total_ticks,
        time_s,
        footprint_qubits: footprint,
        volume: footprint as f64 * time_s,
        avg_dof: zones as f64 * zone_avg_dof,
        peak_dof: zones as u32 * zone_peak,
        ancilla_overhead: footprint - n,
        adder_ticks: c.adder,
        hop_ticks: c.hop,
        pg_ticks: c.pg,
        reflection_ticks: c.reflection,
        layer_ends,
    }
}

/// Truncated textbook QFT executed by one hot zone walking the register.
/// Every run of `m` consecutive additions pays its own PG cycling, and the
/// zone hops whenever its targets cross into the next block pair.
pub fn serial_baseline(
    n: usize,
    m: usize,
    t: &StatsTable,
    p: &SystemParams,
    k: &MacroKnobs,
) -> Result<MacroResult> {
    if n < 2 || m < 2 {
        return domain(format!("baseline needs n >= 2 and m >= 2, got n={n} m={m}"));
    }
    let adds = truncated_qft_additions(n, m as u32);
    let mut c = ZoneCost::default();
    c.add_ops(&adds, t)?;
    for chunk in adds.chunks(m) {
        c.pg += pg_cycle_ticks(chunk.len(), k);
    }
    let pairs = n.div_ceil(2 * m);
    c.hop = pairs.saturating_sub(1) as f64 * k.hop_ticks;
    let zone_avg = if c.adder > 0.0 {
        c.dof_weight / c.adder
    } else {
        0.0
    };
    let total = c.total();
    let per_zone = zone_resource_qubits(t.variant, k)?;
    Ok(finish(
        n,
        0,
        1,
        total,
        n + per_zone,
        zone_avg,
        t.zone_peak_dof(),
        c,
        vec![total],
        p,
    ))
}

/// Powers of two from 1 up to the maximum hot-zone count.
pub fn hz_values(n: usize, m: usize) -> Vec<usize> {
    let max = max_hot_zones(n, m);
    std::iter::successors(Some(1usize), |&h| Some(h * 2))
        .take_while(|&h| h <= max)
        .collect()
}

/// Baseline plus every requested hot-zone count (all powers of two when
/// `hz` is empty) for each size. Counts above the maximum are skipped.
pub fn sweep_macro(
    sizes: &[usize],
    hz: &[usize],
    m: usize,
    t: &StatsTable,
    p: &SystemParams,
    k: &MacroKnobs,
    plan_for: impl Fn(usize) -> Result<OqftPlan>,
) -> Result<Vec<MacroResult>> {
    let mut out = Vec::new();
    for &n in sizes {
        out.push(serial_baseline(n, m, t, p, k)?);
        let plan = plan_for(n)?;
        let choices = if hz.is_empty() {
            hz_values(n, m)
        } else {
            hz.iter()
                .copied()
                .filter(|&h| h <= max_hot_zones(n, m))
                .collect()
        };
        for h in choices {
            out.push(evaluate_macro(&plan_macro(n, m, h, &plan)?, t, p, k)?);
        }
    }
    Ok(out)
}
