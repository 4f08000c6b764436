//! High-level adder volume model: factories are abstract, freely routable
//! T sources and the run time is the larger of the reaction-limited and the
//! magic-limited time.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdderFamily {
    CuccaroRipple,
    GidneyRipple,
    GidneyLookahead,
    BasicLookahead,
}

impl AdderFamily {
    pub const ALL: [AdderFamily; 4] = [
        AdderFamily::CuccaroRipple,
        AdderFamily::GidneyRipple,
        AdderFamily::GidneyLookahead,
        AdderFamily::BasicLookahead,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AdderFamily::CuccaroRipple => "cuccaro_ripple",
            AdderFamily::GidneyRipple => "gidney_ripple",
            AdderFamily::GidneyLookahead => "gidney_lookahead",
            AdderFamily::BasicLookahead => "basic_lookahead",
        }
    }

    pub fn is_ripple(self) -> bool {
        matches!(self, AdderFamily::CuccaroRipple | AdderFamily::GidneyRipple)
    }
}

impl std::str::FromStr for AdderFamily {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        AdderFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .map_or_else(|| domain(format!("unknown adder family `{s}`")), Ok)
    }
}

impl std::fmt::Display for AdderFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Tunable constants of the family cost functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HlConstants {
    /// Ripple depth is `2n + offset`; the offset is one MAJ plus one UMA.
    pub gidney_ripple_offset: f64,
    pub cuccaro_ripple_offset: f64,
    /// Lookahead depth is `slope * log2(n) + offset`.
    pub lookahead_depth_slope: f64,
    pub lookahead_depth_offset: f64,
    /// Toffolis per register bit, each synthesized with four T gates.
    pub gidney_lookahead_toffolis_per_bit: f64,
    pub basic_lookahead_toffolis_per_bit: f64,
    /// Logical workspace qubits per bit for lookahead adders.
    pub lookahead_workspace_per_bit: f64,
    pub patches_per_factory: u64,
}

impl Default for HlConstants {
    fn default() -> Self {
        Self {
            gidney_ripple_offset: 15.5,
            cuccaro_ripple_offset: 24.0,
            lookahead_depth_slope: 4.0,
            lookahead_depth_offset: 8.0,
            gidney_lookahead_toffolis_per_bit: 8.0,
            basic_lookahead_toffolis_per_bit: 10.0,
            lookahead_workspace_per_bit: 4.0,
            patches_per_factory: 1,
        }
    }
}

impl HlConstants {
    pub fn tcount(&self, family: AdderFamily, n: u64) -> u64 {
        match family {
            AdderFamily::GidneyRipple => 4 * (n - 1),
            AdderFamily::CuccaroRipple => 7 * (2 * n - 2),
            AdderFamily::GidneyLookahead => {
                (4.0 * self.gidney_lookahead_toffolis_per_bit * n as f64).ceil() as u64
            }
            AdderFamily::BasicLookahead => {
                (4.0 * self.basic_lookahead_toffolis_per_bit * n as f64).ceil() as u64
            }
        }
    }

    /// Reaction depth in ticks.
    pub fn reaction_depth(&self, family: AdderFamily, n: u64) -> f64 {
        let n = n as f64;
        match family {
            AdderFamily::GidneyRipple => 2.0 * n + self.gidney_ripple_offset,
            AdderFamily::CuccaroRipple => 2.0 * n + self.cuccaro_ripple_offset,
            AdderFamily::GidneyLookahead | AdderFamily::BasicLookahead => {
                self.lookahead_depth_slope * n.log2() + self.lookahead_depth_offset
            }
        }
    }

    /// Logical qubits excluding factories.
    pub fn workspace(&self, family: AdderFamily, n: u64) -> u64 {
        match family {
            AdderFamily::GidneyRipple => 3 * n,
            AdderFamily::CuccaroRipple => 2 * n + 1,
            AdderFamily::GidneyLookahead | AdderFamily::BasicLookahead => {
                (self.lookahead_workspace_per_bit * n as f64).ceil() as u64
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HlCost {
    pub family: AdderFamily,
    pub n: u64,
    pub factories: u64,
    pub footprint: u64,
    pub reaction_time_s: f64,
    pub magic_time_s: f64,
    pub time_s: f64,
    pub volume: f64,
}

impl HlCost {
    pub fn magic_limited(&self) -> bool {
        self.magic_time_s > self.reaction_time_s
    }
}

pub fn hl_cost(family: AdderFamily, n: u64, factories: u64, p: &SystemParams) -> Result<HlCost> {
    hl_cost_with(family, n, factories, p, &HlConstants::default())
}

pub fn hl_cost_with(
    family: AdderFamily,
    n: u64,
    factories: u64,
    p: &SystemParams,
    k: &HlConstants,
) -> Result<HlCost> {
    if n < 2 {
        return domain(format!("register size must be at least 2, got {n}"));
    }
    if factories < 1 {
        return domain("at least one factory is required");
    }
    let reaction_time_s = k.reaction_depth(family, n) * p.t_r;
    let magic_time_s = k.tcount(family, n) as f64 * p.cult_mean_ticks * p.t_r / factories as f64;
    let time_s = reaction_time_s.max(magic_time_s);
    let footprint = k.workspace(family, n) + factories * k.patches_per_factory;
    Ok(HlCost {
        family,
        n,
        factories,
        footprint,
        reaction_time_s,
        magic_time_s,
        time_s,
        volume: footprint as f64 * time_s,
    })
}

/// Volume-optimal factory count over powers of two up to `4n`; ties go to
/// the smaller count.
pub fn hl_optimal(
    family: AdderFamily,
    n: u64,
    p: &SystemParams,
    k: &HlConstants,
) -> Result<HlCost> {
    let mut best: Option<HlCost> = None;
    let mut f = 1;
    while f <= 4 * n {
        let c = hl_cost_with(family, n, f, p, k)?;
        if best.is_none_or(|b| c.volume < b.volume) {
            best = Some(c);
        }
        f *= 2;
    }
    best.map_or_else(|| domain("empty factory sweep"), Ok)
}

/// Smallest `n` in `ns` at which `b` has strictly lower optimal volume
/// than `a`.
pub fn hl_crossover(
    a: AdderFamily,
    b: AdderFamily,
    ns: &[u64],
    p: &SystemParams,
    k: &HlConstants,
) -> Result<Option<u64>> {
    if ns.is_empty() {
        return domain("crossover needs a nonempty size range");
    }
    for &n in ns {
        if hl_optimal(b, n, p, k)?.volume < hl_optimal(a, n, p, k)?.volume {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// Powers of two from `lo` to `hi` inclusive.
pub fn pow2_range(lo: u64, hi: u64) -> Vec<u64> {
    std::iter::successors(Some(lo.max(1).next_power_of_two()), |&n| n.checked_mul(2))
        .take_while(|&n| n <= hi)
        .collect()
}

/// Optimal cost of every family at every size.
pub fn hl_sweep(ns: &[u64], p: &SystemParams, k: &HlConstants) -> Result<Vec<HlCost>> {
    let mut out = Vec::with_capacity(ns.len() * AdderFamily::ALL.len());
    for family in AdderFamily::ALL {
        for &n in ns {
            out.push(hl_optimal(family, n, p, k)?);
        }
    }
    Ok(out)
}
