//! Rotation and non-Clifford census for textbook, truncated and optimistic
//! QFT variants, and the five-layer block plan of the optimistic QFT.
//!
//! Exponent convention: a rotation with exponent `k` has angle `pi / 2^k`
//! (`Z^(1/2^k)`). A truncation exponent `c` keeps every angle at or above
//! `2 pi / 2^c`, i.e. exponents `k < c`. A `c`-bit phase-gradient register
//! implements exactly those rotations, so the same `c` is used everywhere.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RotationSpectrum {
    pub n_bits: usize,
    /// Exponent `k >= 1` to number of occurrences.
    pub counts: BTreeMap<u32, u64>,
}

impl RotationSpectrum {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    fn add(&mut self, k: u32, count: u64) {
        if count > 0 {
            *self.counts.entry(k).or_insert(0) += count;
        }
    }

    /// Merges another spectrum into this one.
    pub fn absorb(&mut self, other: &RotationSpectrum) {
        for (&k, &c) in &other.counts {
            self.add(k, c);
        }
    }
}

/// Textbook QFT census on `n` qubits: qubits at significance distance `k`
/// share one rotation of exponent `k`, so there are `n - k` of them.
pub fn qft_spectrum(n: usize, cutoff_k: Option<u32>) -> Result<RotationSpectrum> {
    if n == 0 {
        return domain("register size must be at least 1");
    }
    let mut spectrum = RotationSpectrum {
        n_bits: n,
        ..Default::default()
    };
    for k in 1..n as u32 {
        if cutoff_k.is_some_and(|c| k >= c) {
            break;
        }
        spectrum.add(k, (n - k as usize) as u64);
    }
    Ok(spectrum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockOpKind {
    SmallQft,
    SmallQftReflected,
    Bpr,
}

impl BlockOpKind {
    pub fn is_qft(self) -> bool {
        matches!(self, BlockOpKind::SmallQft | BlockOpKind::SmallQftReflected)
    }
}

/// One controlled or uncontrolled addition into the phase-gradient register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Addition {
    pub controlled: bool,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockOp {
    pub kind: BlockOpKind,
    /// One block for a small QFT, two adjacent blocks for a BPR.
    pub blocks: Vec<usize>,
    pub additions: Vec<Addition>,
}

impl BlockOp {
    pub fn toffolis(&self) -> u64 {
        self.additions.iter().map(|a| addition_toffolis(*a)).sum()
    }
}

/// Rotations realised by the additions of a `c`-truncated `m`-bit QFT block:
/// one controlled addition per target of width `min(c - 1, m - 1 - i)`.
fn qft_block_additions(m: usize, cutoff_k: u32) -> Vec<Addition> {
    let reach = cutoff_k.saturating_sub(1) as usize;
    (0..m)
        .map(|i| reach.min(m - 1 - i))
        .filter(|&w| w > 0)
        .map(|width| Addition {
            controlled: true,
            width,
        })
        .collect()
}

pub const OQFT_LAYERS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OqftPlan {
    pub n: usize,
    pub m: usize,
    pub num_blocks: usize,
    pub cutoff_k: u32,
    pub inserted_qft_count: usize,
    /// Small QFTs, intra-pair BPRs, inserted QFTs, inter-pair BPRs, closing
    /// QFTs.
    pub layers: Vec<Vec<BlockOp>>,
}

/// Tunable parts of the block plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanKnobs {
    /// Inserted QFTs per plan is `num_blocks - inserted_qft_offset`.
    pub inserted_qft_offset: usize,
}

impl Default for PlanKnobs {
    fn default() -> Self {
        Self {
            inserted_qft_offset: 2,
        }
    }
}

pub fn oqft_plan(n: usize, m: usize, cutoff_k: u32) -> Result<OqftPlan> {
    oqft_plan_with(n, m, cutoff_k, PlanKnobs::default())
}

pub fn oqft_plan_with(n: usize, m: usize, cutoff_k: u32, knobs: PlanKnobs) -> Result<OqftPlan> {
    if m == 0 || !n.is_multiple_of(m) {
        return domain(format!("block size {m} must divide register size {n}"));
    }
    let b = n / m;
    if b < 2 {
        return domain(format!("need at least two blocks, got {b}"));
    }
    if cutoff_k < 2 {
        return domain("cutoff must keep at least one rotation");
    }
    let qft_adds = qft_block_additions(m, cutoff_k);
    // An adjacent BPR surviving truncation couples qubit pairs at distances
    // 1..c-1 across the boundary: the same width multiset as a small QFT.
    let bpr_adds = qft_adds.clone();
    let qft = |kind, block| BlockOp {
        kind,
        blocks: vec![block],
        additions: qft_adds.clone(),
    };
    let bpr = |lo: usize| BlockOp {
        kind: BlockOpKind::Bpr,
        blocks: vec![lo, lo + 1],
        additions: bpr_adds.clone(),
    };

    let inserted = b.saturating_sub(knobs.inserted_qft_offset);
    let layer1 = (0..b).map(|i| qft(BlockOpKind::SmallQft, i)).collect();
    let layer2 = (0..b - 1).step_by(2).map(bpr).collect();
    // Inserted phase estimators sit on the interior blocks, alternating
    // direction so consecutive blocks keep their addition order aligned.
    let layer3 = (0..inserted)
        .map(|j| {
            let kind = if j % 2 == 0 {
                BlockOpKind::SmallQftReflected
            } else {
                BlockOpKind::SmallQft
            };
            qft(kind, 1 + j % (b - 1).max(1))
        })
        .collect();
    let layer4 = (1..b - 1).step_by(2).map(bpr).collect();
    let layer5 = (0..b).map(|i| qft(BlockOpKind::SmallQft, i)).collect();

    Ok(OqftPlan {
        n,
        m,
        num_blocks: b,
        cutoff_k,
        inserted_qft_count: inserted,
        layers: vec![layer1, layer2, layer3, layer4, layer5],
    })
}

impl OqftPlan {
    /// Rotation census: the truncated, block-decomposed textbook QFT plus the
    /// rotations of every inserted small QFT.
    pub fn spectrum(&self) -> RotationSpectrum {
        let mut spectrum = qft_spectrum(self.n, Some(self.cutoff_k)).expect("n >= 2m");
        let block = qft_spectrum(self.m, Some(self.cutoff_k)).expect("m >= 1");
        for _ in 0..self.inserted_qft_count {
            spectrum.absorb(&block);
        }
        spectrum.n_bits = self.n;
        spectrum
    }

    /// Controlled additions realising [`OqftPlan::spectrum`] through a
    /// phase-gradient register.
    pub fn census_additions(&self) -> Vec<Addition> {
        let qft_adds = qft_block_additions(self.m, self.cutoff_k);
        let ops = self.num_blocks + self.inserted_qft_count + (self.num_blocks - 1);
        qft_adds
            .iter()
            .copied()
            .cycle()
            .take(ops * qft_adds.len())
            .collect()
    }

    pub fn ops(&self) -> impl Iterator<Item = &BlockOp> {
        self.layers.iter().flatten()
    }
}

/// Additions of the truncated textbook QFT on `n` qubits through a
/// phase-gradient register: target `i` gets one controlled addition of width
/// `min(c - 1, n - 1 - i)`.
pub fn truncated_qft_additions(n: usize, cutoff_k: u32) -> Vec<Addition> {
    qft_block_additions(n, cutoff_k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TCount {
    pub t_gates: u64,
    pub toffolis: u64,
    pub rotations_synthesized: u64,
}

/// Rotation-synthesis cost model `ceil(offset + slope log2(1/eps))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisModel {
    pub offset: f64,
    pub slope: f64,
}

impl Default for SynthesisModel {
    fn default() -> Self {
        Self {
            offset: 9.2,
            slope: 1.15,
        }
    }
}

impl SynthesisModel {
    pub fn t_per_rotation(&self, eps: f64) -> Result<u64> {
        if !(eps > 0.0 && eps < 1.0) {
            return domain(format!("synthesis error must lie in (0, 1), got {eps}"));
        }
        Ok((self.offset + self.slope * (1.0 / eps).log2()).ceil() as u64)
    }
}

pub fn t_per_rotation(eps: f64) -> Result<u64> {
    SynthesisModel::default().t_per_rotation(eps)
}

pub fn tcount_synthesis(spectrum: &RotationSpectrum, eps: f64) -> Result<TCount> {
    tcount_synthesis_with(spectrum, eps, SynthesisModel::default())
}

pub fn tcount_synthesis_with(
    spectrum: &RotationSpectrum,
    eps: f64,
    model: SynthesisModel,
) -> Result<TCount> {
    let per = model.t_per_rotation(eps)?;
    let rotations = spectrum.total();
    Ok(TCount {
        t_gates: rotations * per,
        toffolis: 0,
        rotations_synthesized: rotations,
    })
}

/// Toffolis of one ripple-carry addition built from logical ANDs.
pub fn addition_toffolis(add: Addition) -> u64 {
    let w = add.width as u64;
    if add.controlled {
        w
    } else {
        w.saturating_sub(1)
    }
}

/// Phase-gradient T count: angles never enter, only addition widths.
pub fn tcount_pg(additions: &[Addition]) -> TCount {
    let toffolis: u64 = additions.iter().map(|a| addition_toffolis(*a)).sum();
    TCount {
        t_gates: 4 * toffolis,
        toffolis,
        rotations_synthesized: 0,
    }
}

pub fn tcount_pg_oqft(plan: &OqftPlan) -> TCount {
    tcount_pg(&plan.census_additions())
}

pub fn tcount_pg_truncated(n: usize, cutoff_k: u32) -> TCount {
    tcount_pg(&truncated_qft_additions(n, cutoff_k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub n: usize,
    pub total_t: u64,
    pub per_t_error_target: f64,
    pub eps_rotation: f64,
}

pub const MULTIPLIER_TOFFOLIS: f64 = 0.9e6;
pub const MULTIPLIER_ROTATIONS: f64 = 0.1e6;

/// Non-Clifford budget of a factoring run built from `2n` controlled fast
/// multipliers.
pub fn shor_budget(n: usize) -> Result<BudgetReport> {
    if n < 8 {
        return domain(format!("register size must be at least 8, got {n}"));
    }
    let eps_rotation = 1e-5 / n as f64;
    let per_rotation = t_per_rotation(eps_rotation)? as f64;
    let per_mult = MULTIPLIER_TOFFOLIS * 4.0 + MULTIPLIER_ROTATIONS * per_rotation;
    // Controlled multipliers double the non-Clifford cost.
    let total_t = (2.0 * n as f64 * 2.0 * per_mult).round() as u64;
    Ok(BudgetReport {
        n,
        total_t,
        per_t_error_target: 1.0 / total_t as f64,
        eps_rotation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Enumerates controlled-phase gates of the textbook circuit directly.
    fn enumerate_textbook(n: usize) -> BTreeMap<u32, u64> {
        let mut counts = BTreeMap::new();
        for target in 0..n {
            for control in target + 1..n {
                *counts.entry((control - target) as u32).or_insert(0) += 1;
            }
        }
        counts
    }

    #[test]
    fn single_qubit_has_no_rotations() {
        assert_eq!(qft_spectrum(1, None).unwrap().total(), 0);
        assert!(qft_spectrum(0, None).is_err());
    }

    #[test]
    fn textbook_matches_enumeration() {
        let s = qft_spectrum(8, None).unwrap();
        assert_eq!(s.total(), 28);
        assert_eq!(s.counts, enumerate_textbook(8));
        for k in 1..8 {
            assert_eq!(s.counts[&k], 8 - k as u64);
        }
    }

    #[test]
    fn truncated_256() {
        let s = qft_spectrum(256, Some(32)).unwrap();
        let brute: u64 = enumerate_textbook(256)
            .into_iter()
            .filter(|(k, _)| *k < 32)
            .map(|(_, c)| c)
            .sum();
        assert_eq!(brute, 7440);
        assert_eq!(s.total(), 7440);
    }

    #[test]
    fn minimal_plan() {
        let plan = oqft_plan(64, 32, 32).unwrap();
        let sizes: Vec<_> = plan.layers.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![2, 1, 0, 0, 2]);
        assert_eq!(plan.inserted_qft_count, 0);
    }

    #[test]
    fn plan_256() {
        let plan = oqft_plan(256, 32, 32).unwrap();
        assert_eq!(plan.inserted_qft_count, 6);
        assert_eq!(plan.spectrum().total(), 7440 + 6 * 496);
        assert_eq!(plan.spectrum().total(), 10416);
        let qft = &plan.layers[0][0];
        assert_eq!(qft.additions.len(), 31);
        let widths: Vec<_> = qft.additions.iter().map(|a| a.width).collect();
        assert_eq!(widths, (1..=31).rev().collect::<Vec<_>>());
        assert_eq!(plan.layers.len(), OQFT_LAYERS);
        for op in plan.ops() {
            if op.kind == BlockOpKind::Bpr {
                assert_eq!(op.blocks.len(), 2);
                assert_eq!(op.blocks[1], op.blocks[0] + 1);
            }
            assert!(op.additions.iter().all(|a| a.width <= plan.m));
        }
        for block in 0..plan.num_blocks {
            assert!(plan
                .ops()
                .any(|op| op.kind.is_qft() && op.blocks == vec![block]));
        }
    }

    #[test]
    fn plan_rejects_bad_sizes() {
        assert!(oqft_plan(100, 32, 32).is_err());
        assert!(oqft_plan(32, 32, 32).is_err());
    }

    #[test]
    fn census_additions_match_spectrum() {
        let plan = oqft_plan(512, 32, 32).unwrap();
        let widths: u64 = plan.census_additions().iter().map(|a| a.width as u64).sum();
        assert_eq!(widths, plan.spectrum().total());
    }

    #[test]
    fn overhead_band() {
        for n in [256, 512, 1024, 2048] {
            let plan = oqft_plan(n, 32, 32).unwrap();
            let trunc = qft_spectrum(n, Some(32)).unwrap().total() as f64;
            let ratio = plan.spectrum().total() as f64 / trunc;
            assert!((1.30..=1.55).contains(&ratio), "n={n} ratio={ratio}");
        }
    }

    #[test]
    fn synthesis_constants() {
        assert_eq!(t_per_rotation(1e-5 / 2048.0).unwrap(), 41);
        assert_eq!(t_per_rotation(0.5).unwrap(), 11);
        assert_eq!(t_per_rotation(1e-5 / 1024.0).unwrap(), 40);
        assert!(t_per_rotation(0.0).is_err());
        assert!(t_per_rotation(1.0).is_err());
    }

    #[test]
    fn synthesis_counts() {
        let empty = RotationSpectrum::default();
        assert_eq!(tcount_synthesis(&empty, 1e-3).unwrap().t_gates, 0);
        let s = qft_spectrum(8, None).unwrap();
        let per = t_per_rotation(1e-3).unwrap();
        assert_eq!(per, 21);
        assert_eq!(tcount_synthesis(&s, 1e-3).unwrap().t_gates, 28 * per);
        let mut doubled = s.clone();
        doubled.absorb(&s);
        assert_eq!(
            tcount_synthesis(&doubled, 1e-3).unwrap().t_gates,
            2 * tcount_synthesis(&s, 1e-3).unwrap().t_gates
        );
    }

    #[test]
    fn pg_counts() {
        let one = tcount_pg(&[Addition {
            controlled: true,
            width: 1,
        }]);
        assert_eq!((one.toffolis, one.t_gates), (1, 4));
        let plain = tcount_pg(&[Addition {
            controlled: false,
            width: 5,
        }]);
        assert_eq!(plain.toffolis, 4);

        let trunc = tcount_pg_truncated(256, 32);
        let brute: u64 = (0..256usize).map(|i| 31.min(255 - i) as u64).sum();
        assert_eq!(trunc.toffolis, brute);
        let oqft = tcount_pg_oqft(&oqft_plan(256, 32, 32).unwrap());
        assert!(oqft.t_gates > trunc.t_gates);
    }

    #[test]
    fn budget_bands() {
        let big = shor_budget(2048).unwrap();
        assert!((1e9..=1e11).contains(&(big.total_t as f64)));
        let small = shor_budget(256).unwrap();
        assert!((1e-11..=1e-9).contains(&small.per_t_error_target));
        assert!((small.per_t_error_target * small.total_t as f64 - 1.0).abs() < 1e-12);
        assert!(shor_budget(4).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn cutoff_is_pointwise_truncation(n in 1usize..200, c in 2u32..64) {
                let full = qft_spectrum(n, None).unwrap();
                let cut = qft_spectrum(n, Some(c)).unwrap();
                for (k, v) in &full.counts {
                    let expect = if *k < c { *v } else { 0 };
                    prop_assert_eq!(cut.counts.get(k).copied().unwrap_or(0), expect);
                }
                prop_assert_eq!(full.total(), (n * (n - 1) / 2) as u64);
            }

            #[test]
            fn pg_cost_ignores_angles(widths in proptest::collection::vec(1usize..40, 0..30)) {
                // Reordering the additions changes which angles are realised
                // but not their Toffoli cost.
                let adds: Vec<_> = widths.iter().map(|&width| Addition { controlled: true, width }).collect();
                let mut rev = adds.clone();
                rev.reverse();
                prop_assert_eq!(tcount_pg(&adds), tcount_pg(&rev));
                prop_assert_eq!(tcount_pg(&adds).toffolis, widths.iter().map(|&w| w as u64).sum::<u64>());
            }
        }
    }
}
