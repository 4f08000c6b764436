//! Tick-level simulation of one ripple-carry adder invocation inside a hot
//! zone: bridge-pipelined MAJ/UMA waves, stochastic cultivation factories and
//! a per-tick cap on concurrently moving qubits.

mod engine;
pub mod layout;
pub mod template;
pub mod trace;

use serde::{Deserialize, Serialize};

pub use engine::{
    run_adder, run_adder_traced, run_adder_with, run_adder_with_trace, AdderRunStats, RunSpec,
};
pub use layout::{build_layout, build_zone_layout, Layout, RowKind, Variant, MAX_WIDTH, MIN_WIDTH};
pub use template::{schedule_template, schedule_template_with, ControlKnobs, ScheduleTemplate};
pub use trace::{export_trace, parse_trace, QubitRecord, QubitRole, QubitStatus, TickTrace};

use crate::error::{domain, Result};
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Sample mean and (n - 1) standard deviation.
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std: var.sqrt(),
        }
    }
}

/// Seed-aggregated statistics for one (variant, width, controlled) point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdderStats {
    pub variant: Variant,
    pub w: usize,
    pub controlled: bool,
    pub zone_width: usize,
    pub samples: usize,
    pub total_ticks: MeanStd,
    pub footprint_patches: MeanStd,
    pub peak_dof: MeanStd,
    pub avg_dof: MeanStd,
    pub moves_per_bit: MeanStd,
    pub avg_move_spans: MeanStd,
    pub factory_to_compute_avg_spans: MeanStd,
    pub stalled_ticks: MeanStd,
    pub magic_wait_ticks: MeanStd,
    pub max_active_bridges: MeanStd,
    /// Largest per-run peak DOF across the seeds.
    pub max_peak_dof: u32,
    /// Mean footprint times mean duration, in patch-seconds.
    pub volume: f64,
}

pub fn aggregate_runs(runs: &[AdderRunStats], p: &SystemParams) -> Result<AdderStats> {
    if runs.len() < 2 {
        return domain(format!(
            "aggregation needs at least two runs, got {}",
            runs.len()
        ));
    }
    let first = &runs[0];
    if let Some(odd) = runs.iter().find(|r| {
        (r.variant, r.w, r.controlled, r.zone_width)
            != (first.variant, first.w, first.controlled, first.zone_width)
    }) {
        return domain(format!(
            "heterogeneous runs: {} w={} controlled={} zone={} vs {} w={} controlled={} zone={}",
            first.variant,
            first.w,
            first.controlled,
            first.zone_width,
            odd.variant,
            odd.w,
            odd.controlled,
            odd.zone_width
        ));
    }
    let col = |f: fn(&AdderRunStats) -> f64| {
        let xs: Vec<f64> = runs.iter().map(f).collect();
        MeanStd::of(&xs)
    };
    let total_ticks = col(|r| r.total_ticks);
    let footprint = col(|r| r.footprint_patches as f64);
    Ok(AdderStats {
        variant: first.variant,
        w: first.w,
        controlled: first.controlled,
        zone_width: first.zone_width,
        samples: runs.len(),
        total_ticks,
        footprint_patches: footprint,
        peak_dof: col(|r| f64::from(r.peak_dof)),
        avg_dof: col(|r| r.avg_dof),
        moves_per_bit: col(|r| r.moves_per_bit),
        avg_move_spans: col(|r| r.avg_move_spans),
        factory_to_compute_avg_spans: col(|r| r.factory_to_compute_avg_spans),
        stalled_ticks: col(|r| f64::from(r.stalled_ticks)),
        magic_wait_ticks: col(|r| f64::from(r.magic_wait_ticks)),
        max_active_bridges: col(|r| f64::from(r.max_active_bridges)),
        max_peak_dof: runs.iter().map(|r| r.peak_dof).max().unwrap_or(0),
        volume: footprint.mean * total_ticks.mean * p.t_r,
    })
}

/// Runs every listed seed and aggregates the results.
pub fn simulate_point(
    variant: Variant,
    w: usize,
    controlled: bool,
    seeds: &[u64],
    p: &SystemParams,
) -> Result<AdderStats> {
    simulate_spec(&RunSpec::new(variant, w, controlled, 0), seeds, p)
}

/// Like [`simulate_point`], taking every setting but the seed from `base`.
pub fn simulate_spec(base: &RunSpec, seeds: &[u64], p: &SystemParams) -> Result<AdderStats> {
    let runs = seeds
        .iter()
        .map(|&seed| run_adder_with(&RunSpec { seed, ..*base }, p).map(|(s, _)| s))
        .collect::<Result<Vec<_>>>()?;
    aggregate_runs(&runs, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> SystemParams {
        SystemParams::default()
    }

    #[test]
    fn deterministic_per_seed() {
        let a = run_adder_traced(Variant::Gidney, 8, true, 7, &p()).unwrap();
        let b = run_adder_traced(Variant::Gidney, 8, true, 7, &p()).unwrap();
        assert_eq!(a, b);
        let c = run_adder(Variant::Gidney, 8, true, 8, &p()).unwrap();
        assert_ne!(a.0.dof_per_tick, c.dof_per_tick);
    }

    #[test]
    fn trace_replays_dof_series() {
        for v in [Variant::Gidney, Variant::Cuccaro] {
            let (stats, trace) = run_adder_traced(v, 6, false, 3, &p()).unwrap();
            assert_eq!(trace.dof_series(), stats.dof_per_tick);
            let text = export_trace(&trace);
            assert!(text[0].contains("variant=") && text[0].contains("params="));
            let back = parse_trace(&text).unwrap();
            assert_eq!(back, trace);
        }
    }

    #[test]
    fn trace_initial_and_continuity() {
        let (_, trace) = run_adder_traced(Variant::Cuccaro, 5, false, 11, &p()).unwrap();
        let layout = build_layout(Variant::Cuccaro, 5, false).unwrap();
        let data_rows = [
            layout.row_index(RowKind::DataA).unwrap(),
            layout.row_index(RowKind::DataB).unwrap(),
        ];
        let data: Vec<_> = trace.frames[0]
            .qubits
            .iter()
            .filter(|q| q.role == QubitRole::Data)
            .collect();
        assert_eq!(data.len(), 10);
        for q in data {
            assert_eq!(q.status, QubitStatus::Idle);
            assert!(data_rows.contains(&q.row));
        }
        for pair in trace.frames.windows(2) {
            assert!(pair[0].qubits.windows(2).all(|w| w[0].id < w[1].id));
            for q in &pair[0].qubits {
                if let QubitStatus::InFlight { remaining, dest } = q.status {
                    let next = pair[1].qubits.iter().find(|r| r.id == q.id).unwrap();
                    match next.status {
                        QubitStatus::InFlight { remaining: r, .. } if remaining > 1 => {
                            assert_eq!(r, remaining - 1)
                        }
                        QubitStatus::InFlight { .. } => panic!("flight outlived its countdown"),
                        _ => {
                            assert_eq!(remaining, 1);
                            assert_eq!((next.col, next.row), dest);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn slots_hold_one_qubit() {
        let (_, trace) = run_adder_traced(Variant::Gidney, 6, true, 2, &p()).unwrap();
        for f in &trace.frames {
            let mut seen = std::collections::HashSet::new();
            for q in f.qubits.iter().filter(|q| !q.role.is_transient()) {
                assert!(
                    seen.insert((q.col, q.row)),
                    "tick {} slot {:?}",
                    f.tick,
                    (q.col, q.row)
                );
            }
        }
    }

    #[test]
    fn minimal_width_bounds() {
        // With factories that never miss, the run is reaction limited and the
        // template depth bounds it on both sides.
        let ample = SystemParams {
            cult_mean_ticks: 1.0,
            ..p()
        };
        for v in [Variant::Gidney, Variant::Cuccaro] {
            let depth = schedule_template(v, false).unwrap().depth();
            for seed in 0..10 {
                let s = run_adder(v, 2, false, seed, &ample).unwrap();
                assert!(
                    s.total_ticks >= depth && s.total_ticks <= 3.0 * depth,
                    "{v}: {}",
                    s.total_ticks
                );
                let s = run_adder(v, 2, false, seed, &p()).unwrap();
                assert!(s.total_ticks >= depth);
            }
        }
    }

    #[test]
    fn dof_within_cap_and_footprints_match() {
        for w in [2, 3, 9, 17, 32] {
            let g = run_adder(Variant::Gidney, w, false, 1, &p()).unwrap();
            let c = run_adder(Variant::Cuccaro, w, false, 1, &p()).unwrap();
            assert_eq!(g.footprint_patches, c.footprint_patches);
            for s in [g, c] {
                assert!(s.peak_dof <= p().dof_cap);
                assert!(s.avg_dof <= f64::from(s.peak_dof));
                assert_eq!(s.dof_per_tick.len(), s.total_ticks.ceil() as usize);
            }
        }
    }

    #[test]
    fn tight_cap_deadlocks() {
        let q = SystemParams { dof_cap: 1, ..p() };
        match run_adder(Variant::Gidney, 4, false, 0, &q) {
            Err(crate::Error::Deadlock(msg)) => assert!(msg.contains("bridge_bell"), "{msg}"),
            other => panic!("expected deadlock, got {other:?}"),
        }
    }

    #[test]
    fn tighter_cap_stalls() {
        let q = SystemParams { dof_cap: 8, ..p() };
        let s = run_adder(Variant::Cuccaro, 16, false, 0, &q).unwrap();
        assert!(s.stalled_ticks > 0);
        assert!(s.peak_dof <= 8);
    }

    #[test]
    fn t_states_match_template() {
        for v in [Variant::Gidney, Variant::Cuccaro] {
            let per_bit = schedule_template(v, false).unwrap().t_states_per_bit();
            let s = run_adder(v, 7, false, 5, &p()).unwrap();
            assert_eq!(s.t_states, 7 * per_bit);
        }
    }

    #[test]
    fn aggregate_identical_and_mixed() {
        let r = run_adder(Variant::Gidney, 4, false, 0, &p()).unwrap();
        let a = aggregate_runs(&[r.clone(), r.clone()], &p()).unwrap();
        assert_eq!(a.total_ticks.std, 0.0);
        assert_eq!(a.samples, 2);
        assert_eq!(a.volume, a.footprint_patches.mean * r.total_ticks * p().t_r);
        let other = run_adder(Variant::Gidney, 5, false, 0, &p()).unwrap();
        assert!(aggregate_runs(&[r.clone(), other], &p()).is_err());
        assert!(aggregate_runs(&[r], &p()).is_err());
    }

    #[test]
    fn bad_inputs_rejected() {
        assert!(run_adder(Variant::Gidney, 1, false, 0, &p()).is_err());
        let bad = SystemParams { d: 4, ..p() };
        assert!(matches!(
            run_adder(Variant::Gidney, 4, false, 0, &bad),
            Err(crate::Error::Validation(_))
        ));
    }
}
