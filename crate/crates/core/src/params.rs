//! Physical and error-correction parameters, plus the ballistic
//! atom-transport timing model.
//!
//! All times are in seconds and lengths in meters. One reaction tick is one
//! QEC cycle (`t_r`); everything downstream counts time in those ticks.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// How grid distances between patch slots are measured, in patch spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMetric {
    /// Straight-line transport.
    #[default]
    Euclidean,
    Manhattan,
}

impl DistanceMetric {
    pub fn distance(self, from: (i32, i32), to: (i32, i32)) -> f64 {
        let dx = f64::from(from.0 - to.0).abs();
        let dy = f64::from(from.1 - to.1).abs();
        match self {
            DistanceMetric::Euclidean => dx.hypot(dy),
            DistanceMetric::Manhattan => dx + dy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub p_phys: f64,
    /// Code distance; patches are `d x d`.
    pub d: u32,
    /// Site spacing.
    pub ell: f64,
    /// Shuttling acceleration in m/s^2.
    pub accel: f64,
    pub t_gate: f64,
    pub t_meas: f64,
    pub t_dec: f64,
    /// Reaction time, equal to the QEC cycle under transversal fault tolerance.
    pub t_r: f64,
    pub t_pickdrop: f64,
    pub f_cult: u32,
    /// Mean number of reaction ticks per accepted T state, per factory patch.
    pub cult_mean_ticks: f64,
    /// Maximum number of logical qubits in flight during one tick.
    pub dof_cap: u32,
    /// Reported only.
    pub p_cnot_logical: f64,
    /// Reported only.
    pub p_t_logical: f64,
    pub distance_metric: DistanceMetric,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            p_phys: 1e-3,
            d: 15,
            ell: 12e-6,
            accel: 5500.0,
            t_gate: 1e-6,
            t_meas: 500e-6,
            t_dec: 500e-6,
            t_r: 1e-3,
            t_pickdrop: 400e-6,
            f_cult: 5,
            cult_mean_ticks: 10.0,
            dof_cap: 40,
            p_cnot_logical: 7e-9,
            p_t_logical: 1e-10,
            distance_metric: DistanceMetric::Euclidean,
        }
    }
}

/// Physical extent of one code patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchGeometry {
    pub span_m: f64,
}

impl PatchGeometry {
    pub fn new(p: &SystemParams) -> Self {
        Self {
            span_m: f64::from(p.d) * p.ell,
        }
    }
}

/// Violated invariants, empty when the parameters are usable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_params(p: &SystemParams) -> ValidationReport {
    let mut violations = Vec::new();
    let times = [
        ("t_gate", p.t_gate),
        ("t_meas", p.t_meas),
        ("t_dec", p.t_dec),
        ("t_r", p.t_r),
        ("t_pickdrop", p.t_pickdrop),
    ];
    for (name, t) in times {
        if !(t > 0.0 && t.is_finite()) {
            violations.push(format!("times strictly positive: {name} = {t}"));
        }
    }
    if p.d.is_multiple_of(2) {
        violations.push(format!("code distance must be odd: d = {}", p.d));
    }
    if p.d < 3 {
        violations.push(format!("code distance must be at least 3: d = {}", p.d));
    }
    if p.dof_cap < 1 {
        violations.push("dof_cap must be at least 1".to_string());
    }
    if !(p.cult_mean_ticks >= 1.0) {
        violations.push(format!(
            "cult_mean_ticks must be at least 1: {}",
            p.cult_mean_ticks
        ));
    }
    for (name, v) in [("ell", p.ell), ("accel", p.accel)] {
        if !(v > 0.0 && v.is_finite()) {
            violations.push(format!("{name} must be strictly positive: {v}"));
        }
    }
    for (name, v) in [
        ("p_phys", p.p_phys),
        ("p_cnot_logical", p.p_cnot_logical),
        ("p_t_logical", p.p_t_logical),
    ] {
        if !(0.0..=1.0).contains(&v) {
            violations.push(format!("{name} must be a probability: {v}"));
        }
    }
    ValidationReport { violations }
}

/// Ballistic transport time over `distance_spans` patch spans:
/// `2 sqrt(L / a)`, optionally shifted by the pick-and-drop overhead.
pub fn move_time(distance_spans: f64, p: &SystemParams, include_pickdrop: bool) -> Result<f64> {
    if !(distance_spans >= 0.0) || !distance_spans.is_finite() {
        return domain(format!(
            "distance must be nonnegative, got {distance_spans}"
        ));
    }
    let length = distance_spans * PatchGeometry::new(p).span_m;
    let ballistic = 2.0 * (length / p.accel).sqrt();
    Ok(if include_pickdrop {
        ballistic + p.t_pickdrop
    } else {
        ballistic
    })
}

/// Reaction ticks charged for a move. Moves that fit in one tick cost one;
/// longer moves must pause for a syndrome-extraction round, which doubles
/// their tick cost.
pub fn move_ticks(distance_spans: f64, p: &SystemParams) -> Result<u32> {
    let t = move_time(distance_spans, p, true)?;
    if t <= p.t_r {
        Ok(1)
    } else {
        Ok(2 * (t / p.t_r).ceil() as u32)
    }
}

/// Distance in patch spans coverable within one reaction tick, ignoring
/// pick-and-drop.
pub fn reach_spans(p: &SystemParams) -> f64 {
    let half = p.t_r / 2.0;
    p.accel * half * half / PatchGeometry::new(p).span_m
}

/// Stable hex digest of every parameter value, used to tag traces and run
/// manifests.
pub fn params_hash(p: &SystemParams) -> String {
    use sha2::{Digest, Sha256};
    let canonical = format!(
        "p_phys={:e};d={};ell={:e};accel={:e};t_gate={:e};t_meas={:e};t_dec={:e};t_r={:e};\
         t_pickdrop={:e};f_cult={};cult_mean_ticks={:e};dof_cap={};p_cnot_logical={:e};\
         p_t_logical={:e};distance_metric={:?}",
        p.p_phys,
        p.d,
        p.ell,
        p.accel,
        p.t_gate,
        p.t_meas,
        p.t_dec,
        p.t_r,
        p.t_pickdrop,
        p.f_cult,
        p.cult_mean_ticks,
        p.dof_cap,
        p.p_cnot_logical,
        p.p_t_logical,
        p.distance_metric,
    );
    hex::encode(&Sha256::digest(canonical.as_bytes())[..8])
}
