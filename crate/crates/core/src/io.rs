//! Configuration files, CSV records and run manifests.
//!
//! Config files hold one `key = value` per line with `#` comments. Physical
//! parameters use their bare field names; module knobs are prefixed with
//! `control.`, `hl.`, `plan.`, `synthesis.` or `macro.`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::census::{PlanKnobs, SynthesisModel};
use crate::error::{Error, Result};
use crate::hl::{HlConstants, HlCost};
use crate::macro_eval::{MacroKnobs, MacroResult};
use crate::microsim::{AdderStats, ControlKnobs, Variant};
use crate::params::{validate_params, DistanceMetric, SystemParams};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Config {
    pub params: SystemParams,
    pub control: ControlKnobs,
    pub hl: HlConstants,
    pub plan: PlanKnobs,
    pub synthesis: SynthesisModel,
    pub macro_knobs: MacroKnobs,
}

fn set<T: FromStr>(slot: &mut T, value: &str, line: usize) -> Result<()> {
    *slot = value.parse().map_err(|_| Error::Config {
        line,
        msg: format!("cannot parse `{value}`"),
    })?;
    Ok(())
}

impl Config {
    fn apply(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let p = &mut self.params;
        match key {
            "p_phys" => set(&mut p.p_phys, value, line),
            "d" => set(&mut p.d, value, line),
            "ell" => set(&mut p.ell, value, line),
            "accel" => set(&mut p.accel, value, line),
            "t_gate" => set(&mut p.t_gate, value, line),
            "t_meas" => set(&mut p.t_meas, value, line),
            "t_dec" => set(&mut p.t_dec, value, line),
            "t_r" => set(&mut p.t_r, value, line),
            "t_pickdrop" => set(&mut p.t_pickdrop, value, line),
            "f_cult" => set(&mut p.f_cult, value, line),
            "cult_mean_ticks" => set(&mut p.cult_mean_ticks, value, line),
            "dof_cap" => set(&mut p.dof_cap, value, line),
            "p_cnot_logical" => set(&mut p.p_cnot_logical, value, line),
            "p_t_logical" => set(&mut p.p_t_logical, value, line),
            "distance_metric" => {
                p.distance_metric = match value {
                    "euclidean" => DistanceMetric::Euclidean,
                    "manhattan" => DistanceMetric::Manhattan,
                    _ => {
                        return Err(Error::Config {
                            line,
                            msg: format!("unknown distance metric `{value}`"),
                        })
                    }
                };
                Ok(())
            }
            "control.extra_weight" => set(&mut self.control.extra_weight, value, line),
            "control.spans" => set(&mut self.control.spans, value, line),
            "hl.gidney_ripple_offset" => set(&mut self.hl.gidney_ripple_offset, value, line),
            "hl.cuccaro_ripple_offset" => set(&mut self.hl.cuccaro_ripple_offset, value, line),
            "hl.lookahead_depth_slope" => set(&mut self.hl.lookahead_depth_slope, value, line),
            "hl.lookahead_depth_offset" => set(&mut self.hl.lookahead_depth_offset, value, line),
            "hl.gidney_lookahead_toffolis_per_bit" => {
                set(&mut self.hl.gidney_lookahead_toffolis_per_bit, value, line)
            }
            "hl.basic_lookahead_toffolis_per_bit" => {
                set(&mut self.hl.basic_lookahead_toffolis_per_bit, value, line)
            }
            "hl.lookahead_workspace_per_bit" => {
                set(&mut self.hl.lookahead_workspace_per_bit, value, line)
            }
            "hl.patches_per_factory" => set(&mut self.hl.patches_per_factory, value, line),
            "plan.inserted_qft_offset" => set(&mut self.plan.inserted_qft_offset, value, line),
            "synthesis.offset" => set(&mut self.synthesis.offset, value, line),
            "synthesis.slope" => set(&mut self.synthesis.slope, value, line),
            "macro.hop_ticks" => set(&mut self.macro_knobs.hop_ticks, value, line),
            "macro.pg_batch" => set(&mut self.macro_knobs.pg_batch, value, line),
            "macro.reflection_ticks" => set(&mut self.macro_knobs.reflection_ticks, value, line),
            "macro.zone_width" => set(&mut self.macro_knobs.zone_width, value, line),
            _ => Err(Error::Config {
                line,
                msg: format!("unknown key `{key}`"),
            }),
        }
    }
}

/// Parses config text over the defaults and validates the result.
pub fn parse_config_str(text: &str) -> Result<Config> {
    let mut cfg = Config::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| Error::Config {
            line,
            msg: format!("expected `key = value`, got `{body}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(Error::Config {
                line,
                msg: format!("expected `key = value`, got `{body}`"),
            });
        }
        cfg.apply(key, value, line)?;
    }
    let report = validate_params(&cfg.params);
    if !report.is_valid() {
        return Err(Error::Validation(report.violations));
    }
    if cfg.macro_knobs.pg_batch == 0 || cfg.macro_knobs.zone_width < 2 {
        return Err(Error::Validation(vec![
            "macro.pg_batch must be positive and macro.zone_width at least 2".into(),
        ]));
    }
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<Config> {
    parse_config_str(&std::fs::read_to_string(path)?)
}

/// Canonical text of every key, parseable by [`parse_config_str`].
pub fn render_config(c: &Config) -> String {
    let p = &c.params;
    let metric = match p.distance_metric {
        DistanceMetric::Euclidean => "euclidean",
        DistanceMetric::Manhattan => "manhattan",
    };
    let rows: Vec<(&str, String)> = vec![
        ("p_phys", p.p_phys.to_string()),
        ("d", p.d.to_string()),
        ("ell", p.ell.to_string()),
        ("accel", p.accel.to_string()),
        ("t_gate", p.t_gate.to_string()),
        ("t_meas", p.t_meas.to_string()),
        ("t_dec", p.t_dec.to_string()),
        ("t_r", p.t_r.to_string()),
        ("t_pickdrop", p.t_pickdrop.to_string()),
        ("f_cult", p.f_cult.to_string()),
        ("cult_mean_ticks", p.cult_mean_ticks.to_string()),
        ("dof_cap", p.dof_cap.to_string()),
        ("p_cnot_logical", p.p_cnot_logical.to_string()),
        ("p_t_logical", p.p_t_logical.to_string()),
        ("distance_metric", metric.to_string()),
        ("control.extra_weight", c.control.extra_weight.to_string()),
        ("control.spans", c.control.spans.to_string()),
        (
            "hl.gidney_ripple_offset",
            c.hl.gidney_ripple_offset.to_string(),
        ),
        (
            "hl.cuccaro_ripple_offset",
            c.hl.cuccaro_ripple_offset.to_string(),
        ),
        (
            "hl.lookahead_depth_slope",
            c.hl.lookahead_depth_slope.to_string(),
        ),
        (
            "hl.lookahead_depth_offset",
            c.hl.lookahead_depth_offset.to_string(),
        ),
        (
            "hl.gidney_lookahead_toffolis_per_bit",
            c.hl.gidney_lookahead_toffolis_per_bit.to_string(),
        ),
        (
            "hl.basic_lookahead_toffolis_per_bit",
            c.hl.basic_lookahead_toffolis_per_bit.to_string(),
        ),
        (
            "hl.lookahead_workspace_per_bit",
            c.hl.lookahead_workspace_per_bit.to_string(),
        ),
        (
            "hl.patches_per_factory",
            c.hl.patches_per_factory.to_string(),
        ),
        (
            "plan.inserted_qft_offset",
            c.plan.inserted_qft_offset.to_string(),
        ),
        ("synthesis.offset", c.synthesis.offset.to_string()),
        ("synthesis.slope", c.synthesis.slope.to_string()),
        ("macro.hop_ticks", c.macro_knobs.hop_ticks.to_string()),
        ("macro.pg_batch", c.macro_knobs.pg_batch.to_string()),
        (
            "macro.reflection_ticks",
            c.macro_knobs.reflection_ticks.to_string(),
        ),
        ("macro.zone_width", c.macro_knobs.zone_width.to_string()),
    ];
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

pub fn config_hash(c: &Config) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(&Sha256::digest(render_config(c).as_bytes())[..8])
}

/// A CSV row type with a fixed column list.
pub trait CsvRecord: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];
}

/// Header line first, then one row per record, newline terminated.
pub fn to_csv_string<T: CsvRecord>(records: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(T::HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_csv<T: CsvRecord>(path: &Path, records: &[T]) -> Result<()> {
    std::fs::write(path, to_csv_string(records)?)?;
    Ok(())
}

pub fn read_csv<T: CsvRecord>(text: &str) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != T::HEADER {
        return Err(Error::Domain(format!(
            "CSV header `{}` does not match `{}`",
            header.join(","),
            T::HEADER.join(",")
        )));
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub variant: String,
    pub n: usize,
    pub k: u32,
    pub count: u64,
}

impl CsvRecord for SpectrumRecord {
    const HEADER: &'static [&'static str] = &["variant", "n", "k", "count"];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TCountRecord {
    pub variant: String,
    pub n: usize,
    pub t_gates: u64,
    pub toffolis: u64,
}

impl CsvRecord for TCountRecord {
    const HEADER: &'static [&'static str] = &["variant", "n", "t_gates", "toffolis"];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HlRecord {
    pub family: String,
    pub n: u64,
    pub factories_opt: u64,
    pub footprint: u64,
    pub time_s: f64,
    pub volume: f64,
}

impl CsvRecord for HlRecord {
    const HEADER: &'static [&'static str] = &[
        "family",
        "n",
        "factories_opt",
        "footprint",
        "time_s",
        "volume",
    ];
}

impl From<&HlCost> for HlRecord {
    fn from(c: &HlCost) -> Self {
        Self {
            family: c.family.name().to_string(),
            n: c.n,
            factories_opt: c.factories,
            footprint: c.footprint,
            time_s: c.time_s,
            volume: c.volume,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub variant: Variant,
    pub w: usize,
    pub controlled: bool,
    pub zone_width: usize,
    #[serde(rename = "seed_count")]
    pub samples: usize,
    pub total_ticks_mean: f64,
    pub total_ticks_std: f64,
    pub footprint_mean: f64,
    pub footprint_std: f64,
    pub peak_dof_mean: f64,
    pub peak_dof_std: f64,
    pub peak_dof_max: u32,
    pub avg_dof_mean: f64,
    pub avg_dof_std: f64,
    pub moves_per_bit_mean: f64,
    pub moves_per_bit_std: f64,
    pub avg_move_spans_mean: f64,
    pub avg_move_spans_std: f64,
    pub factory_distance_mean: f64,
    pub factory_distance_std: f64,
    pub stalled_ticks_mean: f64,
    pub stalled_ticks_std: f64,
    pub magic_wait_ticks_mean: f64,
    pub magic_wait_ticks_std: f64,
    pub max_active_bridges_mean: f64,
    pub max_active_bridges_std: f64,
    pub volume: f64,
}

impl CsvRecord for StatsRecord {
    const HEADER: &'static [&'static str] = &[
        "variant",
        "w",
        "controlled",
        "zone_width",
        "seed_count",
        "total_ticks_mean",
        "total_ticks_std",
        "footprint_mean",
        "footprint_std",
        "peak_dof_mean",
        "peak_dof_std",
        "peak_dof_max",
        "avg_dof_mean",
        "avg_dof_std",
        "moves_per_bit_mean",
        "moves_per_bit_std",
        "avg_move_spans_mean",
        "avg_move_spans_std",
        "factory_distance_mean",
        "factory_distance_std",
        "stalled_ticks_mean",
        "stalled_ticks_std",
        "magic_wait_ticks_mean",
        "magic_wait_ticks_std",
        "max_active_bridges_mean",
        "max_active_bridges_std",
        "volume",
    ];
}

impl From<&AdderStats> for StatsRecord {
    fn from(s: &AdderStats) -> Self {
        Self {
            variant: s.variant,
            w: s.w,
            controlled: s.controlled,
            zone_width: s.zone_width,
            samples: s.samples,
            total_ticks_mean: s.total_ticks.mean,
            total_ticks_std: s.total_ticks.std,
            footprint_mean: s.footprint_patches.mean,
            footprint_std: s.footprint_patches.std,
            peak_dof_mean: s.peak_dof.mean,
            peak_dof_std: s.peak_dof.std,
            peak_dof_max: s.max_peak_dof,
            avg_dof_mean: s.avg_dof.mean,
            avg_dof_std: s.avg_dof.std,
            moves_per_bit_mean: s.moves_per_bit.mean,
            moves_per_bit_std: s.moves_per_bit.std,
            avg_move_spans_mean: s.avg_move_spans.mean,
            avg_move_spans_std: s.avg_move_spans.std,
            factory_distance_mean: s.factory_to_compute_avg_spans.mean,
            factory_distance_std: s.factory_to_compute_avg_spans.std,
            stalled_ticks_mean: s.stalled_ticks.mean,
            stalled_ticks_std: s.stalled_ticks.std,
            magic_wait_ticks_mean: s.magic_wait_ticks.mean,
            magic_wait_ticks_std: s.magic_wait_ticks.std,
            max_active_bridges_mean: s.max_active_bridges.mean,
            max_active_bridges_std: s.max_active_bridges.std,
            volume: s.volume,
        }
    }
}

pub fn read_stats_csv(text: &str) -> Result<Vec<StatsRecord>> {
    read_csv(text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroRecord {
    /// `baseline` or `oqft`.
    pub schedule: String,
    pub n: usize,
    pub hz: usize,
    pub time_s: f64,
    pub footprint: usize,
    pub volume: f64,
    pub avg_dof: f64,
    pub peak_dof: u32,
    pub ancilla_overhead: usize,
    pub total_ticks: f64,
    pub adder_ticks: f64,
    pub hop_ticks: f64,
    pub pg_ticks: f64,
    pub reflection_ticks: f64,
}

impl CsvRecord for MacroRecord {
    const HEADER: &'static [&'static str] = &[
        "schedule",
        "n",
        "hz",
        "time_s",
        "footprint",
        "volume",
        "avg_dof",
        "peak_dof",
        "ancilla_overhead",
        "total_ticks",
        "adder_ticks",
        "hop_ticks",
        "pg_ticks",
        "reflection_ticks",
    ];
}

impl From<&MacroResult> for MacroRecord {
    fn from(r: &MacroResult) -> Self {
        Self {
            schedule: if r.is_baseline() { "baseline" } else { "oqft" }.to_string(),
            n: r.n,
            hz: r.hz,
            time_s: r.time_s,
            footprint: r.footprint_qubits,
            volume: r.volume,
            avg_dof: r.avg_dof,
            peak_dof: r.peak_dof,
            ancilla_overhead: r.ancilla_overhead,
            total_ticks: r.total_ticks,
            adder_ticks: r.adder_ticks,
            hop_ticks: r.hop_ticks,
            pg_ticks: r.pg_ticks,
            reflection_ticks: r.reflection_ticks,
        }
    }
}

/// One oracle identity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub check: String,
    pub n: usize,
    pub cutoff: usize,
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CsvRecord for OracleRecord {
    const HEADER: &'static [&'static str] = &["check", "n", "cutoff", "error", "tolerance", "pass"];
}

pub fn write_trace(path: &Path, trace: &crate::microsim::TickTrace) -> Result<()> {
    let mut text = crate::microsim::export_trace(trace).join("\n");
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<crate::microsim::TickTrace> {
    let text = std::fs::read_to_string(path)?;
    let lines: Vec<&str> = text.lines().collect();
    crate::microsim::parse_trace(&lines)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params_hash: String,
    pub seeds: Vec<u64>,
    pub version: String,
    /// Unix seconds.
    pub timestamp: u64,
    pub outputs: Vec<PathBuf>,
    /// Which adder statistics table fed macro results, when one did.
    pub stats_table: Option<String>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config: &Config, seeds: Vec<u64>) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            command: command.into(),
            params_hash: config_hash(config),
            seeds,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
            outputs: Vec::new(),
            stats_table: None,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text =
            serde_json::to_string_pretty(self).map_err(|e| Error::Domain(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        serde_json::from_str(&std::fs::read_to_string(path)?)
            .map_err(|e| Error::Domain(e.to_string()))
    }
}

/// Seeds from `N` (seeds 0..N) or a comma-separated list.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::Domain(format!("bad seed spec `{s}`"));
    if s.contains(',') {
        return s
            .split(',')
            .map(|x| x.trim().parse().map_err(|_| bad()))
            .collect();
    }
    let n: u64 = s.trim().parse().map_err(|_| bad())?;
    Ok((0..n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        let c = parse_config_str("").unwrap();
        assert_eq!(c, Config::default());
        assert_eq!(c.params.t_r, 1e-3);
        assert_eq!(c.params.d, 15);
        assert_eq!(c.params.accel, 5500.0);
    }

    #[test]
    fn overrides_and_comments() {
        let c = parse_config_str(
            "# caps\ndof_cap = 40 # inline\n\nmacro.hop_ticks=2\ndistance_metric = manhattan\n",
        )
        .unwrap();
        assert_eq!(c.params.dof_cap, 40);
        assert_eq!(c.macro_knobs.hop_ticks, 2.0);
        assert_eq!(c.params.distance_metric, DistanceMetric::Manhattan);
    }

    #[test]
    fn errors_carry_lines() {
        match parse_config_str("d = 15\nbogus = 1\n") {
            Err(Error::Config { line: 2, msg }) => assert!(msg.contains("bogus")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_config_str("\n\nd 15"),
            Err(Error::Config { line: 3, .. })
        ));
        assert!(matches!(
            parse_config_str("t_r = fast"),
            Err(Error::Config { line: 1, .. })
        ));
        assert!(matches!(
            parse_config_str("d = 4"),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn render_round_trips() {
        let c = parse_config_str("accel = 1234.5\nsynthesis.slope = 1.3\n").unwrap();
        let back = parse_config_str(&render_config(&c)).unwrap();
        assert_eq!(back, c);
        assert_eq!(config_hash(&back), config_hash(&c));
        assert_ne!(config_hash(&c), config_hash(&Config::default()));
    }

    #[test]
    fn header_only_for_no_records() {
        let s = to_csv_string::<SpectrumRecord>(&[]).unwrap();
        assert_eq!(s, "variant,n,k,count\n");
        assert!(read_csv::<SpectrumRecord>(&s).unwrap().is_empty());
    }

    #[test]
    fn header_mismatch_rejected() {
        assert!(read_csv::<TCountRecord>("variant,n,k,count\n").is_err());
    }

    #[test]
    fn seeds_parse() {
        assert_eq!(parse_seeds("3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("5, 9,2").unwrap(), vec![5, 9, 2]);
        assert!(parse_seeds("x").is_err());
    }

    use crate::microsim::{simulate_spec, RunSpec};

    fn close_12(a: f64, b: f64) -> bool {
        a == b || ((a - b).abs() / a.abs().max(b.abs())) < 1e-12
    }

    #[test]
    fn stats_csv_round_trip() {
        let p = SystemParams::default();
        let mut rows = Vec::new();
        for (v, w, c) in [(Variant::Gidney, 5, true), (Variant::Cuccaro, 11, false)] {
            let s = simulate_spec(&RunSpec::new(v, w, c, 0), &[1, 2, 3], &p).unwrap();
            rows.push(StatsRecord::from(&s));
        }
        let text = to_csv_string(&rows).unwrap();
        let back = read_stats_csv(&text).unwrap();
        assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            let fa = serde_fields(a);
            let fb = serde_fields(b);
            for ((name, x), (_, y)) in fa.iter().zip(&fb) {
                assert!(close_12(*x, *y), "{name}: {x} vs {y}");
            }
            assert_eq!(
                (a.variant, a.w, a.controlled),
                (b.variant, b.w, b.controlled)
            );
        }
        assert_eq!(to_csv_string(&back).unwrap(), text);
    }

    fn serde_fields(r: &StatsRecord) -> Vec<(&'static str, f64)> {
        vec![
            ("total_ticks_mean", r.total_ticks_mean),
            ("total_ticks_std", r.total_ticks_std),
            ("avg_dof_mean", r.avg_dof_mean),
            ("avg_dof_std", r.avg_dof_std),
            ("factory_distance_mean", r.factory_distance_mean),
            ("avg_move_spans_mean", r.avg_move_spans_mean),
            ("volume", r.volume),
        ]
    }

    #[test]
    fn config_file_loads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "dof_cap = 40\nt_r = 1e-3 # one cycle\n").unwrap();
        let c = parse_config(&path).unwrap();
        assert_eq!(c.params.dof_cap, 40);
        assert!(parse_config(&dir.path().join("missing.cfg")).is_err());
    }
}
