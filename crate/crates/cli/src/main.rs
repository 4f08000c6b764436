use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use oqft_core::census::{
    oqft_plan_with, qft_spectrum, tcount_pg_oqft, tcount_pg_truncated, tcount_synthesis_with,
    truncated_qft_additions, OqftPlan, RotationSpectrum,
};
use oqft_core::hl::{hl_sweep, pow2_range};
use oqft_core::io::{
    parse_config, parse_seeds, read_trace, write_csv, write_trace, Config, CsvRecord, HlRecord,
    MacroRecord, OracleRecord, RunManifest, SpectrumRecord, StatsRecord, TCountRecord,
};
use oqft_core::macro_eval::{
    evaluate_macro, hz_values, plan_macro, serial_baseline, StatsTable, BUNDLED_MANIFEST,
};
use oqft_core::microsim::{
    aggregate_runs, run_adder_with, QubitStatus, RunSpec, Variant, MAX_WIDTH, MIN_WIDTH,
};
use oqft_core::oracle::{
    check_block_decomposition, check_pg_qft_circuit, check_reflected_equivalence,
    pg_catalysis_phase,
};

#[derive(Parser)]
#[command(name = "oqft", version, about = "OQFT resource co-design simulator")]
struct Cli {
    /// Flat `key = value` parameter file; defaults apply when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rotation spectra and T-count tables.
    Census(CensusArgs),
    /// Dense statevector identity checks.
    OracleCheck,
    /// High-level adder volume sweep.
    Hl(HlArgs),
    /// Tick-level adder simulation campaign.
    Adder(AdderArgs),
    /// Integrated OQFT and serial QFT sweep.
    Oqft(OqftArgs),
    /// Convert a trace file into a per-qubit frames CSV.
    Frames(FramesArgs),
}

#[derive(Args)]
struct CensusArgs {
    /// Register sizes: `N`, `A..B` (powers of two) or a comma list.
    #[arg(long, default_value = "64..2048")]
    n: String,
    #[arg(long, default_value_t = 32)]
    m: usize,
}

#[derive(Args)]
struct HlArgs {
    #[arg(long, default_value = "4..4096")]
    n: String,
}

#[derive(Args)]
struct AdderArgs {
    /// gidney, cuccaro or both.
    #[arg(long, default_value = "gidney")]
    variant: String,
    /// Widths: `W`, `A..B` (every width) or a comma list.
    #[arg(long, default_value = "32")]
    width: String,
    #[arg(long)]
    controlled: bool,
    /// Seed count N (seeds 0..N) or a comma list.
    #[arg(long, default_value = "20")]
    seeds: String,
    /// Resource-row width; defaults to the adder width.
    #[arg(long)]
    zone_width: Option<usize>,
    /// Write one trace file per run.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct OqftArgs {
    #[arg(long, default_value = "256..2048")]
    n: String,
    #[arg(long, default_value_t = 32)]
    m: usize,
    /// Hot-zone counts; every power of two up to the maximum when absent.
    #[arg(long)]
    hz: Option<String>,
    /// Emit baseline rows even when `--hz` is given.
    #[arg(long)]
    baseline: bool,
    /// Adder statistics CSV; the bundled table is used when absent.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args)]
struct FramesArgs {
    #[arg(long)]
    trace: PathBuf,
}

/// `N`, a comma list, or `A..B`; ranges step by one, or double when `pow2`.
fn parse_list(s: &str, pow2: bool) -> anyhow::Result<Vec<usize>> {
    let num = |x: &str| {
        x.trim()
            .parse::<usize>()
            .with_context(|| format!("bad number `{x}` in `{s}`"))
    };
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b)?);
        if a == 0 || a > b {
            bail!("bad range `{s}`");
        }
        return Ok(if pow2 {
            std::iter::successors(Some(a), |&x| Some(x * 2))
                .take_while(|&x| x <= b)
                .collect()
        } else {
            (a..=b).collect()
        });
    }
    s.split(',').map(num).collect()
}

fn parse_variants(s: &str) -> anyhow::Result<Vec<Variant>> {
    Ok(match s {
        "both" => vec![Variant::Gidney, Variant::Cuccaro],
        v => vec![v.parse()?],
    })
}

struct Run<'a> {
    cfg: &'a Config,
    out: &'a Path,
    manifest: RunManifest,
}

impl Run<'_> {
    fn csv<T: CsvRecord>(&mut self, name: &str, rows: &[T]) -> anyhow::Result<()> {
        let path = self.out.join(name);
        write_csv(&path, rows)?;
        self.manifest.outputs.push(path);
        Ok(())
    }

    fn finish(self) -> anyhow::Result<()> {
        let path = self
            .out
            .join(format!("{}.manifest.json", self.manifest.command));
        self.manifest.write(&path)?;
        Ok(())
    }
}

fn spectrum_rows(variant: &str, n: usize, s: &RotationSpectrum) -> Vec<SpectrumRecord> {
    s.counts
        .iter()
        .map(|(&k, &count)| SpectrumRecord {
            variant: variant.into(),
            n,
            k,
            count,
        })
        .collect()
}

fn plan_for(cfg: &Config, n: usize, m: usize) -> oqft_core::Result<OqftPlan> {
    oqft_plan_with(n, m, m as u32, cfg.plan)
}

fn census(run: &mut Run, a: &CensusArgs) -> anyhow::Result<()> {
    let cfg = run.cfg;
    let cutoff = a.m as u32;
    let mut spectra = Vec::new();
    let mut tcounts = Vec::new();
    for n in parse_list(&a.n, true)? {
        let textbook = qft_spectrum(n, None)?;
        let truncated = qft_spectrum(n, Some(cutoff))?;
        spectra.extend(spectrum_rows("textbook", n, &textbook));
        spectra.extend(spectrum_rows("truncated", n, &truncated));
        let plan = plan_for(cfg, n, a.m).ok();
        if let Some(plan) = &plan {
            spectra.extend(spectrum_rows("oqft", n, &plan.spectrum()));
        }
        if n < 2 {
            continue;
        }
        let eps = 1e-5 / n as f64;
        let mut push = |variant: &str, t: oqft_core::census::TCount| {
            tcounts.push(TCountRecord {
                variant: variant.into(),
                n,
                t_gates: t.t_gates,
                toffolis: t.toffolis,
            })
        };
        push(
            "textbook",
            tcount_synthesis_with(&textbook, eps, cfg.synthesis)?,
        );
        push(
            "truncated",
            tcount_synthesis_with(&truncated, eps, cfg.synthesis)?,
        );
        push("pg_qft", tcount_pg_truncated(n, cutoff));
        if let Some(plan) = &plan {
            push(
                "oqft",
                tcount_synthesis_with(&plan.spectrum(), eps, cfg.synthesis)?,
            );
            push("pg_oqft", tcount_pg_oqft(plan));
        }
    }
    run.csv("spectra.csv", &spectra)?;
    run.csv("tcounts.csv", &tcounts)
}

fn oracle_check(run: &mut Run) -> anyhow::Result<bool> {
    let mut rows = Vec::new();
    let mut push = |check: &str, n: usize, cutoff: usize, error: f64, tolerance: f64| {
        rows.push(OracleRecord {
            check: check.into(),
            n,
            cutoff,
            error,
            tolerance,
            pass: error < tolerance,
        })
    };
    for k in 1..=6 {
        let worst = (0..1usize << k)
            .map(|a| pg_catalysis_phase(k, a).map(|c| c.deviation))
            .collect::<oqft_core::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        push("pg_catalysis", k, k, worst, 1e-10);
    }
    for (n, m) in [(4, 2), (6, 3), (6, 2), (8, 4)] {
        push(
            "block_decomposition",
            n,
            m,
            check_block_decomposition(n, m)?,
            1e-10,
        );
    }
    for (n, c) in [(4, 2), (6, 3), (8, 3)] {
        push(
            "pg_qft_circuit",
            n,
            c,
            check_pg_qft_circuit(n, c)?.max_deviation(),
            1e-9,
        );
    }
    for n in 2..=6 {
        push(
            "reflected_equivalence",
            n,
            n,
            check_reflected_equivalence(n, n)?,
            1e-10,
        );
    }
    for r in &rows {
        println!(
            "{} {} n={} cutoff={} error={:.2e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.check,
            r.n,
            r.cutoff,
            r.error
        );
    }
    run.csv("oracle.csv", &rows)?;
    Ok(rows.iter().all(|r| r.pass))
}

fn hl(run: &mut Run, a: &HlArgs) -> anyhow::Result<()> {
    let ns: Vec<u64> = match parse_list(&a.n, true)?.as_slice() {
        [n] => vec![*n as u64],
        list if a.n.contains("..") => pow2_range(list[0] as u64, *list.last().unwrap() as u64),
        list => list.iter().map(|&n| n as u64).collect(),
    };
    let rows: Vec<HlRecord> = hl_sweep(&ns, &run.cfg.params, &run.cfg.hl)?
        .iter()
        .map(HlRecord::from)
        .collect();
    run.csv("hl.csv", &rows)
}

fn adder(run: &mut Run, a: &AdderArgs) -> anyhow::Result<()> {
    let seeds = parse_seeds(&a.seeds)?;
    if seeds.len() < 2 {
        return Err(oqft_core::Error::Domain("statistics need at least two seeds".into()).into());
    }
    let widths = parse_list(&a.width, false)?;
    if let Some(w) = widths
        .iter()
        .find(|w| !(MIN_WIDTH..=MAX_WIDTH).contains(*w))
    {
        return Err(oqft_core::Error::Domain(format!(
            "width {w} outside {MIN_WIDTH}..={MAX_WIDTH}"
        ))
        .into());
    }
    let trace_dir = run.out.join("traces");
    if a.trace {
        std::fs::create_dir_all(&trace_dir)?;
    }
    let mut rows = Vec::new();
    for variant in parse_variants(&a.variant)? {
        for &w in &widths {
            let mut spec = RunSpec::new(variant, w, a.controlled, 0);
            spec.control = run.cfg.control;
            if let Some(zw) = a.zone_width {
                spec = spec.in_zone(zw);
            }
            let mut runs = Vec::with_capacity(seeds.len());
            for &seed in &seeds {
                let (stats, trace) = if a.trace {
                    oqft_core::microsim::run_adder_with_trace(
                        &RunSpec { seed, ..spec },
                        &run.cfg.params,
                    )
                    .map(|(s, t)| (s, Some(t)))?
                } else {
                    run_adder_with(&RunSpec { seed, ..spec }, &run.cfg.params)?
                };
                if let Some(trace) = trace {
                    let kind = if a.controlled { "ctrl" } else { "plain" };
                    let path = trace_dir.join(format!("{variant}_w{w}_{kind}_s{seed}.trace"));
                    write_trace(&path, &trace)?;
                    run.manifest.outputs.push(path);
                }
                runs.push(stats);
            }
            let agg = aggregate_runs(&runs, &run.cfg.params)?;
            rows.push(StatsRecord::from(&agg));
        }
    }
    run.csv("stats.csv", &rows)
}

fn oqft(run: &mut Run, a: &OqftArgs) -> anyhow::Result<()> {
    let cfg = run.cfg;
    let table = match &a.stats {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading stats table {}", path.display()))?;
            StatsTable::from_csv(&text, path.display().to_string())?
        }
        None => StatsTable::bundled()?,
    };
    run.manifest.stats_table = Some(match &a.stats {
        Some(p) => p.display().to_string(),
        None => format!(
            "bundled ({})",
            BUNDLED_MANIFEST
                .lines()
                .find(|l| l.starts_with("params_hash"))
                .unwrap_or("")
                .trim()
        ),
    });
    let requested = a.hz.as_deref().map(|s| parse_list(s, false)).transpose()?;
    let mut rows = Vec::new();
    for n in parse_list(&a.n, true)? {
        if requested.is_none() || a.baseline {
            if truncated_qft_additions(n, a.m as u32).is_empty() {
                bail!("register size {n} has no additions");
            }
            rows.push(MacroRecord::from(&serial_baseline(
                n,
                a.m,
                &table,
                &cfg.params,
                &cfg.macro_knobs,
            )?));
        }
        let plan = plan_for(cfg, n, a.m)?;
        let hzs = requested.clone().unwrap_or_else(|| hz_values(n, a.m));
        for hz in hzs {
            let s = plan_macro(n, a.m, hz, &plan)?;
            rows.push(MacroRecord::from(&evaluate_macro(
                &s,
                &table,
                &cfg.params,
                &cfg.macro_knobs,
            )?));
        }
    }
    run.csv("macro.csv", &rows)
}

#[derive(serde::Serialize, serde::Deserialize)]
struct FrameRow {
    tick: u64,
    id: usize,
    role: String,
    col: i32,
    row: i32,
    status: String,
    remaining: Option<u32>,
    dest_col: Option<i32>,
    dest_row: Option<i32>,
}

impl CsvRecord for FrameRow {
    const HEADER: &'static [&'static str] = &[
        "tick",
        "id",
        "role",
        "col",
        "row",
        "status",
        "remaining",
        "dest_col",
        "dest_row",
    ];
}

fn frames(run: &mut Run, a: &FramesArgs) -> anyhow::Result<()> {
    let trace = read_trace(&a.trace).with_context(|| format!("reading {}", a.trace.display()))?;
    let mut rows = Vec::new();
    for f in &trace.frames {
        for q in &f.qubits {
            let (status, remaining, dest) = match q.status {
                QubitStatus::Idle => ("idle", None, None),
                QubitStatus::InFlight { remaining, dest } => {
                    ("flight", Some(remaining), Some(dest))
                }
                QubitStatus::Entangled => ("entangled", None, None),
                QubitStatus::Consumed => ("consumed", None, None),
                QubitStatus::Reset => ("reset", None, None),
            };
            rows.push(FrameRow {
                tick: f.tick,
                id: q.id,
                role: q.role.name().into(),
                col: q.col,
                row: q.row,
                status: status.into(),
                remaining,
                dest_col: dest.map(|d| d.0),
                dest_row: dest.map(|d| d.1),
            });
        }
    }
    run.manifest.seeds = vec![trace.header.seed];
    run.csv("frames.csv", &rows)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    use oqft_core::Error as E;
    match e.chain().find_map(|c| c.downcast_ref::<E>()) {
        Some(E::Validation(_) | E::Config { .. } | E::Domain(_) | E::MissingWidth(_)) => 2,
        Some(E::Deadlock(_) | E::Resource(_)) => 3,
        _ => 1,
    }
}

fn execute(cli: Cli) -> anyhow::Result<bool> {
    let cfg = match &cli.config {
        Some(path) => parse_config(path).map_err(|e| {
            anyhow::Error::new(e).context(format!("loading config {}", path.display()))
        })?,
        None => Config::default(),
    };
    std::fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating output directory {}", cli.out.display()))?;
    let (name, seeds) = match &cli.command {
        Command::Census(_) => ("census", vec![]),
        Command::OracleCheck => ("oracle-check", vec![]),
        Command::Hl(_) => ("hl", vec![]),
        Command::Adder(a) => ("adder", parse_seeds(&a.seeds)?),
        Command::Oqft(_) => ("oqft", vec![]),
        Command::Frames(_) => ("frames", vec![]),
    };
    let mut run = Run {
        cfg: &cfg,
        out: &cli.out,
        manifest: RunManifest::new(name, &cfg, seeds),
    };
    let ok = match &cli.command {
        Command::Census(a) => census(&mut run, a).map(|_| true),
        Command::OracleCheck => oracle_check(&mut run),
        Command::Hl(a) => hl(&mut run, a).map(|_| true),
        Command::Adder(a) => adder(&mut run, a).map(|_| true),
        Command::Oqft(a) => oqft(&mut run, a).map(|_| true),
        Command::Frames(a) => frames(&mut run, a).map(|_| true),
    }?;
    run.finish()?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
