use std::path::Path;
use std::process::{Command, Output};

fn oqft(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oqft"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn adder_campaign_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = oqft(
        dir.path(),
        &[
            "adder",
            "--variant",
            "gidney",
            "--width",
            "32",
            "--seeds",
            "20",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(dir.path().join("stats.csv"));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("variant,w,controlled,zone_width,seed_count"));
    assert!(lines[1].starts_with("gidney,32,false,32,20,"));
    let manifest = read(dir.path().join("adder.manifest.json"));
    assert!(manifest.contains("stats.csv") && manifest.contains("\"seeds\""));
}

#[test]
fn single_macro_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = oqft(dir.path(), &["oqft", "--n", "256", "--hz", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(dir.path().join("macro.csv"));
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("oqft,256,4,"));
    assert!(read(dir.path().join("oqft.manifest.json")).contains("bundled"));
}

#[test]
fn macro_sweep_has_baselines() {
    let dir = tempfile::tempdir().unwrap();
    assert!(oqft(dir.path(), &["oqft", "--n", "256..512"])
        .status
        .success());
    let csv = read(dir.path().join("macro.csv"));
    assert_eq!(
        csv.lines().filter(|l| l.starts_with("baseline,")).count(),
        2
    );
    // 256 admits hz 1, 2, 4; 512 adds hz 8.
    assert_eq!(csv.lines().filter(|l| l.starts_with("oqft,")).count(), 7);
}

#[test]
fn census_of_one_qubit_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    assert!(oqft(dir.path(), &["census", "--n", "1"]).status.success());
    assert_eq!(read(dir.path().join("spectra.csv")), "variant,n,k,count\n");
}

#[test]
fn census_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert!(oqft(dir.path(), &["census", "--n", "256"]).status.success());
    let t = read(dir.path().join("tcounts.csv"));
    for v in ["textbook", "truncated", "pg_qft", "oqft", "pg_oqft"] {
        assert!(
            t.lines().any(|l| l.starts_with(&format!("{v},256,"))),
            "{v}"
        );
    }
    let s = read(dir.path().join("spectra.csv"));
    let truncated: u64 = s
        .lines()
        .filter(|l| l.starts_with("truncated,256,"))
        .map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(truncated, 7440);
}

#[test]
fn oracle_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = oqft(dir.path(), &["oracle-check"]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().all(|l| l.starts_with("PASS")));
    assert!(read(dir.path().join("oracle.csv"))
        .lines()
        .skip(1)
        .all(|l| l.ends_with(",true")));
}

#[test]
fn hl_sweep_columns() {
    let dir = tempfile::tempdir().unwrap();
    assert!(oqft(dir.path(), &["hl", "--n", "8..64"]).status.success());
    let csv = read(dir.path().join("hl.csv"));
    assert!(csv.starts_with("family,n,factories_opt,footprint,time_s,volume\n"));
    assert_eq!(csv.lines().count(), 1 + 4 * 4);
}

#[test]
fn traces_convert_to_frames() {
    let dir = tempfile::tempdir().unwrap();
    let o = oqft(
        dir.path(),
        &[
            "adder",
            "--variant",
            "cuccaro",
            "--width",
            "4",
            "--seeds",
            "2",
            "--trace",
        ],
    );
    assert!(o.status.success());
    let trace = dir.path().join("traces/cuccaro_w4_plain_s1.trace");
    assert!(read(&trace).starts_with("# oqft-trace v1 variant=cuccaro w=4"));
    let o = oqft(dir.path(), &["frames", "--trace", trace.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let frames = read(dir.path().join("frames.csv"));
    assert!(frames.starts_with("tick,id,role,col,row,status,remaining,dest_col,dest_row\n"));
    assert!(frames.lines().any(|l| l.contains(",flight,")));
}

#[test]
fn identical_runs_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = oqft(
            d.path(),
            &[
                "adder",
                "--variant",
                "both",
                "--width",
                "3,9",
                "--controlled",
                "--seeds",
                "4",
                "--trace",
            ],
        );
        assert!(o.status.success());
    }
    assert_eq!(
        read(a.path().join("stats.csv")),
        read(b.path().join("stats.csv"))
    );
    let trace = "traces/gidney_w9_ctrl_s3.trace";
    assert_eq!(read(a.path().join(trace)), read(b.path().join(trace)));
}

#[test]
fn config_overrides_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.cfg");
    std::fs::write(&cfg, "# tighter\ndof_cap = 8\n").unwrap();
    let out = dir.path().join("o");
    let cfg_arg = cfg.to_str().unwrap();
    let o = oqft(
        &out,
        &[
            "--config",
            cfg_arg,
            "adder",
            "--variant",
            "cuccaro",
            "--width",
            "16",
            "--seeds",
            "2",
        ],
    );
    assert!(o.status.success());
    let csv = read(out.join("stats.csv"));
    let stalled: f64 = csv
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(20)
        .unwrap()
        .parse()
        .unwrap();
    assert!(stalled > 0.0);

    std::fs::write(&cfg, "d = 4\n").unwrap();
    assert_eq!(
        oqft(&out, &["--config", cfg_arg, "hl"]).status.code(),
        Some(2)
    );
    std::fs::write(&cfg, "d = 15\nwarp = 9\n").unwrap();
    let o = oqft(&out, &["--config", cfg_arg, "hl"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(oqft(dir.path(), &["transmogrify"]).status.code(), Some(1));
    assert_eq!(oqft(dir.path(), &[]).status.code(), Some(1));
    assert_eq!(
        oqft(dir.path(), &["adder", "--width", "40", "--seeds", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        oqft(dir.path(), &["oqft", "--n", "256", "--hz", "8"])
            .status
            .code(),
        Some(2)
    );
    let cfg = dir.path().join("cap.cfg");
    std::fs::write(&cfg, "dof_cap = 1\n").unwrap();
    let o = oqft(
        dir.path(),
        &[
            "--config",
            cfg.to_str().unwrap(),
            "adder",
            "--width",
            "4",
            "--seeds",
            "2",
        ],
    );
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(
        oqft(dir.path(), &["frames", "--trace", "/nonexistent"])
            .status
            .code(),
        Some(1)
    );
}
