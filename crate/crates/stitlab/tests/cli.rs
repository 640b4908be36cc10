use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use stitlab::export::TessDocument;
use stitlab::suite::SuiteReport;

fn stitlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stitlab")).args(args).env_remove("STITLAB_THREADS").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SIMULATE: &str = r#"
master_seed = 3

[simulate]
measure = { kind = "isotropic" }
window = { lo = [0.0, 0.0], hi = [4.0, 4.0] }
t = 2.0
"#;

#[test]
fn golden_p1j_value_on_stdout() {
    let o = stitlab(&["analytic", "p1j", "--d", "3", "--j", "1", "--n", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# stitlab analytic p1j d=3 j=1"));
    assert_eq!(lines.next(), Some("n,p,error"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "0");
    let p: f64 = row[1].parse().unwrap();
    let golden = 5.0 + 18.0 * 2f64.ln() - 63.0 / 4.0 * 3f64.ln();
    assert!((p - golden).abs() < 1e-9, "{p} vs {golden}");
    assert!(text.contains("0.17350570"));
}

#[test]
fn p1j_ranges_and_means() {
    let o = stitlab(&["analytic", "p1j", "--d", "2", "--j", "0", "--n", "0..=4"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 2 + 5);
    let o = stitlab(&["analytic", "mean", "--d", "3", "--j", "0"]);
    let text = stdout(&o);
    let row: Vec<f64> = text.lines().nth(2).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[0], 2.0);
    assert!((row[1] - 2.0).abs() < 1e-8);
    let o = stitlab(&["analytic", "mean", "--d", "2", "--j", "1"]);
    assert!(stdout(&o).lines().nth(2).unwrap().starts_with("inf,"));
    let o = stitlab(&["analytic", "p1j", "--d", "2", "--j", "0", "--n", "4..2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn palm_csv_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let digest = |threads: &str| {
        let out = dir.path().join(format!("palm-{threads}.csv"));
        let o = stitlab(&[
            "--threads", threads, "palm", "--d", "3", "--j", "0", "--t", "1", "--samples", "1000000", "--seed", "42", "--output",
            path(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let bytes = std::fs::read(&out).unwrap();
        assert_eq!(bytes.iter().filter(|&&b| b == b'\n').count(), 1_000_002);
        Sha256::digest(&bytes)
    };
    assert_eq!(digest("1"), digest("4"));
}

#[test]
fn simulate_then_export_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.toml");
    std::fs::write(&cfg, SIMULATE).unwrap();
    let json = dir.path().join("state.json");
    let o = stitlab(&["simulate", "--config", path(&cfg), "--output", path(&json)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: TessDocument = serde_json::from_slice(&std::fs::read(&json).unwrap()).unwrap();
    assert_eq!(doc.format, "stit-tess/1");
    assert_eq!(doc.cells.len(), doc.maximal_faces.len() + 1);
    let area: f64 = doc
        .cells
        .iter()
        .map(|c| {
            let v = &c.vertices;
            (0..v.len()).map(|i| v[i][0] * v[(i + 1) % v.len()][1] - v[(i + 1) % v.len()][0] * v[i][1]).sum::<f64>() / 2.0
        })
        .sum();
    assert!((area - 16.0).abs() < 1e-9);

    // same seed, same document
    let again = dir.path().join("again.json");
    stitlab(&["simulate", "--config", path(&cfg), "--output", path(&again)]);
    assert_eq!(std::fs::read(&json).unwrap(), std::fs::read(&again).unwrap());

    let svg = dir.path().join("state.svg");
    let o = stitlab(&["export-svg", "--input", path(&json), "--output", path(&svg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert_eq!(text.matches("<polyline").count(), doc.maximal_faces.len());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, SIMULATE.replace("hi = [4.0, 4.0]", "hi = [4.0, -1.0]")).unwrap();
    let o = stitlab(&["simulate", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("simulate.window.hi[1]"), "{}", stderr(&o));

    std::fs::write(&cfg, SIMULATE.replace("t = 2.0", "t = 2.0\nspeed = 1")).unwrap();
    assert_eq!(stitlab(&["simulate", "--config", path(&cfg)]).status.code(), Some(1));

    let missing = dir.path().join("missing.toml");
    assert_eq!(stitlab(&["simulate", "--config", path(&missing)]).status.code(), Some(2));
    assert_eq!(stitlab(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(stitlab(&["--help"]).status.code(), Some(0));
    assert_eq!(stitlab(&["--threads", "0", "analytic", "mean", "--d", "3", "--j", "0"]).status.code(), Some(1));
}

#[test]
fn mecke_writes_both_sides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mecke.toml");
    std::fs::write(
        &cfg,
        r#"
master_seed = 5

[mecke]
measure = { kind = "axis-parallel" }
window = { lo = [0.0, 0.0], hi = [6.0, 6.0] }
localization = { lo = [1.0, 1.0], hi = [5.0, 5.0] }
horizon = 1.0
functional = { kind = "simple", phi = "one", psi = "saturating" }
replications = 40
grid_intervals = 10
"#,
    )
    .unwrap();
    let out = dir.path().join("mecke.json");
    let o = stitlab(&["mecke", "--config", path(&cfg), "--output", path(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["format"], "stitlab-mecke/1");
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn verify_writes_reports_and_signals_failures() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("acc.toml");
    std::fs::write(&cfg, "master_seed = 1\n[acceptance]\ncriteria = [1, 2]\n").unwrap();
    let o = stitlab(&["verify", "--config", path(&cfg), "--out-dir", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let lines: Vec<String> = stdout(&o).lines().filter(|l| l.contains(" [")).map(str::to_owned).collect();
    assert!(lines[0].starts_with("PASS [1]") && lines[1].starts_with("PASS [2]"), "{lines:?}");
    let report: SuiteReport = serde_json::from_slice(&std::fs::read(dir.path().join("acceptance_report.json")).unwrap()).unwrap();
    assert!(report.passed);
    assert_eq!(report.criteria.len(), 2);
    let md = std::fs::read_to_string(dir.path().join("acceptance_report.md")).unwrap();
    assert!(md.contains("| 1 | golden constants | PASS"));

    // a desk-scale count-law check that is known to fail at this size
    std::fs::write(&cfg, "master_seed = 1\n[acceptance]\ncriteria = [4]\nwindow_segments = 500\n").unwrap();
    let o = stitlab(&["verify", "--config", path(&cfg), "--out-dir", path(dir.path())]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL [4]"));

    std::fs::write(&cfg, "[acceptance]\ncriteria = [10]\n").unwrap();
    let o = stitlab(&["verify", "--config", path(&cfg), "--out-dir", path(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("acceptance.criteria[0]"), "{}", stderr(&o));
}
