use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn jmgt(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jmgt"))
        .arg("--quiet")
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn with_overrides<'a>(cmd: &'a str, overrides: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    for o in overrides {
        v.push("--override");
        v.push(o);
    }
    v
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

const SHORT: [&str; 4] = ["grid.points=32", "run.horizon=0.5", "run.dt=0.01", "run.stride=10"];

#[test]
fn zero_data_gives_an_all_zero_time_series() {
    let dir = TempDir::new().unwrap();
    let mut o = SHORT.to_vec();
    o.push("initial.profile=\"zero\"");
    let out = jmgt(dir.path(), &with_overrides("simulate", &o));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 6);
    for row in rows {
        assert!(row[1..].iter().all(|x| x.parse::<f64>().unwrap() == 0.0), "{row:?}");
    }
    let summary = json(&dir.path().join("summary.json"));
    assert_eq!(summary["decay_rate"], Value::Null);
}

#[test]
fn identical_config_and_seed_give_identical_bytes() {
    let run = |seed: &str| {
        let dir = TempDir::new().unwrap();
        let mut args = with_overrides("simulate", &SHORT);
        args.extend(["--override", "initial.profile=\"random\"", "--override", "run.nonlinear=true", "--seed", seed]);
        let out = jmgt(dir.path(), &args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        fs::read(dir.path().join("timeseries.csv")).unwrap()
    };
    let a = run("5");
    assert_eq!(a, run("5"));
    assert_ne!(a, run("6"));
}

#[test]
fn every_artifact_carries_version_and_hash() {
    let dir = TempDir::new().unwrap();
    let out = jmgt(dir.path(), &with_overrides("simulate", &SHORT));
    assert!(out.status.success());
    let summary = json(&dir.path().join("summary.json"));
    let hash = summary["config_hash"].as_str().unwrap();
    assert_eq!(hash.len(), 16);
    assert_eq!(summary["version"], env!("CARGO_PKG_VERSION"));
    let csv = fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
    let first = csv.lines().next().unwrap();
    assert!(first.starts_with('#') && first.contains(hash) && first.contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn config_errors_exit_with_two_and_name_the_field() {
    let dir = TempDir::new().unwrap();
    for (o, field) in [
        ("params.tau=-1", "params.tau"),
        ("grid.points=12", "grid.points"),
        ("run.bogus=1", "bogus"),
        ("history.mode=\"closure\"", "history.mode"),
    ] {
        let out = jmgt(dir.path(), &with_overrides("simulate", &[o]));
        assert_eq!(out.status.code(), Some(2), "{o}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(field), "{o}: {err}");
    }

    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[kernel]\nkind = \"exponential\"\nmass = 0.2\n").unwrap();
    let out = jmgt(dir.path(), &["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = jmgt(&blocker.join("sub"), &with_overrides("simulate", &SHORT));
    assert_eq!(out.status.code(), Some(3));
    let out = jmgt(dir.path(), &["simulate", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn blow_up_is_a_successful_run_with_verdict_growth() {
    let dir = TempDir::new().unwrap();
    let o = [
        "grid.points=64",
        "params.b=0.5",
        "kernel.kind=\"memoryless\"",
        "history.mode=\"closure\"",
        "run.horizon=20",
        "run.dt=0.002",
    ];
    let out = jmgt(dir.path(), &with_overrides("simulate", &o));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&dir.path().join("summary.json"));
    assert_eq!(summary["regime"], "supercritical");
    assert_eq!(summary["verdict"], "growth");
}

#[test]
fn reference_verification_passes() {
    let dir = TempDir::new().unwrap();
    let o = ["run.horizon=4", "run.stride=25", "run.dt=0.002", "run.p=1", "verify.samples=100"];
    let out = jmgt(dir.path(), &with_overrides("verify", &o));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("verification.json"));
    let checks = report["checks"].as_array().unwrap();
    let failed: Vec<_> = checks.iter().filter(|c| c["pass"] != true).map(|c| &c["check"]).collect();
    assert!(failed.is_empty(), "{failed:?}");
    assert_eq!(checks.iter().filter(|c| c["check"].as_str().unwrap().starts_with("dissipation")).count(), 8);
    assert_eq!(report["pass"], true);
    assert!(report["constants"]["c1"].as_f64().unwrap() > 0.0);
}

#[test]
fn scan_rates_follow_the_regime() {
    let dir = TempDir::new().unwrap();
    let o = ["grid.points=64", "scan.horizon=8", "scan.masses=[0.0, 0.2]", "run.dt=0.002", "run.stride=50"];
    let out = jmgt(dir.path(), &with_overrides("scan", &o));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 6);
    for r in &rows {
        let ratio: f64 = r[0].parse().unwrap();
        let mass: f64 = r[1].parse().unwrap();
        let rate: f64 = r[4].parse().unwrap();
        let nonincreasing = r[6] == "true";
        if ratio > 1.0 {
            assert!(rate > 0.0 && nonincreasing, "{r:?}");
        } else if ratio < 1.0 {
            assert!(rate < 0.0 && !nonincreasing, "{r:?}");
        } else if mass == 0.0 {
            assert!(rate.abs() < 1e-10 && nonincreasing, "{r:?}");
        }
    }
}

#[test]
fn checkpoint_restarts_and_rejects_a_different_grid() {
    let dir = TempDir::new().unwrap();
    let mut o = SHORT.to_vec();
    o.push("run.checkpoint=true");
    assert!(jmgt(dir.path(), &with_overrides("simulate", &o)).status.success());
    let ckpt = dir.path().join("final.ckpt");
    let file = format!("initial.file={:?}", ckpt.to_str().unwrap());
    let mut o = SHORT.to_vec();
    o.extend(["initial.profile=\"file\"", &file]);
    let out = jmgt(&dir.path().join("restart"), &with_overrides("simulate", &o));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    o[0] = "grid.points=64";
    let out = jmgt(&dir.path().join("bad"), &with_overrides("simulate", &o));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn auxiliary_reports_are_written() {
    let dir = TempDir::new().unwrap();
    let o = ["grid.points=32", "resolvent.samples=10"];
    for cmd in ["picard", "resolvent", "convergence"] {
        let out = jmgt(dir.path(), &with_overrides(cmd, &o));
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let picard = json(&dir.path().join("picard.json"));
    assert_eq!(picard["result"]["converged"], true);
    assert!(picard["direct_difference"].as_f64().unwrap() < 1e-8);
    let resolvent = json(&dir.path().join("resolvent.json"));
    assert!(resolvent["worst_residual"].as_f64().unwrap() < 1e-10);
    let dt = fs::read_to_string(dir.path().join("convergence_dt.csv")).unwrap();
    let orders: Vec<f64> = data_rows(&dt).iter().skip(1).map(|r| r[3].parse().unwrap()).collect();
    assert!(orders.iter().all(|q| (q - 4.0).abs() < 0.3), "{orders:?}");
    assert_eq!(data_rows(&fs::read_to_string(dir.path().join("convergence_n.csv")).unwrap()).len(), 4);
}
