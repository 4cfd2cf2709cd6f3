use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cns-toolkit")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_names_every_experiment() {
    let o = run(&["list"]);
    assert!(o.status.success());
    let names: Vec<String> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(names, cns_core::experiments::NAMES);
}

#[test]
fn unknown_experiment_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["experiment", "nope", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("valid names"));
}

#[test]
fn bad_horizon_and_exponent_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(run(&["solve", "--T", "soon", "--out", out]).status.code(), Some(2));
    assert_eq!(run(&["experiment", "tail_estimate", "--p", "4", "--out", out]).status.code(), Some(2));
}

#[test]
fn counterexample_passes_and_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["experiment", "counterexample", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json = std::fs::read_to_string(dir.path().join("counterexample.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["name"], "counterexample");
    assert!(v["criteria"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

fn rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn solve_then_norms_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["solve", "--N", "16", "--T", "0.1", "--dt", "0.02", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ckpt = dir.path().join("solution.bin");
    assert!(ckpt.exists());
    let n = rows(&dir.path().join("solution_norms.csv"));
    assert_eq!(n, 6);

    let o = run(&["norms", ckpt.to_str().unwrap(), "--s", "0", "--p", "2", "--slot", "u"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,norm"));
    let vals: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(vals.len(), n);
    assert!(vals.iter().all(|v| v.is_finite() && *v > 0.0));
    // Viscous decay of the velocity.
    assert!(vals[n - 1] < vals[0]);

    let o = run(&["norms", dir.path().join("missing.bin").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
