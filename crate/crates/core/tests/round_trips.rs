//! Solver output through the checkpoint format and experiment reports
//! through JSON and CSV.

use cns_core::experiments::data::base_state;
use cns_core::experiments::{self, ExperimentSpec};
use cns_core::solvers::{checkpoint, Horizon};

#[test]
fn solved_trajectory_survives_a_checkpoint() {
    let spec = ExperimentSpec { n: 16, horizon: Horizon::Fixed(0.1), ..Default::default() };
    let g = spec.grid().unwrap();
    let s0 = base_state(&g, spec.p, spec.a_amp, spec.u_amp, spec.seed).unwrap();
    let mut traj = spec.solve(&s0, 0.1).unwrap().traj;
    traj.cache_norms(2.0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.bin");
    checkpoint::save(&traj, spec.to_json(), &path).unwrap();
    let (back, side) = checkpoint::load(&path).unwrap();
    assert_eq!(back.times(), traj.times());
    for slot in ["a", "u"] {
        for i in 0..traj.len() {
            assert_eq!(back.field(slot, i).unwrap().physical(0), traj.field(slot, i).unwrap().physical(0));
        }
    }
    let side = side.expect("sidecar written next to the checkpoint");
    assert_eq!(side.records, traj.len());
    assert_eq!(side.config["n"], 16);
    assert_eq!(back.cached("u", 2.0).unwrap().series, traj.cached("u", 2.0).unwrap().series);
}

#[test]
fn reports_write_json_and_tables() {
    let spec = ExperimentSpec::for_experiment("counterexample").unwrap();
    let report = experiments::run(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = report.write(dir.path()).unwrap();
    assert!(files.len() >= 2);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&files[0]).unwrap()).unwrap();
    assert_eq!(v["criteria"].as_array().unwrap().len(), report.criteria.len());
    for c in v["criteria"].as_array().unwrap() {
        for key in ["label", "relation", "value", "bound", "pass"] {
            assert!(c.get(key).is_some(), "criterion lacks {key}");
        }
    }
    let csv = std::fs::read_to_string(&files[1]).unwrap();
    assert_eq!(csv.lines().count(), report.tables[0].rows.len() + 1);
}

#[test]
fn unknown_experiment_is_rejected() {
    assert!(ExperimentSpec::for_experiment("nope").is_err());
    let spec = ExperimentSpec { name: "nope".into(), ..Default::default() };
    assert!(experiments::run(&spec).is_err());
}
