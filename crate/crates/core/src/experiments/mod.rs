//! Scripted numerical experiments. Each one solves a family of problems,
//! measures norms and ratios, and returns a [`Report`] with pass/fail
//! criteria.

pub mod bona_smith;
pub mod continuity;
pub mod counterexample;
pub mod data;
pub mod lagrangian_diff;
pub mod lowfreq;
pub mod report;
pub mod tail;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::solvers::cns::auto_horizon;
use crate::solvers::{cns_solve, CnsSolution, CnsState, Horizon, PressureLaw, SolverConfig, Viscosity};

pub use report::{Criterion, Report, Table};

/// Names accepted by [`run`].
pub const NAMES: [&str; 6] =
    ["tail_estimate", "lagrangian_difference", "lowfreq_difference", "continuity_sweep", "bona_smith", "counterexample"];

/// Parameters shared by all experiments; each experiment reads the fields
/// it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub name: String,
    pub dim: usize,
    pub p: f64,
    /// Grid points per dimension.
    pub n: usize,
    pub dt: f64,
    pub horizon: Horizon,
    /// Perturbation sizes.
    pub epsilons: Vec<f64>,
    /// Family size where a family is indexed by an integer.
    pub members: usize,
    pub seed: u64,
    pub delta0: f64,
    /// `‖a0‖_{Ḃ^{d/p}_{p,1}}` of the base datum.
    pub a_amp: f64,
    /// `‖u0‖_{Ḃ^{−1+d/p}_{p,1}}` of the base datum.
    pub u_amp: f64,
    pub viscosity: Viscosity,
    pub pressure: PressureLaw,
    pub smallness: f64,
    pub margin: f64,
    /// Frequency levels: low-frequency cutoffs or mollification levels.
    pub levels: Vec<i32>,
    /// Relative tolerance of the experiment's main check.
    pub tolerance: f64,
    /// Counterexample step location in `|û|²`.
    pub threshold: f64,
    /// Counterexample phase rate above the threshold.
    pub phase: f64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            name: String::new(),
            dim: 2,
            p: 2.0,
            n: 32,
            dt: 0.01,
            horizon: Horizon::Auto { t_max: 0.5 },
            epsilons: vec![1e-1, 1e-2, 1e-3, 1e-4],
            members: 10,
            seed: 20240611,
            delta0: 0.5,
            a_amp: 0.02,
            u_amp: 0.1,
            viscosity: Viscosity::default(),
            pressure: PressureLaw::default(),
            smallness: 0.05,
            margin: 0.5,
            levels: Vec::new(),
            tolerance: 1e-3,
            threshold: 1.0,
            phase: std::f64::consts::PI,
        }
    }
}

impl ExperimentSpec {
    /// Defaults tuned for each named experiment.
    pub fn for_experiment(name: &str) -> Result<Self> {
        let base = ExperimentSpec { name: name.into(), ..Default::default() };
        Ok(match name {
            "tail_estimate" => ExperimentSpec { n: 64, delta0: 0.9, tolerance: 0.1, ..base },
            "lagrangian_difference" => ExperimentSpec { epsilons: vec![1e-2, 1e-3, 1e-4], tolerance: 0.3, ..base },
            "lowfreq_difference" => {
                ExperimentSpec { n: 128, levels: vec![2, 4, 6], epsilons: vec![1e-2, 1e-3, 1e-4], tolerance: 0.2, ..base }
            }
            "continuity_sweep" => base,
            "bona_smith" => ExperimentSpec {
                dim: 3,
                n: 32,
                dt: 0.01,
                horizon: Horizon::Fixed(0.2),
                levels: vec![2, 3, 4],
                epsilons: vec![1e-2],
                tolerance: 0.2,
                ..base
            },
            "counterexample" => ExperimentSpec { epsilons: vec![1e-2, 1e-3, 1e-4], n: 16, dim: 1, ..base },
            _ => return Err(Error::Data(format!("unknown experiment {name}; valid names: {}", NAMES.join(", ")))),
        })
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim, self.n)
    }

    pub fn solver(&self, horizon: f64) -> SolverConfig {
        SolverConfig {
            dt: self.dt.min(horizon),
            horizon: Horizon::Fixed(horizon),
            viscosity: self.viscosity,
            pressure: self.pressure,
            smallness: self.smallness,
            margin: self.margin,
            p: self.p,
            ..SolverConfig::default()
        }
    }

    /// One horizon for the whole family, fixed by the base datum.
    pub fn resolve_horizon(&self, base: &CnsState) -> Result<f64> {
        match self.horizon {
            Horizon::Fixed(t) => Ok(t),
            Horizon::Auto { t_max } => auto_horizon(&base.u, self.viscosity.mu, self.smallness, self.p, t_max),
        }
    }

    pub fn solve(&self, s: &CnsState, horizon: f64) -> Result<CnsSolution> {
        cns_solve(s, &self.solver(horizon))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }
}

/// Runs a named experiment and stamps its runtime.
pub fn run(spec: &ExperimentSpec) -> Result<Report> {
    let start = Instant::now();
    let mut report = match spec.name.as_str() {
        "tail_estimate" => tail::run_tail_estimate(spec)?,
        "lagrangian_difference" => lagrangian_diff::run_lagrangian_difference(spec)?,
        "lowfreq_difference" => lowfreq::run_lowfreq_difference(spec)?,
        "continuity_sweep" => continuity::run_continuity_sweep(spec)?,
        "bona_smith" => bona_smith::run_bona_smith(spec)?,
        "counterexample" => counterexample::run_counterexample(spec)?,
        other => return Err(Error::Data(format!("unknown experiment {other}; valid names: {}", NAMES.join(", ")))),
    };
    report.runtime_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// `max/min` of positive values, or infinity if any is not positive.
pub(crate) fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(0.0, f64::max);
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_has_defaults() {
        for n in NAMES {
            let s = ExperimentSpec::for_experiment(n).unwrap();
            assert_eq!(s.name, n);
            let back: ExperimentSpec = serde_json::from_value(s.to_json()).unwrap();
            assert_eq!(back, s);
        }
        assert!(matches!(ExperimentSpec::for_experiment("nope"), Err(Error::Data(_))));
        let partial: ExperimentSpec = serde_json::from_str(r#"{"name":"continuity_sweep","p":3}"#).unwrap();
        assert_eq!(partial.p, 3.0);
        assert_eq!(partial.n, 32);
    }

    #[test]
    fn spread_of_ratios() {
        assert_eq!(spread(&[1.0, 2.0, 1.5]), 2.0);
        assert!(spread(&[0.0, 1.0]).is_infinite());
    }
}
