//! A Fourier-side ODE whose phase rate jumps across a modulus threshold:
//! `∂_t û = i V(|û|²) û`, solved in closed form by
//! `û(t) = e^{i t V(|û(0)|²)} û(0)`. Data straddling the threshold stay
//! close while the solutions separate by almost 2.

use num_complex::Complex64;
use rand::Rng;

use super::report::{Criterion, Report, Table};
use super::ExperimentSpec;
use crate::error::{Error, Result};
use crate::random::rng;

/// Step potential: `0` below `threshold`, `phase` at or above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPotential {
    pub threshold: f64,
    pub phase: f64,
}

impl StepPotential {
    pub fn eval(&self, s: f64) -> f64 {
        if s >= self.threshold {
            self.phase
        } else {
            0.0
        }
    }

    /// Closed-form solution at time `t`.
    pub fn evolve(&self, data: &[Complex64], t: f64) -> Vec<Complex64> {
        data.iter().map(|&c| Complex64::from_polar(1.0, t * self.eval(c.norm_sqr())) * c).collect()
    }
}

/// Normalized `ℓ²` distance of coefficient vectors.
pub fn distance(x: &[Complex64], y: &[Complex64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

/// `sup_{t ∈ times} ‖S(t)x − S(t)y‖`.
pub fn solution_distance(v: &StepPotential, x: &[Complex64], y: &[Complex64], times: &[f64]) -> f64 {
    times.iter().map(|&t| distance(&v.evolve(x, t), &v.evolve(y, t))).fold(0.0, f64::max)
}

fn single_mode(len: usize, amp: f64) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); len];
    v[1] = Complex64::new(amp, 0.0);
    v
}

pub fn run_counterexample(spec: &ExperimentSpec) -> Result<Report> {
    if !(spec.threshold > 0.0) || spec.n < 2 {
        return Err(Error::Domain("counterexample needs a positive threshold and at least two modes".into()));
    }
    let v = StepPotential { threshold: spec.threshold, phase: spec.phase };
    let times: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let top = spec.threshold.sqrt();
    let mut report = Report::new("counterexample", spec.to_json());
    let mut table = Table::new("gap", &["eps", "data_distance", "solution_distance", "lipschitz_branch_distance"]);
    let gap = (2.0 * (1.0 - spec.phase.cos())).sqrt();
    for &eps in &spec.epsilons {
        let x = single_mode(spec.n, top);
        let y = single_mode(spec.n, top - eps);
        let dd = distance(&x, &y);
        let sd = solution_distance(&v, &x, &y, &times);
        // Both data below the threshold: the map is an isometry there.
        let xl = single_mode(spec.n, 0.5 * top);
        let yl = single_mode(spec.n, 0.5 * top - eps);
        let ld = solution_distance(&v, &xl, &yl, &times);
        table.push(vec![eps, dd, sd, ld]);
        let tag = format!("{eps:e}");
        report.check(Criterion::at_most(
            &format!("data_distance_{tag}"),
            "|data distance − ε| ≤ 1e-14",
            (dd - eps).abs(),
            1e-14,
        ));
        // The closed-form gap at t = 1 is |e^{iφ}·√c − (√c − ε)|, which is
        // 2 − ε for c = 1, φ = π. A few ulps of slack absorb the rounding of
        // 1 − ε and of e^{iπ}.
        let bound = gap * top - eps;
        let mut c = Criterion::at_least(&format!("solution_gap_{tag}"), "sup_t ‖S(t)x − S(t)y‖ ≥ 2 − ε", sd, bound);
        c.pass = sd >= bound - 8.0 * f64::EPSILON * top;
        report.check(c);
        report.check(Criterion::at_most(
            &format!("lipschitz_branch_{tag}"),
            "below the threshold the distance stays ε",
            (ld - eps).abs(),
            1e-14,
        ));
        report.check(Criterion::at_most(
            &format!("initial_time_{tag}"),
            "distance at t = 0 equals the data distance",
            (distance(&v.evolve(&x, 0.0), &v.evolve(&y, 0.0)) - dd).abs(),
            0.0,
        ));
    }
    let mut r = rng(spec.seed);
    let data: Vec<Complex64> =
        (0..spec.n.max(64)).map(|_| Complex64::new(r.random_range(-1.2..1.2), r.random_range(-1.2..1.2))).collect();
    let drift = times
        .iter()
        .flat_map(|&t| v.evolve(&data, t).into_iter().zip(&data).map(|(a, b)| (a.norm() - b.norm()).abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    report.check(Criterion::at_most("modulus_conservation", "max ||û(t)| − |û(0)|| ≤ 1e-12", drift, 1e-12));
    report.tables.push(table);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_gap() {
        let v = StepPotential { threshold: 1.0, phase: std::f64::consts::PI };
        let x = single_mode(4, 1.0);
        let y = single_mode(4, 0.99);
        let d = distance(&v.evolve(&x, 1.0), &v.evolve(&y, 1.0));
        assert!((d - 1.99).abs() < 1e-14);
        assert_eq!(v.evolve(&x, 0.0), x);
    }

    #[test]
    fn default_run_passes() {
        let spec = ExperimentSpec::for_experiment("counterexample").unwrap();
        let r = run_counterexample(&spec).unwrap();
        assert!(r.passed(), "{}", r.summary());
    }
}
