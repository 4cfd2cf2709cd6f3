//! Continuity through mollified data: growth of smoother norms of the
//! mollified solutions, the two difference ratios, and the three-term
//! budget that assembles them.

use super::data::{difference, mollify, perturbation, perturbed, random_state, Perturbation};
use super::report::{Criterion, Report, Table};
use super::ExperimentSpec;
use crate::besov::{besov_norm, block_norms, BesovIndex, Cutoff, TimeNormSpec};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::random::Ensemble;
use crate::solvers::cns::{data_norm, zp_norm};
use crate::solvers::{CnsState, Trajectory};

/// Box radius of the datum with a genuine high-frequency tail.
const TAIL_BOX: i32 = 10;
/// Box radius of the band datum used for the refinement checks.
const BAND_BOX: i32 = 5;
/// Halvings allowed when searching for the perturbation size.
const MAX_HALVINGS: usize = 12;

/// `‖a‖_{L̃∞Ḃ^{d/p+1}} + ‖u‖_{L̃∞Ḃ^{d/p}} + ‖u‖_{L̃¹Ḃ^{d/p+2}}`.
fn smooth_norm(traj: &Trajectory, p: f64) -> Result<f64> {
    let d = traj.grid().dim() as f64;
    let t = traj.horizon();
    let sup = TimeNormSpec::new(f64::INFINITY, t, true)?;
    let l1 = TimeNormSpec::new(1.0, t, true)?;
    Ok(traj.spacetime_norm("a", BesovIndex::new(d / p + 1.0, p, 1.0)?, sup, None, Cutoff::None)?
        + traj.spacetime_norm("u", BesovIndex::new(d / p, p, 1.0)?, sup, None, Cutoff::None)?
        + traj.spacetime_norm("u", BesovIndex::new(d / p + 2.0, p, 1.0)?, l1, None, Cutoff::None)?)
}

/// `‖a‖_{Ḃ^{d/p−1}} + ‖u‖_{Ḃ^{d/p−2}}`, the data norm one derivative lower.
fn lower_data_norm(s: &CnsState, p: f64) -> Result<f64> {
    let d = s.a.grid().dim() as f64;
    Ok(besov_norm(&block_norms(&s.a, p)?, BesovIndex::new(d / p - 1.0, p, 1.0)?, None, Cutoff::None)?
        + besov_norm(&block_norms(&s.u, p)?, BesovIndex::new(d / p - 2.0, p, 1.0)?, None, Cutoff::None)?)
}

fn zp_distance(x: &Trajectory, y: &Trajectory, p: f64) -> Result<f64> {
    zp_norm(&x.difference(y)?, p, None, Cutoff::None)
}

/// Two difference ratios on one grid: between mollifications at adjacent
/// levels, and between the datum and its coarsest mollification measured in
/// the lower norm.
fn difference_ratios(spec: &ExperimentSpec, g: &Grid, horizon: f64, lo: i32, hi: i32) -> Result<(f64, f64)> {
    let d = random_state(g, Ensemble::new(1.0, BAND_BOX), spec.p, spec.a_amp, spec.u_amp, spec.seed)?;
    let (d_lo, d_hi) = (mollify(&d, lo)?, mollify(&d, hi)?);
    let s = spec.solve(&d, horizon)?;
    let s_lo = spec.solve(&d_lo, horizon)?;
    let s_hi = spec.solve(&d_hi, horizon)?;
    let b = zp_distance(&s_hi.traj, &s_lo.traj, spec.p)? / data_norm(&difference(&d_hi, &d_lo)?, spec.p)?;
    let tail = difference(&d.dealiased()?, &d_lo)?;
    let c = zp_distance(&s.traj, &s_lo.traj, spec.p)? / lower_data_norm(&tail, spec.p)?;
    Ok((b, c))
}

pub fn run_bona_smith(spec: &ExperimentSpec) -> Result<Report> {
    let dim = spec.dim as f64;
    if spec.dim < 3 || !(spec.p >= 1.0 && spec.p < dim) {
        return Err(Error::Precondition(format!("mollification argument needs d ≥ 3 and 1 ≤ p < d, got d = {}, p = {}", spec.dim, spec.p)));
    }
    if spec.levels.len() < 2 {
        return Err(Error::Data("bona_smith needs at least two mollification levels".into()));
    }
    let g = spec.grid()?;
    let datum = random_state(&g, Ensemble::new(1.0, TAIL_BOX), spec.p, spec.a_amp, spec.u_amp, spec.seed)?.dealiased()?;
    let horizon = spec.resolve_horizon(&datum)?;
    let mut report = Report::new("bona_smith", spec.to_json());
    report.metric("horizon", horizon);
    let x = data_norm(&datum, spec.p)?;
    let exact = spec.solve(&datum, horizon)?;

    // Persistence: smoother norms of the mollified solutions grow like 2^N.
    let mut table = Table::new("levels", &["level", "persistence", "tail_data", "t1", "t2", "t3"]);
    let mut moll = Vec::new();
    for &n in &spec.levels {
        let dn = mollify(&datum, n)?;
        let sn = spec.solve(&dn, horizon)?;
        let r = smooth_norm(&sn.traj, spec.p)? / (2f64.powi(n) * x);
        moll.push((n, dn, sn, r));
    }
    let c = moll[0].3;
    report.metric("persistence_c", c);
    for (n, _, _, r) in &moll[1..] {
        report.check(Criterion::at_most(
            &format!("persistence_{n}"),
            "smooth norm of the level-N solution / (2^N ‖data‖_{𝕏_p}) ≤ (1 + tol) C",
            *r,
            (1.0 + spec.tolerance) * c,
        ));
    }

    // Difference ratios on two grids.
    let (lo, hi) = (spec.levels[0], spec.levels[1]);
    let coarse = g.with_points(spec.n / 2)?;
    let (b_fine, c_fine) = difference_ratios(spec, &g, horizon, lo, hi)?;
    let (b_coarse, c_coarse) = difference_ratios(spec, &coarse, horizon, lo, hi)?;
    for (label, f, cr) in [("adjacent_levels", b_fine, b_coarse), ("lower_norm", c_fine, c_coarse)] {
        report.metric(&format!("{label}_ratio"), f);
        report.check(Criterion::flag(&format!("{label}_finite"), "ratio finite and positive", f.is_finite() && f > 0.0));
        report.check(Criterion::at_most(
            &format!("{label}_refinement"),
            "|ratio(N) / ratio(N/2) − 1| ≤ tol",
            (f / cr - 1.0).abs(),
            spec.tolerance,
        ));
    }

    // Budget: ε is the first entry of `epsilons` times ‖S(d)‖_{Z_p}; the level is the
    // smallest one meeting the two tail shares, then the perturbation is
    // halved until the middle term fits.
    let rel = spec.epsilons.first().copied().ok_or_else(|| Error::Data("bona_smith needs a relative budget".into()))?;
    let eps = rel * zp_norm(&exact.traj, spec.p, None, Cutoff::None)?;
    report.metric("budget_eps", eps);
    let dir = perturbation(&g, Perturbation::Random { box_radius: TAIL_BOX }, spec.p, spec.seed.wrapping_add(5))?;
    let mut chosen = None;
    for (n, dn, sn, r) in &moll {
        let t1 = zp_distance(&exact.traj, &sn.traj, spec.p)?;
        let tail_data = data_norm(&difference(&datum, dn)?, spec.p)?;
        if chosen.is_some() || t1 > eps / 8.0 {
            table.push(vec![*n as f64, *r, tail_data, t1, f64::NAN, f64::NAN]);
            continue;
        }
        let mut eta = eps;
        let mut found = None;
        for _ in 0..=MAX_HALVINGS {
            let other = perturbed(&datum, &dir, eta)?.dealiased()?;
            let other_moll = mollify(&other, *n)?;
            let so = spec.solve(&other, horizon)?;
            let som = spec.solve(&other_moll, horizon)?;
            let t2 = zp_distance(&sn.traj, &som.traj, spec.p)?;
            let t3 = zp_distance(&so.traj, &som.traj, spec.p)?;
            if t2 <= eps / 2.0 {
                found = Some((eta, t2, t3, zp_distance(&exact.traj, &so.traj, spec.p)?));
                break;
            }
            eta *= 0.5;
        }
        let (eta, t2, t3, total) = found.ok_or_else(|| Error::Convergence("no perturbation size meets the middle share".into()))?;
        table.push(vec![*n as f64, *r, tail_data, t1, t2, t3]);
        if t3 <= 3.0 * eps / 8.0 {
            chosen = Some((*n, eta, t1, t2, t3, total));
        }
    }
    match chosen {
        Some((n, eta, t1, t2, t3, total)) => {
            report.metric("budget_level", n as f64);
            report.metric("budget_eta", eta);
            report.check(Criterion::at_most("budget_t1", "‖S(d) − S(P_N d)‖_{Z_p} ≤ ε/8", t1, eps / 8.0));
            report.check(Criterion::at_most("budget_t2", "‖S(P_N d) − S(P_N d′)‖_{Z_p} ≤ ε/2", t2, eps / 2.0));
            report.check(Criterion::at_most("budget_t3", "‖S(d′) − S(P_N d′)‖_{Z_p} ≤ 3ε/8", t3, 3.0 * eps / 8.0));
            report.check(Criterion::at_most("budget_triangle", "‖S(d) − S(d′)‖_{Z_p} ≤ t1 + t2 + t3", total, (t1 + t2 + t3) * (1.0 + 1e-12)));
            report.check(Criterion::at_most("budget_total", "‖S(d) − S(d′)‖_{Z_p} ≤ ε", total, eps));
        }
        None => report.check(Criterion::flag("budget_level", "some level meets the ε/8 and 3ε/8 shares", false)),
    }
    report.tables.push(table);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outside_the_range_is_a_precondition_error() {
        let base = ExperimentSpec::for_experiment("bona_smith").unwrap();
        for spec in [ExperimentSpec { p: 3.0, ..base.clone() }, ExperimentSpec { dim: 2, p: 1.5, ..base }] {
            assert!(matches!(run_bona_smith(&spec), Err(Error::Precondition(_))));
        }
    }

    #[test]
    fn mollification_at_the_top_is_the_identity() {
        let g = Grid::new(3, 16).unwrap();
        let d = random_state(&g, Ensemble::new(1.0, BAND_BOX), 2.0, 0.02, 0.1, 9).unwrap().dealiased().unwrap();
        let m = mollify(&d, g.j_max() + 1).unwrap();
        assert_eq!(data_norm(&difference(&d, &m).unwrap(), 2.0).unwrap(), 0.0);
        assert!(lower_data_norm(&d, 2.0).unwrap() > 0.0);
    }
}
