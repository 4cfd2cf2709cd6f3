//! Lipschitz behaviour of the velocity difference in `L¹_T L∞`, measured
//! through the Lagrangian reformulation.

use rayon::prelude::*;

use super::data::{base_state, difference, perturbation, perturbed, Perturbation};
use super::report::{Criterion, Report, Table};
use super::{spread, ExperimentSpec};
use crate::error::Result;
use crate::lagrangian::{flow_of, lagrangian_difference};
use crate::solvers::cns::data_norm;

pub fn run_lagrangian_difference(spec: &ExperimentSpec) -> Result<Report> {
    let g = spec.grid()?;
    let base = base_state(&g, spec.p, spec.a_amp, spec.u_amp, spec.seed)?;
    let shell = ((spec.n / 6).max(2)) as f64;
    let dir = perturbation(&g, Perturbation::Shell { k: shell }, spec.p, spec.seed.wrapping_add(2))?;
    let horizon = spec.resolve_horizon(&base)?;
    let s0 = spec.solve(&base, horizon)?;
    let x0 = flow_of(&s0.traj)?;

    let mut report = Report::new("lagrangian_difference", spec.to_json());
    report.metric("horizon", horizon);
    let mut table = Table::new(
        "lipschitz",
        &["eps", "data_diff", "eulerian_l1_linf", "ratio", "lagrangian_l1_linf", "l2_bound", "interpolation_bound", "zp"],
    );
    let runs = spec
        .epsilons
        .par_iter()
        .map(|&eps| {
            let d = perturbed(&base, &dir, eps)?;
            let s = spec.solve(&d, horizon)?;
            let x = flow_of(&s.traj)?;
            let ld = lagrangian_difference(&s0.traj, &s.traj, &x0, &x, spec.p)?;
            // Data difference after the solver's own dealiasing.
            let dd = data_norm(&difference(&d, &base)?.dealiased()?, spec.p)?;
            Ok((eps, dd, ld))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut ratios = Vec::new();
    for (eps, dd, ld) in &runs {
        let tag = format!("{eps:e}");
        let ratio = ld.eulerian_l1_linf / dd;
        ratios.push(ratio);
        table.push(vec![*eps, *dd, ld.eulerian_l1_linf, ratio, ld.l1_linf, ld.l2_bound, ld.interpolation_bound, ld.zp]);
        report.check(Criterion::flag(
            &format!("ordering_{tag}"),
            "‖δū‖_{L¹L∞} ≤ T^{1/2}‖G‖_{L²} ≤ T^{1/2}(sup G ∫G)^{1/2}",
            ld.ordering_holds(),
        ));
        report.check(Criterion::at_most(
            &format!("flow_correction_{tag}"),
            "‖u₂∘X₁ − u₂∘X₂‖_{L¹L∞} ≤ ∫W(∇u₂) sup‖X₁ − X₂‖",
            ld.flow_correction,
            ld.flow_bound * (1.0 + 1e-9),
        ));
        report.metric(&format!("besov_interpolation_{tag}"), ld.besov_interpolation);
    }
    report.check(Criterion::at_most(
        "lipschitz_ratio_spread",
        "max/min over ε of ‖uⁿ − u‖_{L¹L∞}/‖data difference‖_{𝕏_p}",
        spread(&ratios),
        1.0 + spec.tolerance,
    ));
    report.metric("lipschitz_ratio_max", ratios.iter().copied().fold(0.0, f64::max));
    report.tables.push(table);
    Ok(report)
}
