//! Seeded data families for the experiments.

use crate::besov::{block_norms, BesovIndex};
use crate::envelope::BlockMass;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::random::Ensemble;
use crate::solvers::cns::data_norm;
use crate::solvers::CnsState;

fn scale_to(f: Field, norm: f64, target: f64) -> Result<Field> {
    if !(norm > 0.0) {
        return Err(Error::Data("cannot normalize a field with zero norm".into()));
    }
    Ok(f.scale(target / norm))
}

fn critical(f: &Field, s_shift: f64, p: f64) -> Result<f64> {
    let d = f.grid().dim() as f64;
    crate::besov::besov_norm(&block_norms(f, p)?, BesovIndex::new(d / p + s_shift, p, 1.0)?, None, crate::besov::Cutoff::None)
}

/// Random state from `ens`, with `‖a‖_{Ḃ^{d/p}_{p,1}} = a_amp` and
/// `‖u‖_{Ḃ^{−1+d/p}_{p,1}} = u_amp`.
pub fn random_state(grid: &Grid, ens: Ensemble, p: f64, a_amp: f64, u_amp: f64, seed: u64) -> Result<CnsState> {
    let a = ens.sample(grid, 1, seed)?.dealias();
    let u = ens.sample(grid, grid.dim(), seed.wrapping_add(7919))?.dealias();
    let (na, nu) = (critical(&a, 0.0, p)?, critical(&u, -1.0, p)?);
    CnsState::new(scale_to(a, na, a_amp)?, scale_to(u, nu, u_amp)?)
}

/// Smooth base datum supported in `|k_i| ≤ 2`.
pub fn base_state(grid: &Grid, p: f64, a_amp: f64, u_amp: f64, seed: u64) -> Result<CnsState> {
    random_state(grid, Ensemble::new(1.0, 2), p, a_amp, u_amp, seed)
}

/// Direction of a perturbation, normalized to unit `𝕏_p` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    /// Random band-limited field in the box `|k_i| ≤ K`.
    Random { box_radius: i32 },
    /// Both unknowns excited only on the shell of radius near `k`.
    Shell { k: f64 },
}

pub fn perturbation(grid: &Grid, kind: Perturbation, p: f64, seed: u64) -> Result<CnsState> {
    let ens = match kind {
        Perturbation::Random { box_radius } => Ensemble::new(0.5, box_radius),
        Perturbation::Shell { k } => Ensemble::annulus(0.0, k - 0.5, k + 0.5),
    };
    let s = random_state(grid, ens, p, 0.5, 0.5, seed)?;
    let n = data_norm(&s, p)?;
    CnsState::new(s.a.scale(1.0 / n), s.u.scale(1.0 / n))
}

/// `base + eps · dir`.
pub fn perturbed(base: &CnsState, dir: &CnsState, eps: f64) -> Result<CnsState> {
    CnsState::new(base.a.lin_comb(1.0, &dir.a, eps)?, base.u.lin_comb(1.0, &dir.u, eps)?)
}

pub fn difference(x: &CnsState, y: &CnsState) -> Result<CnsState> {
    CnsState::new(x.a.sub(&y.a)?, x.u.sub(&y.u)?)
}

/// Per-block contributions `2^{j d/p}‖Δ_j a‖_p + 2^{j(d/p−1)}‖Δ_j u‖_p` to
/// the `𝕏_p` norm, indexed from `j = 0`.
pub fn block_mass(s: &CnsState, p: f64) -> Result<BlockMass> {
    let d = s.a.grid().dim() as f64;
    let na = block_norms(&s.a, p)?;
    let nu = block_norms(&s.u, p)?;
    if na.j_min != 0 {
        return Err(Error::Range("block masses expect blocks to start at zero".into()));
    }
    let values = na
        .indices()
        .map(|j| 2f64.powf(j as f64 * d / p) * na.get(j) + 2f64.powf(j as f64 * (d / p - 1.0)) * nu.get(j))
        .collect();
    Ok(BlockMass::new(values, 0.0))
}

/// Low-pass of both unknowns keeping blocks `j ≤ level`.
pub fn mollify(s: &CnsState, level: i32) -> Result<CnsState> {
    let g = s.a.grid();
    let m = (level + 1).clamp(g.j_min() - 1, g.j_max() + 2);
    CnsState::new(crate::lp::low_pass(&s.a, m)?, crate::lp::low_pass(&s.u, m)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizations() {
        let g = Grid::new(2, 32).unwrap();
        let b = base_state(&g, 2.0, 0.02, 0.1, 1).unwrap();
        assert!((critical(&b.a, 0.0, 2.0).unwrap() - 0.02).abs() < 1e-14);
        assert!((critical(&b.u, -1.0, 2.0).unwrap() - 0.1).abs() < 1e-14);
        let dir = perturbation(&g, Perturbation::Shell { k: 6.0 }, 2.0, 3).unwrap();
        assert!((data_norm(&dir, 2.0).unwrap() - 1.0).abs() < 1e-12);
        let m = block_mass(&b, 2.0).unwrap();
        assert!((m.total() - 0.12).abs() < 1e-12);
    }

    #[test]
    fn mollifier_is_identity_at_the_top() {
        let g = Grid::new(2, 32).unwrap();
        let b = base_state(&g, 2.0, 0.02, 0.1, 1).unwrap();
        let m = mollify(&b, g.j_max() + 1).unwrap();
        assert!(m.a.sub(&b.a).unwrap().max_abs() < 1e-15);
        let low = mollify(&b, 0).unwrap();
        assert!(low.u.sub(&b.u).unwrap().max_abs() > 1e-4);
    }
}
