//! Dyadic frequency localization and the Helmholtz split.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;

fn h(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Smooth radial cutoff: one on `|ξ| ≤ 1/2`, zero on `|ξ| ≥ 1`.
pub fn phi(r: f64) -> f64 {
    let r = r.abs();
    if r <= 0.5 {
        return 1.0;
    }
    if r >= 1.0 {
        return 0.0;
    }
    let a = h(2.0 - 2.0 * r);
    let b = h(2.0 * r - 1.0);
    a / (a + b)
}

/// Annular profile `φ(ξ/2) − φ(ξ)`, supported in `1/2 ≤ |ξ| ≤ 2`.
pub fn psi(r: f64) -> f64 {
    phi(r / 2.0) - phi(r)
}

/// The dyadic range of a grid together with the block multipliers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProfile {
    pub j_min: i32,
    pub j_max: i32,
}

impl CutoffProfile {
    pub fn of(grid: &Grid) -> Self {
        CutoffProfile { j_min: grid.j_min(), j_max: grid.j_max() }
    }

    pub fn blocks(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    /// Multiplier of block `j` at radius `r`.
    pub fn block(&self, j: i32, r: f64) -> f64 {
        psi(r / 2f64.powi(j))
    }

    /// Multiplier of `Σ_{j_min ≤ k < m}` blocks at radius `r`, telescoped.
    pub fn below(&self, m: i32, r: f64) -> f64 {
        if m <= self.j_min || r == 0.0 {
            return 0.0;
        }
        phi(r / 2f64.powi(m)) - phi(r / 2f64.powi(self.j_min))
    }

    /// `Σ_{j_min ≤ j ≤ j_max} ψ(r/2^j)`; equals one on the resolved range.
    pub fn partition_sum(&self, r: f64) -> f64 {
        self.blocks().map(|j| self.block(j, r)).sum()
    }
}

fn check_block(grid: &Grid, j: i32) -> Result<()> {
    if j < grid.j_min() || j > grid.j_max() {
        return Err(Error::Range(format!("block {j} outside [{}, {}]", grid.j_min(), grid.j_max())));
    }
    Ok(())
}

fn check_cut(grid: &Grid, m: i32) -> Result<()> {
    if m < grid.j_min() - 1 || m > grid.j_max() + 2 {
        return Err(Error::Range(format!("cutoff {m} outside [{}, {}]", grid.j_min() - 1, grid.j_max() + 2)));
    }
    Ok(())
}

/// Block `j` without the range check; also used for the partial block just
/// past the resolved range.
pub(crate) fn block_unchecked(f: &Field, j: i32) -> Field {
    let g = f.grid();
    let prof = CutoffProfile::of(g);
    f.multiply_real(|i| if i == 0 { 0.0 } else { prof.block(j, g.kmag(i)) })
}

/// Dyadic block `Δ_j f`.
pub fn lp_block(f: &Field, j: i32) -> Result<Field> {
    check_block(f.grid(), j)?;
    Ok(block_unchecked(f, j))
}

pub(crate) fn low_pass_unchecked(f: &Field, m: i32) -> Field {
    let g = f.grid();
    let prof = CutoffProfile::of(g);
    f.multiply_real(|i| if i == 0 { 1.0 } else { prof.below(m, g.kmag(i)) })
}

/// Mean plus all blocks below `m`.
pub fn low_pass(f: &Field, m: i32) -> Result<Field> {
    check_cut(f.grid(), m)?;
    Ok(low_pass_unchecked(f, m))
}

/// `f − low_pass(f, m)`.
pub fn high_pass(f: &Field, m: i32) -> Result<Field> {
    check_cut(f.grid(), m)?;
    let g = f.grid();
    let prof = CutoffProfile::of(g);
    Ok(f.multiply_real(|i| if i == 0 { 0.0 } else { 1.0 - prof.below(m, g.kmag(i)) }))
}

/// Splits a vector field into its divergence-free and gradient parts. The
/// mean is assigned to the divergence-free part.
pub fn helmholtz_project(u: &Field) -> Result<(Field, Field)> {
    u.ensure_vector()?;
    let g = u.grid();
    let d = g.dim();
    let mut grad = vec![vec![Complex64::new(0.0, 0.0); g.len()]; d];
    for i in 1..g.len() {
        let xi: Vec<f64> = (0..d).map(|a| g.xi(i, a)).collect();
        let k2: f64 = xi.iter().map(|x| x * x).sum();
        let dot: Complex64 = (0..d).map(|a| u.spectral(a)[i] * xi[a]).sum();
        for a in 0..d {
            grad[a][i] = dot * (xi[a] / k2);
        }
    }
    let q = Field::from_spectral(g, grad)?;
    let p = u.sub(&q)?;
    Ok((p, q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(g: &Grid) -> Field {
        Field::from_fn(g, 1, |x, o| {
            let y = if x.len() > 1 { x[1] } else { 0.0 };
            o[0] = 0.3 + x[0].sin() + 0.5 * (5.0 * x[0] - 2.0 * y).cos() + 0.2 * (11.0 * y).sin()
        })
        .unwrap()
    }

    #[test]
    fn profile_shape() {
        assert_eq!(phi(0.3), 1.0);
        assert_eq!(phi(1.2), 0.0);
        assert!((phi(0.75) - 0.5).abs() < 1e-15);
        assert_eq!(psi(0.4), 0.0);
        assert_eq!(psi(2.5), 0.0);
        for i in 0..200 {
            let r = 0.01 * i as f64;
            assert!((0.0..=1.0).contains(&phi(r)));
            assert!(psi(r) >= 0.0);
        }
    }

    #[test]
    fn partition_of_unity_on_resolved_modes() {
        let g = Grid::new(2, 64).unwrap();
        let prof = CutoffProfile::of(&g);
        for i in 1..g.len() {
            if g.kmag(i) <= g.resolved_radius() {
                assert!((prof.partition_sum(g.kmag(i)) - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn blocks_sum_to_field_minus_mean() {
        let g = Grid::new(2, 32).unwrap();
        let f = sample(&g);
        let mut acc = Field::zeros(&g, 1);
        for j in g.j_min()..=g.j_max() {
            acc = acc.add(&lp_block(&f, j).unwrap()).unwrap();
        }
        let target = f.remove_mean();
        assert!(acc.sub(&target).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn low_and_high_pass() {
        let g = Grid::new(2, 32).unwrap();
        let f = sample(&g);
        for m in g.j_min() - 1..=g.j_max() + 2 {
            let lo = low_pass(&f, m).unwrap();
            let hi = high_pass(&f, m).unwrap();
            assert!(lo.add(&hi).unwrap().sub(&f).unwrap().max_abs() < 1e-13);
            let mut acc = Field::constant(&g, &[f.mean(0)]);
            for k in g.j_min()..m.min(g.j_max() + 1) {
                acc = acc.add(&lp_block(&f, k).unwrap()).unwrap();
            }
            if m <= g.j_max() + 1 {
                assert!(acc.sub(&lo).unwrap().max_abs() < 1e-12, "m = {m}");
            }
        }
        let full = low_pass(&f, g.j_max() + 2).unwrap();
        assert!(full.sub(&f).unwrap().max_abs() < 1e-13);
        let none = high_pass(&f, g.j_min() - 1).unwrap();
        assert!(none.sub(&f.remove_mean()).unwrap().max_abs() < 1e-13);
        assert!(matches!(lp_block(&f, g.j_max() + 1), Err(Error::Range(_))));
        assert!(matches!(low_pass(&f, g.j_max() + 3), Err(Error::Range(_))));
    }

    #[test]
    fn block_outside_annulus_vanishes() {
        let g = Grid::new(1, 64).unwrap();
        let f = Field::from_fn(&g, 1, |x, o| o[0] = (20.0 * x[0]).cos()).unwrap();
        assert!(lp_block(&f, 2).unwrap().max_abs() < 1e-14);
        assert!(lp_block(&f, 4).unwrap().max_abs() > 0.1);
    }

    #[test]
    fn helmholtz_examples() {
        let g = Grid::new(2, 32).unwrap();
        let pot = sample(&g);
        let (p, q) = helmholtz_project(&pot.gradient().unwrap()).unwrap();
        assert!(p.max_abs() < 1e-10);
        assert!(q.sub(&pot.gradient().unwrap()).unwrap().max_abs() < 1e-10);

        let rot = Field::from_fn(&g, 2, |x, o| {
            o[0] = -x[1].sin();
            o[1] = x[0].sin();
        })
        .unwrap();
        let (p, q) = helmholtz_project(&rot).unwrap();
        assert!(q.max_abs() < 1e-12);
        assert!(p.sub(&rot).unwrap().max_abs() < 1e-12);
        assert!(matches!(helmholtz_project(&pot), Err(Error::Shape(_))));
    }
}
