//! Bony decomposition, weighted product-estimate ratios and composition with
//! smooth scalar maps.

use serde::{Deserialize, Serialize};

use crate::besov::{besov_norm, block_norms, BesovIndex, Cutoff};
use crate::envelope::AcceptableWeight;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::lp::{block_unchecked, low_pass_unchecked};

fn same_grid(f: &Field, g: &Field) -> Result<()> {
    if f.grid() != g.grid() {
        return Err(Error::Shape("operands live on different grids".into()));
    }
    Ok(())
}

/// Paraproduct `Σ_j S_{j-1} f · Δ_j g`. The low part includes the mean of
/// `f`, so a constant `c` gives `c (g − ḡ)`.
pub fn para(f: &Field, g: &Field) -> Result<Field> {
    same_grid(f, g)?;
    let grid = f.grid();
    let comps = if f.is_scalar() { g.comps() } else { f.comps() };
    let mut acc = Field::zeros(grid, comps);
    for j in grid.j_min()..=grid.j_max() + 1 {
        let gj = block_unchecked(g, j);
        if gj.max_abs() == 0.0 {
            continue;
        }
        acc = acc.add(&low_pass_unchecked(f, j - 1).product(&gj)?)?;
    }
    Ok(acc)
}

/// Remainder `Σ_{|j−k|≤1} Δ_j f · Δ_k g`.
pub fn remainder(f: &Field, g: &Field) -> Result<Field> {
    same_grid(f, g)?;
    let grid = f.grid();
    let (lo, hi) = (grid.j_min(), grid.j_max() + 1);
    let comps = if f.is_scalar() { g.comps() } else { f.comps() };
    let gb: Vec<Field> = (lo..=hi).map(|j| block_unchecked(g, j)).collect();
    let mut acc = Field::zeros(grid, comps);
    for j in lo..=hi {
        let fj = block_unchecked(f, j);
        if fj.max_abs() == 0.0 {
            continue;
        }
        let mut near = Field::zeros(grid, g.comps());
        for k in (j - 1).max(lo)..=(j + 1).min(hi) {
            near = near.add(&gb[(k - lo) as usize])?;
        }
        acc = acc.add(&fj.product(&near)?)?;
    }
    Ok(acc)
}

/// One of the product inequalities whose ratio `LHS/RHS` is measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProductEstimateKind {
    /// `‖T_f g‖_{B^{s+t}_{p,r}(ω)} ≤ C ‖f‖_{B^{t+d/p}_{p,1}} ‖g‖_{B^s_{p,r}(ω)}`, `t ≤ 0`.
    ParaLow { s: f64, t: f64, r: f64 },
    /// `‖T_f g‖_{B^{s+t}_{p,r}(ω)} ≤ C ‖g‖_{B^s_{p,r}} ‖f‖_{B^{t+d/p}_{p,1}(ω)}`, `t + δ0 ≤ 0`.
    ParaWeightedLow { s: f64, t: f64, r: f64 },
    /// `‖R(f,g)‖_{B^{t1+t2}_{p,r}(ω)} ≤ C ‖f‖_{B^{t1+d/p}_{p,r}} ‖g‖_{B^{t2}_{p,∞}(ω)}`,
    /// `t1 + t2 > −min(d/p, d/p')`.
    Remainder { t1: f64, t2: f64, r: f64 },
    /// Symmetric weighted product law, `s1, s2 ≤ d/p`.
    ProductSymmetric { s1: f64, s2: f64 },
    /// One-sided weighted product law, `s1 ≤ d/p`, `s2 ≤ d/p − δ0`.
    ProductOneSided { s1: f64, s2: f64 },
    /// `‖fg‖_{B^{d/p}(ω)}` against the symmetric right side, `p < ∞`.
    CriticalAlgebra,
    /// `‖fg‖_{B^{−1+d/p}(ω)} ≤ C ‖f‖_{B^{d/p}} ‖g‖_{B^{−1+d/p}(ω)}`, `p < 2d`.
    CriticalLowered,
    /// `‖fg‖_{B^{−2+d/p}} ≤ C ‖f‖_{B^{d/p}} ‖g‖_{B^{−2+d/p}}`, `d > 2`, `p < d`.
    UnweightedLowered,
    /// `‖fg‖_{B^{−2+d/p}} ≤ C ‖f‖_{B^{−1+d/p}} ‖g‖_{B^{−1+d/p}}`, `d > 2`, `p < d`.
    UnweightedPair,
}

fn precondition(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(what.to_string()))
    }
}

impl ProductEstimateKind {
    /// Checks the hypotheses of the inequality for dimension `d`, exponent
    /// `p` and weight growth `δ0` (zero when unweighted).
    pub fn check(&self, d: usize, p: f64, delta0: f64) -> Result<()> {
        let d = d as f64;
        let dp = d / p;
        let sum_floor = d * (2.0 / p - 1.0).max(0.0);
        match *self {
            ProductEstimateKind::ParaLow { t, .. } => precondition(t <= 0.0, "paraproduct needs t ≤ 0"),
            ProductEstimateKind::ParaWeightedLow { t, .. } => {
                precondition(t + delta0 <= 0.0, "weighted paraproduct needs t + δ0 ≤ 0")
            }
            ProductEstimateKind::Remainder { t1, t2, .. } => {
                let dual = if p == 1.0 { 0.0 } else { d * (1.0 - 1.0 / p) };
                precondition(t1 + t2 > -dp.min(dual), "remainder needs t1 + t2 > −min(d/p, d/p')")
            }
            ProductEstimateKind::ProductSymmetric { s1, s2 } => precondition(
                s1 <= dp && s2 <= dp && s1 + s2 > sum_floor,
                "product law needs s1, s2 ≤ d/p and s1 + s2 > d·max(0, 2/p − 1)",
            ),
            ProductEstimateKind::ProductOneSided { s1, s2 } => precondition(
                s1 <= dp && s2 <= dp - delta0 && s1 + s2 > sum_floor,
                "one-sided product law needs s1 ≤ d/p, s2 ≤ d/p − δ0 and s1 + s2 > d·max(0, 2/p − 1)",
            ),
            ProductEstimateKind::CriticalAlgebra => precondition(p.is_finite(), "algebra law needs p < ∞"),
            ProductEstimateKind::CriticalLowered => {
                precondition(d >= 2.0 && p < 2.0 * d, "lowered law needs d ≥ 2 and p < 2d")
            }
            ProductEstimateKind::UnweightedLowered | ProductEstimateKind::UnweightedPair => {
                precondition(d > 2.0 && p < d, "unweighted lowered laws need d > 2 and p < d")
            }
        }
    }
}

struct Norms<'a> {
    p: f64,
    w: Option<&'a AcceptableWeight>,
}

impl Norms<'_> {
    fn of(&self, f: &Field, s: f64, r: f64, weighted: bool) -> Result<f64> {
        let series = block_norms(f, self.p)?;
        besov_norm(&series, BesovIndex::new(s, self.p, r)?, if weighted { self.w } else { None }, Cutoff::None)
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// `LHS/RHS` of the chosen inequality after checking its hypotheses.
pub fn estimate_ratio(
    kind: ProductEstimateKind,
    f: &Field,
    g: &Field,
    p: f64,
    w: Option<&AcceptableWeight>,
) -> Result<f64> {
    kind.check(f.grid().dim(), p, w.map_or(0.0, |w| w.delta0))?;
    estimate_ratio_unchecked(kind, f, g, p, w)
}

/// Same as [`estimate_ratio`] without the hypothesis check, for probing
/// parameter choices where the inequality is expected to fail.
pub fn estimate_ratio_unchecked(
    kind: ProductEstimateKind,
    f: &Field,
    g: &Field,
    p: f64,
    w: Option<&AcceptableWeight>,
) -> Result<f64> {
    same_grid(f, g)?;
    let n = Norms { p, w };
    let dp = f.grid().dim() as f64 / p;
    let inf = f64::INFINITY;
    Ok(match kind {
        ProductEstimateKind::ParaLow { s, t, r } => {
            let lhs = n.of(&para(f, g)?, s + t, r, true)?;
            ratio(lhs, n.of(f, t + dp, 1.0, false)? * n.of(g, s, r, true)?)
        }
        ProductEstimateKind::ParaWeightedLow { s, t, r } => {
            let lhs = n.of(&para(f, g)?, s + t, r, true)?;
            ratio(lhs, n.of(g, s, r, false)? * n.of(f, t + dp, 1.0, true)?)
        }
        ProductEstimateKind::Remainder { t1, t2, r } => {
            let lhs = n.of(&remainder(f, g)?, t1 + t2, r, true)?;
            ratio(lhs, n.of(f, t1 + dp, r, false)? * n.of(g, t2, inf, true)?)
        }
        ProductEstimateKind::ProductSymmetric { s1, s2 } => symmetric(&n, f, g, s1, s2, dp)?,
        ProductEstimateKind::CriticalAlgebra => symmetric(&n, f, g, dp, dp, dp)?,
        ProductEstimateKind::ProductOneSided { s1, s2 } => one_sided(&n, f, g, s1, s2, dp)?,
        ProductEstimateKind::CriticalLowered => one_sided(&n, f, g, dp, dp - 1.0, dp)?,
        ProductEstimateKind::UnweightedLowered => {
            let lhs = n.of(&f.product(g)?, dp - 2.0, 1.0, false)?;
            ratio(lhs, n.of(f, dp, 1.0, false)? * n.of(g, dp - 2.0, 1.0, false)?)
        }
        ProductEstimateKind::UnweightedPair => {
            let lhs = n.of(&f.product(g)?, dp - 2.0, 1.0, false)?;
            ratio(lhs, n.of(f, dp - 1.0, 1.0, false)? * n.of(g, dp - 1.0, 1.0, false)?)
        }
    })
}

fn symmetric(n: &Norms, f: &Field, g: &Field, s1: f64, s2: f64, dp: f64) -> Result<f64> {
    let lhs = n.of(&f.product(g)?, s1 + s2 - dp, 1.0, true)?;
    let rhs = n.of(f, s1, 1.0, true)? * n.of(g, s2, 1.0, false)? + n.of(f, s1, 1.0, false)? * n.of(g, s2, 1.0, true)?;
    Ok(ratio(lhs, rhs))
}

fn one_sided(n: &Norms, f: &Field, g: &Field, s1: f64, s2: f64, dp: f64) -> Result<f64> {
    let lhs = n.of(&f.product(g)?, s1 + s2 - dp, 1.0, true)?;
    Ok(ratio(lhs, n.of(f, s1, 1.0, false)? * n.of(g, s2, 1.0, true)?))
}

/// A smooth scalar function vanishing at zero, with a domain check.
pub trait ScalarMap {
    fn eval(&self, x: f64) -> f64;

    fn domain_ok(&self, _x: f64) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Identity;

impl ScalarMap for Identity {
    fn eval(&self, x: f64) -> f64 {
        x
    }
}

/// `a ↦ a/(1+a)`, defined while `1 + a ≥ margin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityFactor {
    pub margin: f64,
}

impl Default for DensityFactor {
    fn default() -> Self {
        DensityFactor { margin: 0.5 }
    }
}

impl ScalarMap for DensityFactor {
    fn eval(&self, a: f64) -> f64 {
        a / (1.0 + a)
    }

    fn domain_ok(&self, a: f64) -> bool {
        1.0 + a >= self.margin
    }
}

/// Pointwise `F(f)` on the grid followed by 2/3 truncation.
pub fn compose<F: ScalarMap + ?Sized>(map: &F, f: &Field) -> Result<Field> {
    f.ensure_scalar()?;
    if let Some(v) = f.physical(0).iter().find(|v| !map.domain_ok(**v)) {
        return Err(Error::Domain(format!("value {v} outside the domain of the map")));
    }
    let vals: Vec<f64> = f.physical(0).iter().map(|&v| map.eval(v)).collect();
    Ok(Field::scalar(f.grid(), vals)?.dealias())
}
