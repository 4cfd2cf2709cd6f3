//! Besov norms assembled from per-block `L^p` norms, their space-time
//! variants, and Bernstein ratios.

use serde::{Deserialize, Serialize};

use crate::envelope::AcceptableWeight;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::lp::lp_block;

/// Regularity `s`, integrability `p` and summation index `r`. Infinite
/// exponents are `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovIndex {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

impl BesovIndex {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        if !(p >= 1.0 && r >= 1.0) || s.is_nan() {
            return Err(Error::Domain(format!("invalid Besov index s={s}, p={p}, r={r}")));
        }
        Ok(BesovIndex { s, p, r })
    }
}

/// `‖Δ_j f‖_{L^p}` for `j = j_min..=j_min + values.len() - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSeries {
    pub p: f64,
    pub j_min: i32,
    pub values: Vec<f64>,
}

impl NormSeries {
    pub fn j_max(&self) -> i32 {
        self.j_min + self.values.len() as i32 - 1
    }

    pub fn get(&self, j: i32) -> f64 {
        if j < self.j_min {
            return 0.0;
        }
        self.values.get((j - self.j_min) as usize).copied().unwrap_or(0.0)
    }

    pub fn indices(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.values.len()).map(move |i| self.j_min + i as i32)
    }
}

/// Frequency restriction applied when summing blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Cutoff {
    None,
    /// Blocks `j ≤ m0`.
    Low(i32),
    /// Blocks `j > m0`.
    High(i32),
}

impl Cutoff {
    fn keeps(&self, j: i32) -> bool {
        match *self {
            Cutoff::None => true,
            Cutoff::Low(m) => j <= m,
            Cutoff::High(m) => j > m,
        }
    }
}

/// Per-block `L^p` norms over the resolved dyadic range.
pub fn block_norms(f: &Field, p: f64) -> Result<NormSeries> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("L^p exponent {p} below 1")));
    }
    let g = f.grid();
    let values =
        (g.j_min()..=g.j_max()).map(|j| lp_block(f, j)?.lp_norm(p)).collect::<Result<Vec<_>>>()?;
    Ok(NormSeries { p, j_min: g.j_min(), values })
}

/// `ℓ^r` norm of a nonnegative sequence.
pub fn ell_r(values: impl IntoIterator<Item = f64>, r: f64) -> f64 {
    if r.is_infinite() {
        return values.into_iter().fold(0.0, f64::max);
    }
    if r == 1.0 {
        return values.into_iter().sum();
    }
    values.into_iter().map(|v| v.powf(r)).sum::<f64>().powf(1.0 / r)
}

fn check_cutoff(series: &NormSeries, cutoff: Cutoff) -> Result<()> {
    if let Cutoff::Low(m) | Cutoff::High(m) = cutoff {
        if m < series.j_min - 1 || m > series.j_max() {
            return Err(Error::Range(format!("cutoff {m} outside [{}, {}]", series.j_min - 1, series.j_max())));
        }
    }
    Ok(())
}

fn block_weight(j: i32, s: f64, w: Option<&AcceptableWeight>) -> f64 {
    2f64.powf(j as f64 * s) * w.map_or(1.0, |w| w.at(j))
}

/// `(Σ_j (ω_j 2^{js} ‖Δ_j f‖_{L^p})^r)^{1/r}` over the selected blocks.
pub fn besov_norm(series: &NormSeries, idx: BesovIndex, w: Option<&AcceptableWeight>, cutoff: Cutoff) -> Result<f64> {
    if series.p != idx.p {
        return Err(Error::Index(format!("series has p={}, index has p={}", series.p, idx.p)));
    }
    check_cutoff(series, cutoff)?;
    Ok(ell_r(
        series.indices().filter(|&j| cutoff.keeps(j)).map(|j| block_weight(j, idx.s, w) * series.get(j)),
        idx.r,
    ))
}

/// Convenience: Besov norm of a field.
pub fn field_besov(f: &Field, idx: BesovIndex) -> Result<f64> {
    besov_norm(&block_norms(f, idx.p)?, idx, None, Cutoff::None)
}

/// Time exponent, horizon and ordering of a space-time norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeNormSpec {
    pub q: f64,
    pub horizon: f64,
    /// Time norm taken per block before the `ℓ^r` sum.
    pub tilde: bool,
}

impl TimeNormSpec {
    pub fn new(q: f64, horizon: f64, tilde: bool) -> Result<Self> {
        if !(q >= 1.0) || !(horizon > 0.0) {
            return Err(Error::Domain(format!("invalid time norm q={q}, T={horizon}")));
        }
        Ok(TimeNormSpec { q, horizon, tilde })
    }
}

/// Trapezoid `L^q(0,T)` norm of samples `g(t_i)`; the samples must start at
/// zero and reach `T`. Samples past `T` are ignored and the last interval is
/// cut by linear interpolation.
pub fn time_lq(times: &[f64], g: &[f64], q: f64, horizon: f64) -> Result<f64> {
    if times.is_empty() || times.len() != g.len() {
        return Err(Error::Data("time samples missing or mismatched".into()));
    }
    let tol = 1e-9 * horizon.max(1.0);
    if times[0].abs() > tol || *times.last().unwrap() < horizon - tol {
        return Err(Error::Data(format!(
            "samples span [{}, {}], need [0, {horizon}]",
            times[0],
            times.last().unwrap()
        )));
    }
    if q.is_infinite() {
        return Ok(times.iter().zip(g).filter(|(t, _)| **t <= horizon + tol).map(|(_, v)| *v).fold(0.0, f64::max));
    }
    let mut acc = 0.0;
    for i in 0..times.len() - 1 {
        let (t0, t1) = (times[i], times[i + 1]);
        if t0 >= horizon - tol {
            break;
        }
        let (g0, mut g1, mut dt) = (g[i], g[i + 1], t1 - t0);
        if t1 > horizon + tol {
            let th = (horizon - t0) / dt;
            g1 = g0 + th * (g1 - g0);
            dt = horizon - t0;
        }
        acc += 0.5 * dt * (g0.powf(q) + g1.powf(q));
    }
    Ok(acc.powf(1.0 / q))
}

/// Space-time Besov norm from a time series of block norms.
pub fn spacetime_norm(
    times: &[f64],
    series: &[NormSeries],
    idx: BesovIndex,
    spec: TimeNormSpec,
    w: Option<&AcceptableWeight>,
    cutoff: Cutoff,
) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::Data("empty trajectory".into()));
    }
    if spec.tilde {
        let first = &series[0];
        check_cutoff(first, cutoff)?;
        if series.iter().any(|s| s.p != idx.p) {
            return Err(Error::Index("series exponent differs from index".into()));
        }
        let mut per_block = Vec::new();
        for j in first.indices().filter(|&j| cutoff.keeps(j)) {
            let g: Vec<f64> = series.iter().map(|s| s.get(j)).collect();
            per_block.push(block_weight(j, idx.s, w) * time_lq(times, &g, spec.q, spec.horizon)?);
        }
        Ok(ell_r(per_block, idx.r))
    } else {
        let g = series.iter().map(|s| besov_norm(s, idx, w, cutoff)).collect::<Result<Vec<_>>>()?;
        time_lq(times, &g, spec.q, spec.horizon)
    }
}

/// Claimed spectral support for a Bernstein ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    /// `|ξ| ≤ λ`.
    Ball { lambda: f64 },
    /// `λ/2 ≤ |ξ| ≤ 2λ`.
    Annulus { lambda: f64 },
}

/// Measured Bernstein ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernsteinRatio {
    /// `‖D^k f‖_{L^q} / (λ^{k + d(1/p − 1/q)} ‖f‖_{L^p})`.
    pub upper: f64,
    /// `‖D^k f‖_{L^p} / (λ^k ‖f‖_{L^p})`, only for annulus support.
    pub lower: Option<f64>,
}

/// All `k`-th partial derivatives, one field per ordered multi-index.
fn derivative_tensor(f: &Field, k: u32) -> Result<Field> {
    let mut parts = vec![f.clone()];
    for _ in 0..k {
        let mut next = Vec::new();
        for p in &parts {
            for a in 0..f.grid().dim() {
                next.push(p.derivative(a));
            }
        }
        parts = next;
    }
    Field::from_components(&parts)
}

pub fn bernstein_ratio(f: &Field, k: u32, p: f64, q: f64, support: Support) -> Result<BernsteinRatio> {
    f.ensure_scalar()?;
    if !(p >= 1.0 && q >= p) {
        return Err(Error::Domain(format!("need 1 ≤ p ≤ q, got p={p}, q={q}")));
    }
    let g = f.grid();
    let (lambda, lo, hi) = match support {
        Support::Ball { lambda } => (lambda, 0.0, lambda),
        Support::Annulus { lambda } => (lambda, lambda / 2.0, 2.0 * lambda),
    };
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("support radius {lambda} must be positive")));
    }
    let total: f64 = f.spectral(0).iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return Err(Error::Precondition("zero field has no Bernstein ratio".into()));
    }
    let tol = 1e-9 * lambda;
    let outside: f64 = f
        .spectral(0)
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let r = g.kmag(*i);
            r > hi + tol || (r < lo - tol && !(matches!(support, Support::Ball { .. })))
        })
        .map(|(_, v)| v.norm_sqr())
        .sum();
    if outside > 1e-24 * total {
        return Err(Error::Precondition("field is not supported where claimed".into()));
    }
    let base = f.lp_norm(p)?;
    let dk = derivative_tensor(f, k)?;
    let d = g.dim() as f64;
    let expo = k as f64 + d * (1.0 / p - 1.0 / q);
    let upper = dk.lp_norm(q)? / (lambda.powf(expo) * base);
    let lower = match support {
        Support::Annulus { .. } => Some(dk.lp_norm(p)? / (lambda.powi(k as i32) * base)),
        Support::Ball { .. } => None,
    };
    Ok(BernsteinRatio { upper, lower })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::lp::psi;

    #[test]
    fn zero_field_has_zero_norms() {
        let g = Grid::new(2, 16).unwrap();
        let s = block_norms(&Field::zeros(&g, 1), 2.0).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.0));
        assert!(block_norms(&Field::zeros(&g, 1), 0.5).is_err());
    }

    #[test]
    fn single_mode_sup_norms_telescope() {
        let g = Grid::new(1, 64).unwrap();
        let amp = 0.7;
        let k = 11.0;
        let f = Field::from_fn(&g, 1, |x, o| o[0] = amp * (k * x[0]).cos()).unwrap();
        let s = block_norms(&f, f64::INFINITY).unwrap();
        let total: f64 = s.values.iter().sum();
        assert!((total - amp).abs() < 1e-13);
        for j in s.indices() {
            let expect = amp * psi(k / 2f64.powi(j));
            assert!((s.get(j) - expect).abs() < 1e-13);
        }
        let idx = BesovIndex::new(0.0, f64::INFINITY, 1.0).unwrap();
        assert!((besov_norm(&s, idx, None, Cutoff::None).unwrap() - amp).abs() < 1e-13);
    }

    #[test]
    fn cutoffs_partition_the_r1_norm() {
        let g = Grid::new(2, 32).unwrap();
        let f = crate::random::Ensemble::new(0.5, 10).sample(&g, 1, 4).unwrap();
        let s = block_norms(&f, 2.0).unwrap();
        let idx = BesovIndex::new(1.0, 2.0, 1.0).unwrap();
        let full = besov_norm(&s, idx, None, Cutoff::None).unwrap();
        let mut prev_lo = -1.0;
        let mut prev_hi = f64::INFINITY;
        for m in s.j_min - 1..=s.j_max() {
            let lo = besov_norm(&s, idx, None, Cutoff::Low(m)).unwrap();
            let hi = besov_norm(&s, idx, None, Cutoff::High(m)).unwrap();
            assert!((lo + hi - full).abs() <= 1e-12 * full);
            assert!(lo >= prev_lo && hi <= prev_hi);
            prev_lo = lo;
            prev_hi = hi;
        }
        let bad = BesovIndex::new(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(besov_norm(&s, bad, None, Cutoff::None), Err(Error::Index(_))));
    }

    #[test]
    fn time_norms() {
        let t = [0.0, 0.5, 1.0, 1.5, 2.0];
        assert!((time_lq(&t, &[3.0; 5], 1.0, 2.0).unwrap() - 6.0).abs() < 1e-14);
        assert!((time_lq(&t, &[3.0; 5], 1.0, 1.25).unwrap() - 3.75).abs() < 1e-14);
        assert!(time_lq(&t, &[3.0; 5], 1.0, 3.0).is_err());
        assert!(time_lq(&[], &[], 1.0, 1.0).is_err());
    }

    #[test]
    fn bernstein_pure_mode_is_one() {
        let g = Grid::new(2, 32).unwrap();
        let f = Field::from_fn(&g, 1, |x, o| o[0] = (3.0 * x[0] + 4.0 * x[1]).cos()).unwrap();
        let r = bernstein_ratio(&f, 1, 2.0, 2.0, Support::Ball { lambda: 5.0 }).unwrap();
        assert!((r.upper - 1.0).abs() < 1e-12);
        let r = bernstein_ratio(&f, 1, 2.0, 2.0, Support::Annulus { lambda: 5.0 }).unwrap();
        assert!((r.lower.unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            bernstein_ratio(&f, 1, 2.0, 2.0, Support::Ball { lambda: 4.0 }),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            bernstein_ratio(&Field::zeros(&g, 1), 1, 2.0, 2.0, Support::Ball { lambda: 4.0 }),
            Err(Error::Precondition(_))
        ));
    }
}
