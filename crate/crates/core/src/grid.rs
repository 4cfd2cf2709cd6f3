//! Uniform periodic grids and the multidimensional FFT used by every field.
//!
//! Spectral coefficients follow the convention `f(x) = Σ_k f̂(k) e^{i ξ_k·x}`
//! with `ξ_k = 2πk/L`, so the forward transform divides by the number of
//! grid points and a constant field `c` has `f̂(0) = c`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Plain description of a grid, used for configuration files and checkpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub points_per_dim: usize,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_dealias")]
    pub dealias_fraction: f64,
}

fn default_length() -> f64 {
    2.0 * PI
}

fn default_dealias() -> f64 {
    1.0
}

impl GridSpec {
    pub fn new(dim: usize, points_per_dim: usize) -> Self {
        GridSpec { dim, points_per_dim, length: default_length(), dealias_fraction: 1.0 }
    }
}

struct Inner {
    spec: GridSpec,
    total: usize,
    kvec: Vec<i32>,
    kmag: Vec<f64>,
    neg: Vec<usize>,
    keep: Vec<bool>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

/// A `d`-dimensional periodic grid with `N` points per direction.
///
/// Cloning is cheap; the wavenumber tables and FFT plans are shared.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<Inner>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.inner.spec).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.spec == other.inner.spec
    }
}

impl Grid {
    /// Grid on the torus of period 2π with the full dyadic range.
    pub fn new(dim: usize, points_per_dim: usize) -> Result<Grid> {
        Grid::from_spec(GridSpec::new(dim, points_per_dim))
    }

    pub fn from_spec(spec: GridSpec) -> Result<Grid> {
        let GridSpec { dim, points_per_dim: n, length, dealias_fraction } = spec;
        if !(1..=3).contains(&dim) {
            return Err(Error::Shape(format!("dimension {dim} not in 1..=3")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Shape(format!("points per dimension {n} must be a power of two >= 8")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Domain(format!("torus length {length} must be positive")));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(Error::Domain(format!("dealias fraction {dealias_fraction} not in (0,1]")));
        }
        if dealias_fraction * (n as f64) / 2.0 < 1.0 {
            return Err(Error::Domain("dealias fraction leaves no dyadic block".into()));
        }
        let total = n.pow(dim as u32);
        let mut kvec = vec![0i32; total * dim];
        let mut kmag = vec![0.0; total];
        let mut neg = vec![0usize; total];
        let mut keep = vec![true; total];
        let scale = 2.0 * PI / length;
        let third = (n / 3) as i32;
        for idx in 0..total {
            let mut rem = idx;
            let mut sq = 0.0;
            let mut nidx = 0usize;
            let mut digits = [0usize; 3];
            for a in (0..dim).rev() {
                digits[a] = rem % n;
                rem /= n;
            }
            for a in 0..dim {
                let i = digits[a];
                let k = if i < n / 2 { i as i32 } else { i as i32 - n as i32 };
                kvec[idx * dim + a] = k;
                let xi = scale * k as f64;
                sq += xi * xi;
                nidx = nidx * n + (n - i) % n;
                if k.abs() > third {
                    keep[idx] = false;
                }
            }
            kmag[idx] = sq.sqrt();
            neg[idx] = nidx;
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Grid { inner: Arc::new(Inner { spec, total, kvec, kmag, neg, keep, fwd, inv }) })
    }

    pub fn spec(&self) -> GridSpec {
        self.inner.spec
    }

    pub fn dim(&self) -> usize {
        self.inner.spec.dim
    }

    /// Points per dimension `N`.
    pub fn n(&self) -> usize {
        self.inner.spec.points_per_dim
    }

    pub fn length(&self) -> f64 {
        self.inner.spec.length
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.inner.spec.dealias_fraction
    }

    /// Total number of grid points `N^d`.
    pub fn len(&self) -> usize {
        self.inner.total
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume of the torus, `L^d`.
    pub fn volume(&self) -> f64 {
        self.length().powi(self.dim() as i32)
    }

    /// Grid spacing `L/N`.
    pub fn spacing(&self) -> f64 {
        self.length() / self.n() as f64
    }

    /// Lowest dyadic block index.
    pub fn j_min(&self) -> i32 {
        0
    }

    /// Highest dyadic block index, `floor(log2(dealias_fraction * N / 2))`.
    pub fn j_max(&self) -> i32 {
        (self.dealias_fraction() * self.n() as f64 / 2.0).log2().floor() as i32
    }

    /// Radius below which the dyadic blocks form a partition of unity.
    pub fn resolved_radius(&self) -> f64 {
        2f64.powi(self.j_max())
    }

    /// Integer wavenumber vector of a flat spectral index.
    pub fn kvec(&self, idx: usize) -> &[i32] {
        let d = self.dim();
        &self.inner.kvec[idx * d..(idx + 1) * d]
    }

    /// Physical wavenumber `ξ_a = 2πk_a/L`.
    pub fn xi(&self, idx: usize, axis: usize) -> f64 {
        2.0 * PI / self.length() * self.kvec(idx)[axis] as f64
    }

    /// Euclidean norm `|ξ|` of the physical wavenumber.
    pub fn kmag(&self, idx: usize) -> f64 {
        self.inner.kmag[idx]
    }

    /// Flat index of the wavenumber `-k`.
    pub fn neg_index(&self, idx: usize) -> usize {
        self.inner.neg[idx]
    }

    /// Whether component `axis` of the wavenumber is the Nyquist frequency.
    pub fn is_nyquist(&self, idx: usize, axis: usize) -> bool {
        self.kvec(idx)[axis] == -(self.n() as i32 / 2)
    }

    /// Whether the mode survives the 2/3 truncation rule.
    pub fn keeps_mode(&self, idx: usize) -> bool {
        self.inner.keep[idx]
    }

    /// Largest integer wavenumber per axis kept by the 2/3 rule.
    pub fn dealias_cutoff(&self) -> usize {
        self.n() / 3
    }

    /// Flat index of an integer wavenumber, if it lies on the grid.
    pub fn index_of(&self, k: &[i32]) -> Option<usize> {
        let n = self.n() as i32;
        if k.len() != self.dim() {
            return None;
        }
        let mut idx = 0usize;
        for &ka in k {
            if ka < -n / 2 || ka >= n / 2 {
                return None;
            }
            idx = idx * self.n() + ka.rem_euclid(n) as usize;
        }
        Some(idx)
    }

    /// Physical coordinates of grid point `idx`.
    pub fn point(&self, idx: usize, out: &mut [f64]) {
        let n = self.n();
        let h = self.spacing();
        let mut rem = idx;
        for a in (0..self.dim()).rev() {
            out[a] = (rem % n) as f64 * h;
            rem /= n;
        }
    }

    /// All grid point coordinates, flattened point-major.
    pub fn points(&self) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; self.len() * d];
        for idx in 0..self.len() {
            self.point(idx, &mut out[idx * d..(idx + 1) * d]);
        }
        out
    }

    /// Grid with the same torus and dimension but a different resolution.
    pub fn with_points(&self, n: usize) -> Result<Grid> {
        Grid::from_spec(GridSpec { points_per_dim: n, ..self.spec() })
    }

    /// In-place multidimensional FFT; the forward direction is normalized by `N^d`.
    pub fn fft(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n();
        let d = self.dim();
        assert_eq!(data.len(), self.len());
        let plan = if inverse { &self.inner.inv } else { &self.inner.fwd };
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for axis in 0..d {
            let stride = n.pow((d - 1 - axis) as u32);
            if stride == 1 {
                plan.process_with_scratch(data, &mut scratch);
                continue;
            }
            let outer = self.len() / (n * stride);
            let mut lines = vec![Complex64::new(0.0, 0.0); self.len()];
            let mut line = 0;
            for o in 0..outer {
                for t in 0..stride {
                    let base = o * n * stride + t;
                    for i in 0..n {
                        lines[line * n + i] = data[base + i * stride];
                    }
                    line += 1;
                }
            }
            plan.process_with_scratch(&mut lines, &mut scratch);
            line = 0;
            for o in 0..outer {
                for t in 0..stride {
                    let base = o * n * stride + t;
                    for i in 0..n {
                        data[base + i * stride] = lines[line * n + i];
                    }
                    line += 1;
                }
            }
        }
        if !inverse {
            let s = 1.0 / self.len() as f64;
            for v in data.iter_mut() {
                *v *= s;
            }
        }
    }
}

/// Spectral coefficients of real grid values.
pub fn to_spectral(grid: &Grid, physical: &[f64]) -> Result<Vec<Complex64>> {
    if physical.len() != grid.len() {
        return Err(Error::Shape(format!("expected {} values, got {}", grid.len(), physical.len())));
    }
    if let Some(v) = physical.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("physical value {v}")));
    }
    let mut buf: Vec<Complex64> = physical.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.fft(&mut buf, false);
    Ok(buf)
}

/// Real grid values of spectral coefficients, after projecting onto
/// conjugate-symmetric spectra. The symmetrized spectrum is returned alongside.
pub fn to_physical(grid: &Grid, spectral: &[Complex64]) -> Result<(Vec<f64>, Vec<Complex64>)> {
    if spectral.len() != grid.len() {
        return Err(Error::Shape(format!("expected {} coefficients, got {}", grid.len(), spectral.len())));
    }
    if let Some(v) = spectral.iter().find(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Numerical(format!("spectral coefficient {v}")));
    }
    let sym: Vec<Complex64> =
        (0..grid.len()).map(|i| 0.5 * (spectral[i] + spectral[grid.neg_index(i)].conj())).collect();
    let mut buf = sym.clone();
    grid.fft(&mut buf, true);
    Ok((buf.into_iter().map(|c| c.re).collect(), sym))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::new(2, 12).is_err());
        assert!(Grid::new(2, 4).is_err());
        assert!(Grid::new(4, 8).is_err());
        assert!(Grid::from_spec(GridSpec { dealias_fraction: 0.0, ..GridSpec::new(2, 16) }).is_err());
    }

    #[test]
    fn dyadic_range() {
        let g = Grid::new(2, 64).unwrap();
        assert_eq!(g.j_min(), 0);
        assert_eq!(g.j_max(), 5);
        let g = Grid::from_spec(GridSpec { dealias_fraction: 0.5, ..GridSpec::new(1, 64) }).unwrap();
        assert_eq!(g.j_max(), 4);
    }

    #[test]
    fn wavenumber_tables() {
        let g = Grid::new(2, 8).unwrap();
        let idx = g.index_of(&[1, -2]).unwrap();
        assert_eq!(g.kvec(idx), &[1, -2]);
        assert_eq!(g.kvec(g.neg_index(idx)), &[-1, 2]);
        assert!((g.kmag(idx) - 5f64.sqrt()).abs() < 1e-15);
        let nyq = g.index_of(&[-4, 0]).unwrap();
        assert!(g.is_nyquist(nyq, 0));
        assert_eq!(g.neg_index(nyq), nyq);
        assert!(!g.keeps_mode(nyq));
    }

    #[test]
    fn constant_and_cosine_transforms() {
        let g = Grid::new(2, 16).unwrap();
        let c = to_spectral(&g, &vec![2.5; g.len()]).unwrap();
        assert!((c[0].re - 2.5).abs() < 1e-14);
        assert!(c.iter().skip(1).all(|v| v.norm() < 1e-14));

        let pts = g.points();
        let vals: Vec<f64> = (0..g.len()).map(|i| (3.0 * pts[2 * i] + pts[2 * i + 1]).cos()).collect();
        let s = to_spectral(&g, &vals).unwrap();
        let a = g.index_of(&[3, 1]).unwrap();
        let b = g.index_of(&[-3, -1]).unwrap();
        assert!((s[a] - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert!((s[b] - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        for (i, v) in s.iter().enumerate() {
            if i != a && i != b {
                assert!(v.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_non_finite() {
        let g = Grid::new(1, 8).unwrap();
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(matches!(to_spectral(&g, &v), Err(Error::Numerical(_))));
    }
}
