//! Trigonometric interpolation of fields at arbitrary points.
//!
//! Large evaluations go through a type-2 nonuniform FFT with a Gaussian
//! spreading kernel on a twice-oversampled grid; small grids fall back to
//! direct summation of the Fourier series.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{Grid, GridSpec};

const OVERSAMPLE: usize = 2;

/// Half-width of the spreading window in oversampled cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Accuracy(pub usize);

impl Default for Accuracy {
    fn default() -> Self {
        Accuracy(12)
    }
}

enum Kind {
    Direct,
    Gridded { fine: Grid, values: Vec<Vec<f64>>, tau: f64, spread: usize },
}

/// Evaluates the band-limited interpolant of a field anywhere on the torus.
pub struct Interpolator {
    grid: Grid,
    spec: Vec<Vec<Complex64>>,
    kind: Kind,
}

impl Interpolator {
    pub fn new(f: &Field) -> Result<Self> {
        Interpolator::with_accuracy(f, Accuracy::default())
    }

    pub fn with_accuracy(f: &Field, acc: Accuracy) -> Result<Self> {
        let grid = f.grid().clone();
        let spec: Vec<Vec<Complex64>> = (0..f.comps()).map(|c| f.spectral(c).to_vec()).collect();
        let n = grid.n();
        let m = OVERSAMPLE * n;
        let spread = acc.0.max(2);
        if 2 * spread + 1 > m || n < 32 {
            return Ok(Interpolator { grid, spec, kind: Kind::Direct });
        }
        let tau = PI * spread as f64 / ((n * n) as f64 * OVERSAMPLE as f64 * (OVERSAMPLE as f64 - 0.5));
        let fine = Grid::from_spec(GridSpec { points_per_dim: m, ..grid.spec() })?;
        let d = grid.dim();
        let gk = |k: i32| (tau / PI).sqrt() * (-(k as f64).powi(2) * tau).exp();
        let values = spec
            .iter()
            .map(|s| {
                let mut buf = vec![Complex64::new(0.0, 0.0); fine.len()];
                for (i, v) in s.iter().enumerate() {
                    let k = grid.kvec(i);
                    let denom: f64 = (0..d).map(|a| gk(k[a])).product();
                    buf[fine.index_of(k).expect("coarse mode fits")] = v / denom;
                }
                fine.fft(&mut buf, true);
                buf.into_iter().map(|c| c.re).collect()
            })
            .collect();
        Ok(Interpolator { grid, spec, kind: Kind::Gridded { fine, values, tau, spread } })
    }

    pub fn comps(&self) -> usize {
        self.spec.len()
    }

    /// Values of every component at the points, flattened point-major
    /// (`points.len() == npts * d`). Output is indexed `[component][point]`.
    pub fn eval(&self, points: &[f64]) -> Result<Vec<Vec<f64>>> {
        let d = self.grid.dim();
        if points.len() % d != 0 {
            return Err(Error::Shape(format!("{} coordinates for dimension {d}", points.len())));
        }
        if let Some(v) = points.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("interpolation point {v}")));
        }
        let npts = points.len() / d;
        let comps = self.comps();
        let rows: Vec<Vec<f64>> = (0..npts)
            .into_par_iter()
            .with_min_len(64)
            .map(|p| {
                let x = &points[p * d..(p + 1) * d];
                match &self.kind {
                    Kind::Direct => self.direct(x),
                    Kind::Gridded { fine, values, tau, spread } => gridded(fine, values, *tau, *spread, self.grid.length(), x),
                }
            })
            .collect();
        let mut out = vec![vec![0.0; npts]; comps];
        for (p, row) in rows.into_iter().enumerate() {
            for c in 0..comps {
                out[c][p] = row[c];
            }
        }
        Ok(out)
    }

    fn direct(&self, x: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let d = g.dim();
        let n = g.n();
        let scale = 2.0 * PI / g.length();
        let phases: Vec<Vec<Complex64>> = (0..d)
            .map(|a| {
                (0..n)
                    .map(|i| {
                        let k = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
                        Complex64::from_polar(1.0, scale * k * x[a])
                    })
                    .collect()
            })
            .collect();
        let mut out = vec![0.0; self.comps()];
        for idx in 0..g.len() {
            let mut rem = idx;
            let mut e = Complex64::new(1.0, 0.0);
            for a in (0..d).rev() {
                e *= phases[a][rem % n];
                rem /= n;
            }
            for (c, s) in self.spec.iter().enumerate() {
                out[c] += (s[idx] * e).re;
            }
        }
        out
    }
}

fn gridded(fine: &Grid, values: &[Vec<f64>], tau: f64, spread: usize, length: f64, x: &[f64]) -> Vec<f64> {
    let d = fine.dim();
    let m = fine.n();
    let h = 2.0 * PI / m as f64;
    let width = 2 * spread;
    let mut idx = [[0usize; 64]; 3];
    let mut w = [[0.0f64; 64]; 3];
    for a in 0..d {
        let y = (x[a] * 2.0 * PI / length).rem_euclid(2.0 * PI);
        let base = (y / h).floor() as i64 - spread as i64 + 1;
        for l in 0..width {
            let node = base + l as i64;
            let diff = y - node as f64 * h;
            w[a][l] = (-diff * diff / (4.0 * tau)).exp();
            idx[a][l] = node.rem_euclid(m as i64) as usize;
        }
    }
    let norm = 1.0 / (m as f64).powi(d as i32);
    let mut out = vec![0.0; values.len()];
    for (c, vals) in values.iter().enumerate() {
        let mut s = 0.0;
        match d {
            1 => {
                for l in 0..width {
                    s += w[0][l] * vals[idx[0][l]];
                }
            }
            2 => {
                for l0 in 0..width {
                    let row = idx[0][l0] * m;
                    let mut t = 0.0;
                    for l1 in 0..width {
                        t += w[1][l1] * vals[row + idx[1][l1]];
                    }
                    s += w[0][l0] * t;
                }
            }
            _ => {
                for l0 in 0..width {
                    let plane = idx[0][l0] * m * m;
                    let mut t0 = 0.0;
                    for l1 in 0..width {
                        let row = plane + idx[1][l1] * m;
                        let mut t1 = 0.0;
                        for l2 in 0..width {
                            t1 += w[2][l2] * vals[row + idx[2][l2]];
                        }
                        t0 += w[1][l1] * t1;
                    }
                    s += w[0][l0] * t0;
                }
            }
        }
        out[c] = s * norm;
    }
    out
}
