//! Scalar and vector fields on a periodic grid.
//!
//! A [`Field`] always carries both its grid values and its spectral
//! coefficients, kept consistent at construction. Linear combinations act on
//! both arrays directly so no transform is spent on them.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{to_physical, to_spectral, Grid};

/// Which representation of a field is authoritative.
///
/// Fields in this crate are immutable and always keep both arrays in sync, so
/// the only value ever produced is [`SyncState::Both`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyncState {
    Both,
}

#[derive(Debug, Clone)]
pub struct Field {
    grid: Grid,
    phys: Vec<Vec<f64>>,
    spec: Vec<Vec<Complex64>>,
}

fn zero_c() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl Field {
    pub fn zeros(grid: &Grid, comps: usize) -> Field {
        Field {
            grid: grid.clone(),
            phys: vec![vec![0.0; grid.len()]; comps],
            spec: vec![vec![zero_c(); grid.len()]; comps],
        }
    }

    /// Constant field with one value per component.
    pub fn constant(grid: &Grid, values: &[f64]) -> Field {
        let mut spec = vec![vec![zero_c(); grid.len()]; values.len()];
        for (c, &v) in values.iter().enumerate() {
            spec[c][0] = Complex64::new(v, 0.0);
        }
        Field { grid: grid.clone(), phys: values.iter().map(|&v| vec![v; grid.len()]).collect(), spec }
    }

    pub fn from_physical(grid: &Grid, phys: Vec<Vec<f64>>) -> Result<Field> {
        if phys.is_empty() {
            return Err(Error::Shape("field needs at least one component".into()));
        }
        let spec = phys.iter().map(|p| to_spectral(grid, p)).collect::<Result<Vec<_>>>()?;
        Ok(Field { grid: grid.clone(), phys, spec })
    }

    pub fn scalar(grid: &Grid, values: Vec<f64>) -> Result<Field> {
        Field::from_physical(grid, vec![values])
    }

    /// Samples `f(x, out)` at every grid point.
    pub fn from_fn<F>(grid: &Grid, comps: usize, f: F) -> Result<Field>
    where
        F: Fn(&[f64], &mut [f64]),
    {
        let d = grid.dim();
        let mut phys = vec![vec![0.0; grid.len()]; comps];
        let mut x = vec![0.0; d];
        let mut out = vec![0.0; comps];
        for idx in 0..grid.len() {
            grid.point(idx, &mut x);
            f(&x, &mut out);
            for c in 0..comps {
                phys[c][idx] = out[c];
            }
        }
        Field::from_physical(grid, phys)
    }

    /// Builds a real field from spectral coefficients. The coefficients are
    /// projected onto conjugate-symmetric spectra first.
    pub fn from_spectral(grid: &Grid, spec: Vec<Vec<Complex64>>) -> Result<Field> {
        if spec.is_empty() {
            return Err(Error::Shape("field needs at least one component".into()));
        }
        let mut phys = Vec::with_capacity(spec.len());
        let mut sym = Vec::with_capacity(spec.len());
        for s in &spec {
            let (p, q) = to_physical(grid, s)?;
            phys.push(p);
            sym.push(q);
        }
        Ok(Field { grid: grid.clone(), phys, spec: sym })
    }

    /// Stacks scalar fields into a vector field.
    pub fn from_components(parts: &[Field]) -> Result<Field> {
        let first = parts.first().ok_or_else(|| Error::Shape("no components".into()))?;
        let mut phys = Vec::new();
        let mut spec = Vec::new();
        for p in parts {
            if p.grid != first.grid {
                return Err(Error::Shape("components live on different grids".into()));
            }
            phys.extend(p.phys.iter().cloned());
            spec.extend(p.spec.iter().cloned());
        }
        Ok(Field { grid: first.grid.clone(), phys, spec })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn comps(&self) -> usize {
        self.phys.len()
    }

    pub fn is_scalar(&self) -> bool {
        self.comps() == 1
    }

    pub fn sync_state(&self) -> SyncState {
        SyncState::Both
    }

    pub fn physical(&self, c: usize) -> &[f64] {
        &self.phys[c]
    }

    pub fn spectral(&self, c: usize) -> &[Complex64] {
        &self.spec[c]
    }

    pub fn component(&self, c: usize) -> Field {
        Field { grid: self.grid.clone(), phys: vec![self.phys[c].clone()], spec: vec![self.spec[c].clone()] }
    }

    pub fn components(&self) -> Vec<Field> {
        (0..self.comps()).map(|c| self.component(c)).collect()
    }

    pub fn ensure_same_shape(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Shape("fields live on different grids".into()));
        }
        if self.comps() != other.comps() {
            return Err(Error::Shape(format!("{} vs {} components", self.comps(), other.comps())));
        }
        Ok(())
    }

    pub fn ensure_vector(&self) -> Result<()> {
        if self.comps() != self.grid.dim() {
            return Err(Error::Shape(format!(
                "expected a vector field with {} components, got {}",
                self.grid.dim(),
                self.comps()
            )));
        }
        Ok(())
    }

    pub fn ensure_scalar(&self) -> Result<()> {
        if !self.is_scalar() {
            return Err(Error::Shape(format!("expected a scalar field, got {} components", self.comps())));
        }
        Ok(())
    }

    /// `alpha * self + beta * other`, computed on both representations.
    pub fn lin_comb(&self, alpha: f64, other: &Field, beta: f64) -> Result<Field> {
        self.ensure_same_shape(other)?;
        let phys = self
            .phys
            .iter()
            .zip(&other.phys)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| alpha * x + beta * y).collect())
            .collect();
        let spec = self
            .spec
            .iter()
            .zip(&other.spec)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| alpha * x + beta * y).collect())
            .collect();
        Ok(Field { grid: self.grid.clone(), phys, spec })
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.lin_comb(1.0, other, -1.0)
    }

    pub fn scale(&self, alpha: f64) -> Field {
        Field {
            grid: self.grid.clone(),
            phys: self.phys.iter().map(|a| a.iter().map(|x| alpha * x).collect()).collect(),
            spec: self.spec.iter().map(|a| a.iter().map(|x| alpha * x).collect()).collect(),
        }
    }

    /// Applies a spectral multiplier `m(idx, component)` to every component.
    pub fn multiply<M>(&self, m: M) -> Field
    where
        M: Fn(usize, usize) -> Complex64,
    {
        let spec = self
            .spec
            .iter()
            .enumerate()
            .map(|(c, s)| s.iter().enumerate().map(|(i, v)| v * m(i, c)).collect())
            .collect();
        Field::from_spectral(&self.grid, spec).expect("multiplier produced non-finite coefficients")
    }

    /// Applies a real radial-type multiplier `m(idx)` to every component.
    pub fn multiply_real<M>(&self, m: M) -> Field
    where
        M: Fn(usize) -> f64,
    {
        self.multiply(|i, _| Complex64::new(m(i), 0.0))
    }

    /// Mean of component `c` over the torus.
    pub fn mean(&self, c: usize) -> f64 {
        self.spec[c][0].re
    }

    pub fn means(&self) -> Vec<f64> {
        (0..self.comps()).map(|c| self.mean(c)).collect()
    }

    pub fn remove_mean(&self) -> Field {
        self.multiply_real(|i| if i == 0 { 0.0 } else { 1.0 })
    }

    /// Partial derivative along `axis`, with the Nyquist mode set to zero.
    pub fn derivative(&self, axis: usize) -> Field {
        let g = &self.grid;
        self.multiply(|i, _| {
            if g.is_nyquist(i, axis) {
                zero_c()
            } else {
                Complex64::new(0.0, g.xi(i, axis))
            }
        })
    }

    /// Gradient of a scalar field.
    pub fn gradient(&self) -> Result<Field> {
        self.ensure_scalar()?;
        let parts: Vec<Field> = (0..self.grid.dim()).map(|a| self.derivative(a)).collect();
        Field::from_components(&parts)
    }

    /// Divergence of a vector field.
    pub fn divergence(&self) -> Result<Field> {
        self.ensure_vector()?;
        let g = &self.grid;
        let mut spec = vec![zero_c(); g.len()];
        for (a, s) in self.spec.iter().enumerate() {
            for (i, v) in s.iter().enumerate() {
                if !g.is_nyquist(i, a) {
                    spec[i] += v * Complex64::new(0.0, g.xi(i, a));
                }
            }
        }
        Field::from_spectral(g, vec![spec])
    }

    /// Componentwise Laplacian.
    pub fn laplacian(&self) -> Field {
        let g = &self.grid;
        self.multiply_real(|i| -g.kmag(i).powi(2))
    }

    /// Spectral truncation to the modes kept by the 2/3 rule.
    pub fn dealias(&self) -> Field {
        let g = &self.grid;
        self.multiply_real(|i| if g.keeps_mode(i) { 1.0 } else { 0.0 })
    }

    /// Whether all energy sits in modes kept by the 2/3 rule.
    pub fn is_dealiased(&self) -> bool {
        self.spec.iter().all(|s| s.iter().enumerate().all(|(i, v)| self.grid.keeps_mode(i) || *v == zero_c()))
    }

    fn truncated_physical(&self, c: usize) -> Vec<f64> {
        if self.is_dealiased() {
            return self.phys[c].clone();
        }
        let g = &self.grid;
        let mut buf: Vec<Complex64> =
            self.spec[c].iter().enumerate().map(|(i, v)| if g.keeps_mode(i) { *v } else { zero_c() }).collect();
        g.fft(&mut buf, true);
        buf.into_iter().map(|v| v.re).collect()
    }

    fn from_products(grid: &Grid, phys: Vec<Vec<f64>>) -> Result<Field> {
        let spec = phys
            .iter()
            .map(|p| {
                let mut s = to_spectral(grid, p)?;
                for (i, v) in s.iter_mut().enumerate() {
                    if !grid.keeps_mode(i) {
                        *v = zero_c();
                    }
                }
                Ok(s)
            })
            .collect::<Result<Vec<_>>>()?;
        Field::from_spectral(grid, spec)
    }

    /// Dealiased pointwise product. A scalar may multiply a field of any
    /// shape; otherwise both factors must have the same number of components
    /// and the product is taken componentwise.
    pub fn product(&self, other: &Field) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::Shape("fields live on different grids".into()));
        }
        let (s, o) = (self.comps(), other.comps());
        let comps = if s == 1 { o } else if o == 1 || o == s { s } else {
            return Err(Error::Shape(format!("cannot multiply {s} by {o} components")));
        };
        let lhs: Vec<Vec<f64>> = (0..s).map(|c| self.truncated_physical(c)).collect();
        let rhs: Vec<Vec<f64>> = (0..o).map(|c| other.truncated_physical(c)).collect();
        let phys = (0..comps)
            .map(|c| {
                let a = &lhs[if s == 1 { 0 } else { c }];
                let b = &rhs[if o == 1 { 0 } else { c }];
                a.iter().zip(b).map(|(x, y)| x * y).collect()
            })
            .collect();
        Field::from_products(&self.grid, phys)
    }

    /// Dealiased pointwise dot product of two vector fields.
    pub fn dot(&self, other: &Field) -> Result<Field> {
        self.ensure_same_shape(other)?;
        let n = self.grid.len();
        let mut acc = vec![0.0; n];
        for c in 0..self.comps() {
            let a = self.truncated_physical(c);
            let b = other.truncated_physical(c);
            for i in 0..n {
                acc[i] += a[i] * b[i];
            }
        }
        Field::from_products(&self.grid, vec![acc])
    }

    /// Dealiased `v·∇` applied componentwise to `self`.
    pub fn advected_by(&self, v: &Field) -> Result<Field> {
        v.ensure_vector()?;
        if self.grid != v.grid {
            return Err(Error::Shape("fields live on different grids".into()));
        }
        let n = self.grid.len();
        let vs: Vec<Vec<f64>> = (0..v.comps()).map(|a| v.truncated_physical(a)).collect();
        let mut phys = vec![vec![0.0; n]; self.comps()];
        for a in 0..self.grid.dim() {
            let da = self.dealias().derivative(a);
            for (c, out) in phys.iter_mut().enumerate() {
                let d = da.physical(c);
                for i in 0..n {
                    out[i] += vs[a][i] * d[i];
                }
            }
        }
        Field::from_products(&self.grid, phys)
    }

    /// Pointwise Euclidean magnitude at every grid point.
    pub fn magnitude(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| self.phys.iter().map(|p| p[i] * p[i]).sum::<f64>().sqrt())
            .collect()
    }

    /// Grid `L^p` norm with the torus measure, `((L/N)^d Σ|f|^p)^{1/p}`.
    /// Vector fields use the pointwise Euclidean magnitude. `p = ∞` is
    /// passed as `f64::INFINITY`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::Domain(format!("L^p exponent {p} below 1")));
        }
        let mag = self.magnitude();
        if p.is_infinite() {
            return Ok(mag.iter().fold(0.0, |m, &v| m.max(v)));
        }
        let cell = self.grid.spacing().powi(self.grid.dim() as i32);
        let mx = mag.iter().fold(0.0f64, |m, &v| m.max(v));
        if mx == 0.0 {
            return Ok(0.0);
        }
        let sum: f64 = mag.iter().map(|&v| (v / mx).powf(p)).sum();
        Ok(mx * (cell * sum).powf(1.0 / p))
    }

    /// `L²` norm from the spectral coefficients (Plancherel).
    pub fn l2_spectral(&self) -> f64 {
        let s: f64 = self.spec.iter().flat_map(|c| c.iter()).map(|v| v.norm_sqr()).sum();
        (self.grid.volume() * s).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.phys.iter().flat_map(|c| c.iter()).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Integral over the torus of each component.
    pub fn integral(&self) -> Vec<f64> {
        let vol = self.grid.volume();
        (0..self.comps()).map(|c| vol * self.mean(c)).collect()
    }

    /// Spectral transfer onto a grid of another resolution. Modes that do not
    /// fit strictly inside the smaller Nyquist band are dropped.
    pub fn resample(&self, target: &Grid) -> Result<Field> {
        if target.dim() != self.grid.dim() || target.length() != self.grid.length() {
            return Err(Error::Shape("resampling needs the same torus".into()));
        }
        let half = (self.grid.n().min(target.n()) / 2) as i32;
        let spec = self
            .spec
            .iter()
            .map(|s| {
                let mut out = vec![zero_c(); target.len()];
                for (i, v) in s.iter().enumerate() {
                    let k = self.grid.kvec(i);
                    if k.iter().all(|&ka| ka.abs() < half) {
                        out[target.index_of(k).expect("mode fits")] = *v;
                    }
                }
                out
            })
            .collect();
        Field::from_spectral(target, spec)
    }

    /// Largest coefficient magnitude at or beyond a spectral radius.
    pub fn spectral_mass_outside(&self, radius: f64) -> f64 {
        let mut m = 0.0f64;
        for s in &self.spec {
            for (i, v) in s.iter().enumerate() {
                if self.grid.kmag(i) > radius {
                    m = m.max(v.norm());
                }
            }
        }
        m
    }
}
