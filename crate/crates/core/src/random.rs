//! Seeded random band-limited fields.
//!
//! Modes are drawn from one ChaCha stream in a fixed canonical order over the
//! box `[-K, K]^d`, so the same seed and box give the same function on every
//! grid that resolves the box.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Parameters of a random field with a power-law spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ensemble {
    /// Spectral amplitude decays like `|k|^{-(decay + d/2)}`.
    pub decay: f64,
    /// Largest integer wavenumber per axis that may be excited.
    pub box_radius: i32,
    /// Smallest Euclidean integer wavenumber that may be excited.
    pub min_radius: f64,
    /// Largest Euclidean integer wavenumber that may be excited.
    pub max_radius: f64,
}

impl Ensemble {
    pub fn new(decay: f64, box_radius: i32) -> Self {
        Ensemble { decay, box_radius, min_radius: 0.5, max_radius: f64::INFINITY }
    }

    pub fn annulus(decay: f64, lo: f64, hi: f64) -> Self {
        Ensemble { decay, box_radius: hi.ceil() as i32, min_radius: lo, max_radius: hi }
    }

    /// Draws `comps` components from `seed`.
    pub fn sample(&self, grid: &Grid, comps: usize, seed: u64) -> Result<Field> {
        let d = grid.dim();
        let kk = self.box_radius;
        if kk < 1 || 2 * kk >= grid.n() as i32 {
            return Err(Error::Domain(format!("box radius {kk} does not fit a grid of {} points", grid.n())));
        }
        let mut r = rng(seed);
        let side = (2 * kk + 1) as usize;
        let count = side.pow(d as u32);
        let mut spec = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; comps];
        let mut k = vec![0i32; d];
        for c in 0..comps {
            for flat in 0..count {
                let mut rem = flat;
                for a in (0..d).rev() {
                    k[a] = (rem % side) as i32 - kk;
                    rem /= side;
                }
                let re: f64 = StandardNormal.sample(&mut r);
                let im: f64 = StandardNormal.sample(&mut r);
                let first_nonzero = k.iter().find(|&&v| v != 0).copied().unwrap_or(0);
                if first_nonzero <= 0 {
                    continue;
                }
                let mag = (k.iter().map(|&v| (v * v) as f64).sum::<f64>()).sqrt();
                if mag < self.min_radius || mag > self.max_radius {
                    continue;
                }
                let amp = mag.powf(-(self.decay + d as f64 / 2.0));
                let v = Complex64::new(re, im) * amp;
                let idx = grid.index_of(&k).expect("box fits grid");
                let neg: Vec<i32> = k.iter().map(|v| -v).collect();
                let nidx = grid.index_of(&neg).expect("box fits grid");
                spec[c][idx] = v;
                spec[c][nidx] = v.conj();
            }
        }
        Field::from_spectral(grid, spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_function_on_finer_grids() {
        let g = Grid::new(2, 16).unwrap();
        let fine = g.with_points(32).unwrap();
        let e = Ensemble::new(1.0, 5);
        let a = e.sample(&g, 1, 7).unwrap();
        let b = e.sample(&fine, 1, 7).unwrap();
        assert!(a.resample(&fine).unwrap().sub(&b).unwrap().max_abs() < 1e-13);
        assert!(a.mean(0).abs() < 1e-15);
    }

    #[test]
    fn seeds_differ_and_repeat() {
        let g = Grid::new(1, 32).unwrap();
        let e = Ensemble::new(0.0, 8);
        let a = e.sample(&g, 1, 1).unwrap();
        let b = e.sample(&g, 1, 1).unwrap();
        let c = e.sample(&g, 1, 2).unwrap();
        assert_eq!(a.physical(0), b.physical(0));
        assert!(a.sub(&c).unwrap().max_abs() > 1e-3);
    }

    #[test]
    fn annulus_support() {
        let g = Grid::new(2, 32).unwrap();
        let f = Ensemble::annulus(0.0, 4.0, 8.0).sample(&g, 1, 3).unwrap();
        for (i, v) in f.spectral(0).iter().enumerate() {
            let r = g.kmag(i);
            if r < 4.0 || r > 8.0 {
                assert_eq!(v.norm(), 0.0);
            }
        }
        assert!(Ensemble::new(0.0, 16).sample(&g, 1, 0).is_err());
    }
}
