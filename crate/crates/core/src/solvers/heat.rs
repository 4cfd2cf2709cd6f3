//! Heat and Lamé flows, integrated exactly mode by mode.
//!
//! Forcing is taken piecewise linear in time between its samples, so the
//! Duhamel integral over each step is evaluated in closed form.

use num_complex::Complex64;

use super::pressure::Viscosity;
use super::time_grid;
use super::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::field::Field;

/// Time-dependent source term.
#[derive(Debug, Clone)]
pub enum Forcing {
    None,
    Steady(Field),
    /// Samples joined linearly in time; constant past the last sample.
    Sampled { times: Vec<f64>, fields: Vec<Field> },
}

impl Forcing {
    pub fn at(&self, t: f64) -> Result<Option<Field>> {
        match self {
            Forcing::None => Ok(None),
            Forcing::Steady(f) => Ok(Some(f.clone())),
            Forcing::Sampled { times, fields } => {
                if times.is_empty() || times.len() != fields.len() {
                    return Err(Error::Data("forcing samples missing or mismatched".into()));
                }
                if t <= times[0] {
                    return Ok(Some(fields[0].clone()));
                }
                let i = times.partition_point(|&s| s <= t);
                if i >= times.len() {
                    return Ok(Some(fields[times.len() - 1].clone()));
                }
                let th = (t - times[i - 1]) / (times[i] - times[i - 1]);
                Ok(Some(fields[i - 1].lin_comb(1.0 - th, &fields[i], th)?))
            }
        }
    }

    pub fn from_trajectory(traj: &Trajectory, slot: &str) -> Result<Forcing> {
        Ok(Forcing::Sampled { times: traj.times().to_vec(), fields: traj.series(slot)?.into_iter().cloned().collect() })
    }
}

/// `(1 − e^{−z})/z` and `(z − 1 + e^{−z})/z²`, accurate for small `z`.
fn etd_weights(z: f64) -> (f64, f64) {
    if z.abs() < 1e-2 {
        let (mut w1, mut w2) = (0.0, 0.0);
        let mut term = 1.0;
        for n in 0..10 {
            term /= (n + 1) as f64;
            w1 += term;
            w2 += term / (n + 2) as f64;
            term *= -z;
        }
        (w1, w2)
    } else {
        let em = (-z).exp_m1();
        (-em / z, (z + em) / (z * z))
    }
}

/// One exact step of `∂_t v = −c v + f` over `h` with `f` linear from `f0`
/// to `f1`.
fn scalar_step(v: Complex64, f0: Complex64, f1: Complex64, c: f64, h: f64) -> Complex64 {
    let z = c * h;
    let (w1, w2) = etd_weights(z);
    v * (-z).exp() + h * (w1 * f0 + w2 * (f1 - f0))
}

/// Decay rates of the divergence-free and gradient parts.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Rates {
    pub solenoidal: f64,
    pub gradient: Option<f64>,
}

impl Rates {
    pub fn heat(mu: f64) -> Self {
        Rates { solenoidal: mu, gradient: None }
    }

    pub fn lame(v: &Viscosity) -> Self {
        Rates { solenoidal: v.mu, gradient: Some(v.compressive()) }
    }
}

/// Exact step of `∂_t u = 𝒜u + f` on spectral arrays.
pub(crate) fn step_modes(
    u: &Field,
    f0: Option<&Field>,
    f1: Option<&Field>,
    rates: Rates,
    h: f64,
) -> Result<Field> {
    let g = u.grid();
    let d = g.dim();
    let comps = u.comps();
    let zero = Complex64::new(0.0, 0.0);
    let get = |f: Option<&Field>, c: usize, i: usize| f.map_or(zero, |f| f.spectral(c)[i]);
    let mut out = vec![vec![zero; g.len()]; comps];
    match rates.gradient {
        None => {
            for c in 0..comps {
                for i in 0..g.len() {
                    let k2 = g.kmag(i).powi(2);
                    out[c][i] = scalar_step(u.spectral(c)[i], get(f0, c, i), get(f1, c, i), rates.solenoidal * k2, h);
                }
            }
        }
        Some(grad) => {
            u.ensure_vector()?;
            let mut xi = vec![0.0; d];
            for i in 0..g.len() {
                let k2 = g.kmag(i).powi(2);
                for (a, x) in xi.iter_mut().enumerate() {
                    *x = g.xi(i, a);
                }
                let split = |f: Option<&Field>| -> (Vec<Complex64>, Vec<Complex64>) {
                    let v: Vec<Complex64> = (0..d).map(|a| get(f, a, i)).collect();
                    if k2 == 0.0 {
                        return (v, vec![zero; d]);
                    }
                    let dot: Complex64 = (0..d).map(|a| v[a] * xi[a]).sum();
                    let q: Vec<Complex64> = (0..d).map(|a| dot * (xi[a] / k2)).collect();
                    ((0..d).map(|a| v[a] - q[a]).collect(), q)
                };
                let (up, uq) = split(Some(u));
                let (ap, aq) = split(f0);
                let (bp, bq) = split(f1);
                for a in 0..d {
                    out[a][i] = scalar_step(up[a], ap[a], bp[a], rates.solenoidal * k2, h)
                        + scalar_step(uq[a], aq[a], bq[a], grad * k2, h);
                }
            }
        }
    }
    Field::from_spectral(g, out)
}

fn propagate(u0: &Field, forcing: &Forcing, rates: Rates, horizon: f64, dt: f64) -> Result<Trajectory> {
    let times = time_grid(horizon, dt)?;
    let mut traj = Trajectory::new(u0.grid(), &["u"]);
    traj.push(0.0, vec![u0.clone()])?;
    if matches!(forcing, Forcing::None) {
        for &t in &times[1..] {
            traj.push(t, vec![step_modes(u0, None, None, rates, t)?])?;
        }
        return Ok(traj);
    }
    let mut u = u0.clone();
    let mut f_prev = forcing.at(0.0)?;
    for w in times.windows(2) {
        let f_next = forcing.at(w[1])?;
        u = step_modes(&u, f_prev.as_ref(), f_next.as_ref(), rates, w[1] - w[0])?;
        traj.push(w[1], vec![u.clone()])?;
        f_prev = f_next;
    }
    Ok(traj)
}

/// Solves `∂_t u − μΔu = f` componentwise.
pub fn heat_solve(u0: &Field, forcing: &Forcing, mu: f64, horizon: f64, dt: f64) -> Result<Trajectory> {
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("diffusivity {mu} must be positive")));
    }
    propagate(u0, forcing, Rates::heat(mu), horizon, dt)
}

/// Solves `∂_t u − μΔu − (μ+λ)∇div u = f` by evolving the divergence-free
/// and gradient parts with their own rates.
pub fn lame_solve(u0: &Field, forcing: &Forcing, visc: Viscosity, horizon: f64, dt: f64) -> Result<Trajectory> {
    visc.check()?;
    u0.ensure_vector()?;
    propagate(u0, forcing, Rates::lame(&visc), horizon, dt)
}

/// Exact Lamé propagator over `h` without forcing.
pub fn lame_propagate(u: &Field, visc: Viscosity, h: f64) -> Result<Field> {
    step_modes(u, None, None, Rates::lame(&visc), h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::lp::helmholtz_project;
    use crate::random::Ensemble;

    #[test]
    fn single_mode_decay_is_exact() {
        let g = Grid::new(2, 16).unwrap();
        let u0 = Field::from_fn(&g, 1, |x, o| o[0] = (2.0 * x[0] - x[1]).cos()).unwrap();
        let traj = heat_solve(&u0, &Forcing::None, 0.7, 1.0, 0.1).unwrap();
        let idx = g.index_of(&[2, -1]).unwrap();
        for (i, &t) in traj.times().iter().enumerate() {
            let got = traj.field("u", i).unwrap().spectral(0)[idx].re;
            let want = 0.5 * (-0.7 * 5.0 * t).exp();
            assert!((got - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn constant_forcing_duhamel() {
        let g = Grid::new(1, 16).unwrap();
        let f = Field::from_fn(&g, 1, |x, o| o[0] = (3.0 * x[0]).cos()).unwrap();
        let traj = heat_solve(&Field::zeros(&g, 1), &Forcing::Steady(f), 0.5, 0.8, 0.05).unwrap();
        let idx = g.index_of(&[3]).unwrap();
        let c = 0.5 * 9.0;
        for (i, &t) in traj.times().iter().enumerate() {
            let got = traj.field("u", i).unwrap().spectral(0)[idx].re;
            let want = 0.5 * (1.0 - (-c * t).exp()) / c;
            assert!((got - want).abs() <= 1e-13);
        }
    }

    #[test]
    fn lame_splits_into_two_heat_flows() {
        let g = Grid::new(2, 16).unwrap();
        let visc = Viscosity { mu: 0.5, lambda: 1.0 };
        let u0 = Ensemble::new(0.0, 5).sample(&g, 2, 3).unwrap();
        let (p0, q0) = helmholtz_project(&u0).unwrap();
        let l = lame_solve(&u0, &Forcing::None, visc, 0.3, 0.1).unwrap();
        let hp = heat_solve(&p0, &Forcing::None, 0.5, 0.3, 0.1).unwrap();
        let hq = heat_solve(&q0, &Forcing::None, 2.0, 0.3, 0.1).unwrap();
        let end = l.len() - 1;
        let want = hp.field("u", end).unwrap().add(hq.field("u", end).unwrap()).unwrap();
        assert!(l.field("u", end).unwrap().sub(&want).unwrap().max_abs() < 1e-13);
        assert!(matches!(
            lame_solve(&u0, &Forcing::None, Viscosity { mu: 1.0, lambda: -3.0 }, 0.3, 0.1),
            Err(Error::Ellipticity(_))
        ));
    }

    #[test]
    fn etd_series_branch_is_continuous() {
        let (a, b) = etd_weights(0.0099999);
        let (c, d) = etd_weights(0.0100001);
        assert!((a - c).abs() < 1e-6 && (b - d).abs() < 1e-6);
        let (a, b) = etd_weights(0.01 - 1e-15);
        let em = (-0.01f64).exp_m1();
        assert!((a + em / 0.01).abs() < 1e-15);
        assert!((b - (0.01 + em) / 1e-4).abs() < 1e-12);
    }
}
