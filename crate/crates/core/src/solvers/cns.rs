//! Barotropic compressible Navier-Stokes in perturbation variables
//! `a = ρ − 1`, `u`:
//!
//! ```text
//! a_t + u·∇a = −(1+a) div u
//! u_t − 𝒜u   = −u·∇u − I(a)𝒜u − ∇G(a)
//! ```
//!
//! Each step is a Strang splitting: an exact Lamé half-step for `u`, one
//! classical RK4 step for everything else (all products dealiased), and a
//! second Lamé half-step.

use serde::{Deserialize, Serialize};

use super::heat::lame_propagate;
use super::pressure::{PressureLaw, Viscosity};
use super::time_grid;
use super::trajectory::Trajectory;
use crate::besov::{block_norms, besov_norm, BesovIndex, Cutoff, TimeNormSpec};
use crate::envelope::AcceptableWeight;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::paraproduct::{compose, DensityFactor};

/// Density perturbation and velocity at one time.
#[derive(Debug, Clone)]
pub struct CnsState {
    pub a: Field,
    pub u: Field,
}

impl CnsState {
    pub fn new(a: Field, u: Field) -> Result<Self> {
        a.ensure_scalar()?;
        u.ensure_vector()?;
        if a.grid() != u.grid() {
            return Err(Error::Shape("density and velocity on different grids".into()));
        }
        Ok(CnsState { a, u })
    }

    pub fn rest(grid: &crate::grid::Grid) -> Self {
        CnsState { a: Field::zeros(grid, 1), u: Field::zeros(grid, grid.dim()) }
    }

    /// Both unknowns truncated to the dealiased band, as the solver sees them.
    pub fn dealiased(&self) -> Result<Self> {
        CnsState::new(self.a.dealias(), self.u.dealias())
    }

    pub fn min_density(&self) -> f64 {
        1.0 + self.a.physical(0).iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// `∫(1+a)` over the torus.
    pub fn mass(&self) -> f64 {
        self.a.grid().volume() + self.a.integral()[0]
    }

    /// `∫(1+a)u` over the torus, exact for band-limited states.
    pub fn momentum(&self) -> Vec<f64> {
        let g = self.a.grid();
        let cell = g.spacing().powi(g.dim() as i32);
        let a = self.a.physical(0);
        (0..self.u.comps())
            .map(|c| cell * self.u.physical(c).iter().zip(a).map(|(u, a)| (1.0 + a) * u).sum::<f64>())
            .collect()
    }
}

/// How the final time is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Horizon {
    Fixed(f64),
    /// Largest admissible time from the heat-decay criterion, capped.
    Auto { t_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub horizon: Horizon,
    pub viscosity: Viscosity,
    pub pressure: PressureLaw,
    /// Smallness threshold on `‖a0‖_{Ḃ^{d/p}_{p,1}}`.
    pub smallness: f64,
    /// Required lower bound on `1 + a0`; the solve stops once the density
    /// falls below half of it.
    pub margin: f64,
    pub cfl: f64,
    pub max_halvings: u32,
    /// Store every `save_every`-th step (the final time is always stored).
    pub save_every: usize,
    /// Integrability used for the smallness test and automatic horizon.
    pub p: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 0.01,
            horizon: Horizon::Fixed(0.5),
            viscosity: Viscosity::default(),
            pressure: PressureLaw::default(),
            smallness: 0.05,
            margin: 0.5,
            cfl: 0.5,
            max_halvings: 10,
            save_every: 1,
            p: 2.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CnsSolution {
    /// Slots `a` and `u`.
    pub traj: Trajectory,
    pub horizon: f64,
    /// Whether `‖a0‖_{Ḃ^{d/p}_{p,1}}` was within the smallness threshold.
    pub small_data: bool,
    pub density_norm: f64,
    pub min_density: f64,
    pub substeps: usize,
}

/// `‖a0‖_{Ḃ^{d/p}_{p,1}} + ‖u0‖_{Ḃ^{−1+d/p}_{p,1}}`.
pub fn data_norm(s: &CnsState, p: f64) -> Result<f64> {
    let d = s.a.grid().dim() as f64;
    let ia = BesovIndex::new(d / p, p, 1.0)?;
    let iu = BesovIndex::new(d / p - 1.0, p, 1.0)?;
    Ok(besov_norm(&block_norms(&s.a, p)?, ia, None, Cutoff::None)?
        + besov_norm(&block_norms(&s.u, p)?, iu, None, Cutoff::None)?)
}

/// `‖a‖_{L̃∞Ḃ^{d/p}_{p,1}} + ‖u‖_{L̃∞Ḃ^{−1+d/p}_{p,1}} + ‖u‖_{L̃¹Ḃ^{1+d/p}_{p,1}}`
/// over the whole trajectory.
pub fn zp_norm(traj: &Trajectory, p: f64, w: Option<&AcceptableWeight>, cutoff: Cutoff) -> Result<f64> {
    let d = traj.grid().dim() as f64;
    let t = traj.horizon();
    let sup = TimeNormSpec::new(f64::INFINITY, t, true)?;
    let l1 = TimeNormSpec::new(1.0, t, true)?;
    Ok(traj.spacetime_norm("a", BesovIndex::new(d / p, p, 1.0)?, sup, w, cutoff)?
        + traj.spacetime_norm("u", BesovIndex::new(d / p - 1.0, p, 1.0)?, sup, w, cutoff)?
        + traj.spacetime_norm("u", BesovIndex::new(d / p + 1.0, p, 1.0)?, l1, w, cutoff)?)
}

/// Largest `T ≤ t_max` with
/// `Σ_j (1 − e^{−C0 4^j T}) 2^{j(−1+d/p)} ‖Δ_j u0‖_p ≤ c / (1 + ‖u0‖_{Ḃ^{−1+d/p}_{p,1}})`,
/// where `C0 = μ/4` and the frequencies are physical.
pub fn auto_horizon(u0: &Field, mu: f64, smallness: f64, p: f64, t_max: f64) -> Result<f64> {
    if !(t_max > 0.0) {
        return Err(Error::Domain(format!("horizon cap {t_max} must be positive")));
    }
    let g = u0.grid();
    let d = g.dim() as f64;
    let series = block_norms(u0, p)?;
    let scale = 2.0 * std::f64::consts::PI / g.length();
    let s = d / p - 1.0;
    let norm = besov_norm(&series, BesovIndex::new(s, p, 1.0)?, None, Cutoff::None)?;
    let bound = smallness / (1.0 + norm);
    let c0 = mu / 4.0;
    let lhs = |t: f64| -> f64 {
        series
            .indices()
            .map(|j| {
                let rate = c0 * (scale * 2f64.powi(j)).powi(2);
                -(-rate * t).exp_m1() * 2f64.powf(j as f64 * s) * series.get(j)
            })
            .sum()
    };
    if lhs(t_max) <= bound {
        return Ok(t_max);
    }
    let (mut lo, mut hi) = (0.0, t_max);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if lhs(mid) <= bound {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo <= 0.0 {
        return Err(Error::Convergence("admissible horizon collapsed to zero".into()));
    }
    Ok(lo)
}

struct Rhs<'a> {
    visc: Viscosity,
    law: &'a PressureLaw,
}

impl Rhs<'_> {
    fn eval(&self, a: &Field, u: &Field) -> Result<(Field, Field)> {
        let div = u.divergence()?;
        let da = a.advected_by(u)?.add(&div)?.add(&a.product(&div)?)?.scale(-1.0);
        let lame = u.laplacian().lin_comb(self.visc.mu, &div.gradient()?, self.visc.mu + self.visc.lambda)?;
        let ia = compose(&DensityFactor { margin: f64::MIN_POSITIVE }, a)?;
        let du = u
            .advected_by(u)?
            .add(&ia.product(&lame)?)?
            .add(&compose(self.law, a)?.gradient()?)?
            .scale(-1.0);
        Ok((da, du))
    }

    fn rk4(&self, a: &Field, u: &Field, h: f64) -> Result<(Field, Field)> {
        let (ka1, ku1) = self.eval(a, u)?;
        let (ka2, ku2) = self.eval(&a.lin_comb(1.0, &ka1, 0.5 * h)?, &u.lin_comb(1.0, &ku1, 0.5 * h)?)?;
        let (ka3, ku3) = self.eval(&a.lin_comb(1.0, &ka2, 0.5 * h)?, &u.lin_comb(1.0, &ku2, 0.5 * h)?)?;
        let (ka4, ku4) = self.eval(&a.lin_comb(1.0, &ka3, h)?, &u.lin_comb(1.0, &ku3, h)?)?;
        let comb = |x: &Field, k1: &Field, k2: &Field, k3: &Field, k4: &Field| -> Result<Field> {
            let s = k1.add(&k2.scale(2.0))?.add(&k3.scale(2.0))?.add(k4)?;
            x.lin_comb(1.0, &s, h / 6.0)
        };
        Ok((comb(a, &ka1, &ka2, &ka3, &ka4)?, comb(u, &ku1, &ku2, &ku3, &ku4)?))
    }
}

fn strang_step(s: &CnsState, rhs: &Rhs, h: f64) -> Result<CnsState> {
    let u = lame_propagate(&s.u, rhs.visc, 0.5 * h)?;
    let (a, u) = rhs.rk4(&s.a, &u, h)?;
    let u = lame_propagate(&u, rhs.visc, 0.5 * h)?;
    let a = a.dealias();
    let u = u.dealias();
    if a.physical(0).iter().chain(u.physical(0)).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite state".into()));
    }
    Ok(CnsState { a, u })
}

/// Integrates from `s0` to the configured horizon. Initial data are
/// truncated to the dealiased band first.
pub fn cns_solve(s0: &CnsState, cfg: &SolverConfig) -> Result<CnsSolution> {
    cfg.viscosity.check()?;
    if !(cfg.smallness > 0.0 && cfg.margin > 0.0 && cfg.margin < 1.0 && cfg.cfl > 0.0 && cfg.save_every >= 1) {
        return Err(Error::Domain("invalid solver configuration".into()));
    }
    let s0 = CnsState::new(s0.a.dealias(), s0.u.dealias())?;
    let g = s0.a.grid().clone();
    if s0.min_density() < cfg.margin {
        return Err(Error::Vacuum(format!("initial density {} below margin {}", s0.min_density(), cfg.margin)));
    }
    let d = g.dim() as f64;
    let density_norm = besov_norm(&block_norms(&s0.a, cfg.p)?, BesovIndex::new(d / cfg.p, cfg.p, 1.0)?, None, Cutoff::None)?;
    let horizon = match cfg.horizon {
        Horizon::Fixed(t) => t,
        Horizon::Auto { t_max } => auto_horizon(&s0.u, cfg.viscosity.mu, cfg.smallness, cfg.p, t_max)?,
    };
    let times = time_grid(horizon, cfg.dt.min(horizon))?;
    let rhs = Rhs { visc: cfg.viscosity, law: &cfg.pressure };
    let scale = g.n() as f64 / g.length();
    let mut traj = Trajectory::new(&g, &["a", "u"]);
    traj.push(0.0, vec![s0.a.clone(), s0.u.clone()])?;
    let mut s = s0;
    let mut min_density = s.min_density();
    let mut substeps = 0;
    let last = times.len() - 1;
    for (step, w) in times.windows(2).enumerate() {
        let (t0, t1) = (w[0], w[1]);
        let mut sub = 1usize;
        let mut halvings = 0;
        let mut next = loop {
            let h = (t1 - t0) / sub as f64;
            let speed = s.u.magnitude().into_iter().fold(0.0, f64::max);
            if h * speed * scale <= cfg.cfl {
                let mut trial = s.clone();
                let mut ok = true;
                for _ in 0..sub {
                    trial = strang_step(&trial, &rhs, h)?;
                    if trial.u.magnitude().into_iter().fold(0.0, f64::max) * h * scale > cfg.cfl {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    substeps += sub;
                    break trial;
                }
            }
            sub *= 2;
            halvings += 1;
            if halvings > cfg.max_halvings {
                return Err(Error::StepRejected(format!("CFL bound unreachable at t={t0}")));
            }
        };
        let md = next.min_density();
        min_density = min_density.min(md);
        if md < 0.5 * cfg.margin {
            return Err(Error::Vacuum(format!("density {md} at t={t1} fell below half the margin")));
        }
        if (step + 1) % cfg.save_every == 0 || step + 1 == last {
            traj.push(t1, vec![next.a.clone(), next.u.clone()])?;
        }
        std::mem::swap(&mut s, &mut next);
    }
    Ok(CnsSolution { traj, horizon, small_data: density_norm <= cfg.smallness, density_norm, min_density, substeps })
}
