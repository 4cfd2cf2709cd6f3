//! Damped transport `∂_t a + v·∇a + λa = f` by backward characteristics,
//! and the commutator of `v·∇` with a dyadic block.

use std::fmt;
use std::sync::Arc;

use super::heat::Forcing;
use super::time_grid;
use super::trajectory::Trajectory;
use crate::besov::{block_norms, besov_norm, BesovIndex, Cutoff, TimeNormSpec};
use crate::envelope::AcceptableWeight;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::interp::Interpolator;
use crate::lp::lp_block;

pub type VelocityFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;

/// Transporting velocity.
#[derive(Clone)]
pub enum Velocity {
    Steady(Field),
    /// Samples joined linearly in time.
    Sampled { times: Vec<f64>, fields: Vec<Field> },
    /// Closed-form `v(t, x)`, integrated along characteristics with RK4.
    Analytic(Arc<VelocityFn>),
}

impl fmt::Debug for Velocity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Velocity::Steady(_) => write!(f, "Velocity::Steady"),
            Velocity::Sampled { times, .. } => write!(f, "Velocity::Sampled({} samples)", times.len()),
            Velocity::Analytic(_) => write!(f, "Velocity::Analytic"),
        }
    }
}

impl Velocity {
    pub fn from_trajectory(traj: &Trajectory, slot: &str) -> Result<Velocity> {
        Ok(Velocity::Sampled { times: traj.times().to_vec(), fields: traj.series(slot)?.into_iter().cloned().collect() })
    }

    /// The velocity as a grid field at time `t`; closed-form velocities are
    /// sampled on the grid of `like`.
    pub fn field_at(&self, t: f64, like: &Field) -> Result<Field> {
        match self {
            Velocity::Steady(v) => Ok(v.clone()),
            Velocity::Sampled { times, fields } => Forcing::Sampled { times: times.clone(), fields: fields.clone() }
                .at(t)?
                .ok_or_else(|| Error::Data("no velocity samples".into())),
            Velocity::Analytic(f) => {
                let g = like.grid();
                Field::from_fn(g, g.dim(), |x, o| f(t, x, o))
            }
        }
    }

    fn max_speed(&self, t: f64, like: &Field) -> Result<f64> {
        let v = self.field_at(t, like)?;
        Ok(v.magnitude().into_iter().fold(0.0, f64::max))
    }
}

/// Scheme parameters for [`transport_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportOptions {
    /// Bound on `dt · max|v| · N / L` for each substep.
    pub cfl: f64,
    /// Substeps are halved at most this many times before a step is rejected.
    pub max_halvings: u32,
    /// Fixed-point sweeps for midpoint departure points.
    pub sweeps: usize,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions { cfl: 0.5, max_halvings: 12, sweeps: 4 }
    }
}

fn departure_points(v: &Velocity, a: &Field, t: f64, h: f64, sweeps: usize) -> Result<Vec<f64>> {
    let g = a.grid();
    let d = g.dim();
    let x = g.points();
    let npts = g.len();
    match v {
        Velocity::Analytic(f) => {
            let mut out = x.clone();
            let mut k = vec![vec![0.0; d]; 4];
            let mut tmp = vec![0.0; d];
            for p in 0..npts {
                let y = &mut out[p * d..(p + 1) * d];
                let t1 = t + h;
                f(t1, y, &mut k[0]);
                for a in 0..d {
                    tmp[a] = y[a] - 0.5 * h * k[0][a];
                }
                f(t1 - 0.5 * h, &tmp, &mut k[1]);
                for a in 0..d {
                    tmp[a] = y[a] - 0.5 * h * k[1][a];
                }
                f(t1 - 0.5 * h, &tmp, &mut k[2]);
                for a in 0..d {
                    tmp[a] = y[a] - h * k[2][a];
                }
                f(t, &tmp, &mut k[3]);
                for a in 0..d {
                    y[a] -= h / 6.0 * (k[0][a] + 2.0 * k[1][a] + 2.0 * k[2][a] + k[3][a]);
                }
            }
            Ok(out)
        }
        _ => {
            let vm = Interpolator::new(&v.field_at(t + 0.5 * h, a)?)?;
            let mut dep = x.clone();
            let mut mid = x.clone();
            for _ in 0..sweeps.max(1) {
                let vals = vm.eval(&mid)?;
                for p in 0..npts {
                    for c in 0..d {
                        dep[p * d + c] = x[p * d + c] - h * vals[c][p];
                        mid[p * d + c] = 0.5 * (x[p * d + c] + dep[p * d + c]);
                    }
                }
            }
            Ok(dep)
        }
    }
}

fn sl_step(a: &Field, v: &Velocity, src: &Forcing, damping: f64, t: f64, h: f64, sweeps: usize) -> Result<Field> {
    let dep = departure_points(v, a, t, h, sweeps)?;
    let decay = (-damping * h).exp();
    let at_dep = Interpolator::new(a)?.eval(&dep)?;
    let mut vals: Vec<Vec<f64>> = at_dep.into_iter().map(|c| c.into_iter().map(|x| decay * x).collect()).collect();
    if let (Some(f0), Some(f1)) = (src.at(t)?, src.at(t + h)?) {
        let f_dep = Interpolator::new(&f0)?.eval(&dep)?;
        for (c, out) in vals.iter_mut().enumerate() {
            let f1c = f1.physical(c);
            for (i, v) in out.iter_mut().enumerate() {
                *v += 0.5 * h * (decay * f_dep[c][i] + f1c[i]);
            }
        }
    }
    // Trigonometric interpolation at displaced points aliases the corner
    // modes; without the filter they grow step after step.
    Ok(Field::from_physical(a.grid(), vals)?.dealias())
}

/// Semi-Lagrangian solve on the nominal time grid; substeps are halved until
/// the CFL bound holds.
pub fn transport_solve(
    a0: &Field,
    v: &Velocity,
    src: &Forcing,
    damping: f64,
    horizon: f64,
    dt: f64,
    opts: TransportOptions,
) -> Result<Trajectory> {
    if !(damping >= 0.0) {
        return Err(Error::Domain(format!("damping {damping} must be nonnegative")));
    }
    let g = a0.grid();
    let times = time_grid(horizon, dt)?;
    let mut traj = Trajectory::new(g, &["a"]);
    traj.push(0.0, vec![a0.clone()])?;
    let mut a = a0.clone();
    let scale = g.n() as f64 / g.length();
    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let speed = v.max_speed(t0, a0)?.max(v.max_speed(t1, a0)?);
        let mut sub = 1usize;
        let mut halvings = 0;
        while (t1 - t0) / sub as f64 * speed * scale > opts.cfl {
            sub *= 2;
            halvings += 1;
            if halvings > opts.max_halvings {
                return Err(Error::StepRejected(format!("CFL bound unreachable at t={t0}, speed {speed}")));
            }
        }
        let h = (t1 - t0) / sub as f64;
        for s in 0..sub {
            a = sl_step(&a, v, src, damping, t0 + s as f64 * h, h, opts.sweeps)?;
        }
        traj.push(t1, vec![a.clone()])?;
    }
    Ok(traj)
}

/// `v·∇(Δ_j a) − Δ_j(v·∇a)`, dealiased.
pub fn commutator(v: &Field, a: &Field, j: i32) -> Result<Field> {
    v.ensure_vector()?;
    if v.grid() != a.grid() {
        return Err(Error::Shape("operands live on different grids".into()));
    }
    let outer = lp_block(a, j)?.advected_by(v)?;
    let inner = lp_block(&a.advected_by(v)?, j)?;
    outer.sub(&inner)
}

/// Jacobian `∇v` as a field with `d²` components.
pub fn jacobian(v: &Field) -> Result<Field> {
    v.ensure_vector()?;
    let parts: Vec<Field> = v.components().iter().flat_map(|c| (0..v.grid().dim()).map(|a| c.derivative(a)).collect::<Vec<_>>()).collect();
    Field::from_components(&parts)
}

/// The three measured quantities of the weighted transport estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportBound {
    /// `‖a‖_{L̃∞_t B^s(ω)} + λ ‖a‖_{L̃¹_t B^s(ω)}`.
    pub lhs: f64,
    /// `‖a0‖_{B^s(ω)} + ‖f‖_{L̃¹_t B^s(ω)}`.
    pub data: f64,
    /// `∫_0^t ‖∇v‖_{B^{d/p}_{p,∞} ∩ L∞}`.
    pub velocity_integral: f64,
}

impl TransportBound {
    /// Smallest `C` with `lhs ≤ e^{C V} data`.
    pub fn fitted_exponent(&self) -> f64 {
        if self.lhs == 0.0 || self.velocity_integral == 0.0 {
            return 0.0;
        }
        (self.lhs / self.data).ln() / self.velocity_integral
    }
}

pub fn transport_bound(
    traj: &Trajectory,
    v: &Velocity,
    src: &Forcing,
    damping: f64,
    idx: BesovIndex,
    w: Option<&AcceptableWeight>,
) -> Result<TransportBound> {
    let horizon = traj.horizon();
    let sup = TimeNormSpec::new(f64::INFINITY, horizon, true)?;
    let l1 = TimeNormSpec::new(1.0, horizon, true)?;
    let lhs = traj.spacetime_norm("a", idx, sup, w, Cutoff::None)?
        + damping * traj.spacetime_norm("a", idx, l1, w, Cutoff::None)?;
    let a0 = traj.field("a", 0)?;
    let mut data = besov_norm(&block_norms(a0, idx.p)?, idx, w, Cutoff::None)?;
    if !matches!(src, Forcing::None) {
        let mut ft = Trajectory::new(traj.grid(), &["a"]);
        for &t in traj.times() {
            ft.push(t, vec![src.at(t)?.expect("forcing present")])?;
        }
        data += ft.spacetime_norm("a", idx, l1, w, Cutoff::None)?;
    }
    let d = traj.grid().dim() as f64;
    let vidx = BesovIndex::new(d / idx.p, idx.p, f64::INFINITY)?;
    let velocity_integral = traj.integrate(|i| {
        let jac = jacobian(&v.field_at(traj.times()[i], a0)?)?;
        Ok(besov_norm(&block_norms(&jac, idx.p)?, vidx, None, Cutoff::None)? + jac.lp_norm(f64::INFINITY)?)
    })?;
    Ok(TransportBound { lhs, data, velocity_integral })
}
