//! Particle flow maps `X(t, y) = y + ∫_0^t u(τ, X(τ, y)) dτ`, composition of
//! fields with them, and difference measurements in Lagrangian variables.

use crate::besov::{block_norms, BesovIndex, Cutoff, TimeNormSpec};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::interp::Interpolator;
use crate::lp::high_pass;
use crate::solvers::transport::{jacobian, Velocity, VelocityFn};
use crate::solvers::Trajectory;

/// Particle positions at the grid points, stored as displacements `X − y`
/// so that periodic wrap never matters.
#[derive(Debug, Clone)]
pub struct FlowMap {
    grid: Grid,
    times: Vec<f64>,
    disp: Vec<Vec<Vec<f64>>>,
    det_range: Vec<(f64, f64)>,
    periodic: bool,
}

impl FlowMap {
    pub fn identity(grid: &Grid, times: &[f64]) -> Self {
        let zero = vec![vec![0.0; grid.len()]; grid.dim()];
        FlowMap {
            grid: grid.clone(),
            times: times.to_vec(),
            disp: vec![zero; times.len()],
            det_range: vec![(1.0, 1.0); times.len()],
            periodic: true,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Displacement at sample `i`, indexed `[component][point]`.
    pub fn displacement(&self, i: usize) -> &[Vec<f64>] {
        &self.disp[i]
    }

    /// Positions at sample `i`, flattened point-major.
    pub fn positions(&self, i: usize) -> Vec<f64> {
        let d = self.grid.dim();
        let mut x = self.grid.points();
        for (p, chunk) in x.chunks_mut(d).enumerate() {
            for (a, v) in chunk.iter_mut().enumerate() {
                *v += self.disp[i][a][p];
            }
        }
        x
    }

    /// Smallest and largest `det ∇X` over the grid at sample `i`.
    pub fn jacobian_range(&self, i: usize) -> (f64, f64) {
        self.det_range[i]
    }

    /// `sup_t sup_y |X(t,y) − Y(t,y)|`.
    pub fn distance(&self, other: &FlowMap) -> Result<f64> {
        if self.grid != other.grid || self.len() != other.len() {
            return Err(Error::Shape("flow maps have different layouts".into()));
        }
        let mut m = 0.0f64;
        for i in 0..self.len() {
            for p in 0..self.grid.len() {
                let s: f64 = (0..self.grid.dim()).map(|a| (self.disp[i][a][p] - other.disp[i][a][p]).powi(2)).sum();
                m = m.max(s.sqrt());
            }
        }
        Ok(m)
    }
}

fn det(m: &[f64], d: usize) -> f64 {
    match d {
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        _ => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
    }
}

/// Solves `m x = b` in place for `d ≤ 3` by Cramer's rule.
fn solve_small(m: &[f64], b: &mut [f64], d: usize) -> bool {
    let det0 = det(m, d);
    if !(det0.abs() > 1e-300) {
        return false;
    }
    let rhs = b.to_vec();
    for c in 0..d {
        let mut mc = m.to_vec();
        for r in 0..d {
            mc[r * d + c] = rhs[r];
        }
        b[c] = det(&mc, d) / det0;
    }
    true
}

/// `det(I + ∇D)` range from spectral derivatives of a periodic displacement.
fn spectral_det_range(grid: &Grid, disp: &[Vec<f64>]) -> Result<(f64, f64)> {
    let d = grid.dim();
    let jac = jacobian(&Field::from_physical(grid, disp.to_vec())?)?;
    let mut range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut m = vec![0.0; d * d];
    for p in 0..grid.len() {
        for r in 0..d {
            for c in 0..d {
                m[r * d + c] = jac.physical(r * d + c)[p] + if r == c { 1.0 } else { 0.0 };
            }
        }
        let v = det(&m, d);
        range = (range.0.min(v), range.1.max(v));
    }
    Ok(range)
}

/// Velocity at time `t`, cubic in time for sampled velocities.
fn velocity_at(v: &Velocity, t: f64, like: &Field) -> Result<Field> {
    let Velocity::Sampled { times, fields } = v else {
        return v.field_at(t, like);
    };
    let n = times.len();
    if n < 4 {
        return v.field_at(t, like);
    }
    if let Some(i) = times.iter().position(|&s| s == t) {
        return Ok(fields[i].clone());
    }
    let i = times.partition_point(|&s| s <= t).clamp(2, n - 2) - 2;
    let nodes = &times[i..i + 4];
    let mut out = Field::zeros(like.grid(), fields[i].comps());
    for k in 0..4 {
        let w: f64 = (0..4).filter(|&m| m != k).map(|m| (t - nodes[m]) / (nodes[k] - nodes[m])).product();
        out = out.lin_comb(1.0, &fields[i + k], w)?;
    }
    Ok(out)
}

/// Integrates particle paths with classical RK4 over each interval of
/// `times`. Closed-form velocities also carry the variational equation,
/// with `∇v` by central differences, for the Jacobian check.
pub fn integrate_flow(v: &Velocity, grid: &Grid, times: &[f64]) -> Result<FlowMap> {
    if times.first() != Some(&0.0) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Data("flow times must start at 0 and increase".into()));
    }
    let d = grid.dim();
    let npts = grid.len();
    let base = grid.points();
    let like = Field::zeros(grid, d);
    let periodic = !matches!(v, Velocity::Analytic(_));
    let mut map = FlowMap::identity(grid, &times[..1]);
    map.periodic = periodic;
    let mut disp = vec![vec![0.0; npts]; d];
    // Deformation gradients for closed-form velocities, row-major per point.
    let mut grad: Vec<f64> = if periodic { Vec::new() } else { (0..npts).flat_map(|_| identity(d)).collect() };
    let pos = |disp: &[Vec<f64>]| -> Vec<f64> {
        let mut x = base.clone();
        for p in 0..npts {
            for a in 0..d {
                x[p * d + a] += disp[a][p];
            }
        }
        x
    };
    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let h = t1 - t0;
        match v {
            Velocity::Analytic(f) => {
                let x0 = pos(&disp);
                for p in 0..npts {
                    let x = &x0[p * d..(p + 1) * d];
                    let g = &grad[p * d * d..(p + 1) * d * d];
                    let shift = |y: &[f64], s: f64, k: &[f64]| y.iter().zip(k).map(|(y, k)| y + s * k).collect::<Vec<f64>>();
                    let (k1, j1) = variational(f.as_ref(), t0, x, g);
                    let (k2, j2) = variational(f.as_ref(), t0 + 0.5 * h, &shift(x, 0.5 * h, &k1), &shift(g, 0.5 * h, &j1));
                    let (k3, j3) = variational(f.as_ref(), t0 + 0.5 * h, &shift(x, 0.5 * h, &k2), &shift(g, 0.5 * h, &j2));
                    let (k4, j4) = variational(f.as_ref(), t1, &shift(x, h, &k3), &shift(g, h, &j3));
                    for a in 0..d {
                        disp[a][p] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
                    }
                    for e in 0..d * d {
                        grad[p * d * d + e] += h / 6.0 * (j1[e] + 2.0 * j2[e] + 2.0 * j3[e] + j4[e]);
                    }
                }
            }
            _ => {
                let v0 = Interpolator::new(&velocity_at(v, t0, &like)?)?;
                let vm = Interpolator::new(&velocity_at(v, t0 + 0.5 * h, &like)?)?;
                let v1 = Interpolator::new(&velocity_at(v, t1, &like)?)?;
                let x0 = pos(&disp);
                let shift = |k: &[Vec<f64>], s: f64| -> Vec<f64> {
                    let mut x = x0.clone();
                    for p in 0..npts {
                        for a in 0..d {
                            x[p * d + a] += s * k[a][p];
                        }
                    }
                    x
                };
                let k1 = v0.eval(&x0)?;
                let k2 = vm.eval(&shift(&k1, 0.5 * h))?;
                let k3 = vm.eval(&shift(&k2, 0.5 * h))?;
                let k4 = v1.eval(&shift(&k3, h))?;
                for a in 0..d {
                    for p in 0..npts {
                        disp[a][p] += h / 6.0 * (k1[a][p] + 2.0 * k2[a][p] + 2.0 * k3[a][p] + k4[a][p]);
                    }
                }
            }
        }
        if disp.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("particle paths blew up by t={t1}")));
        }
        let range = if periodic {
            spectral_det_range(grid, &disp)?
        } else {
            grad.chunks(d * d).fold((f64::INFINITY, f64::NEG_INFINITY), |r, m| {
                let v = det(m, d);
                (r.0.min(v), r.1.max(v))
            })
        };
        if !(range.0 > 0.0) {
            return Err(Error::Diffeo(format!("det ∇X reached {} at t={t1}", range.0)));
        }
        map.times.push(t1);
        map.disp.push(disp.clone());
        map.det_range.push(range);
    }
    Ok(map)
}

/// `(v(t,x), ∇v(t,x)·G)` with `∇v` by central differences.
fn variational(f: &VelocityFn, t: f64, x: &[f64], g: &[f64]) -> (Vec<f64>, Vec<f64>) {
    const STEP: f64 = 1e-6;
    let d = x.len();
    let mut v = vec![0.0; d];
    f(t, x, &mut v);
    let mut jv = vec![0.0; d * d];
    let (mut vp, mut vm) = (vec![0.0; d], vec![0.0; d]);
    let mut xs = x.to_vec();
    for b in 0..d {
        xs[b] = x[b] + STEP;
        f(t, &xs, &mut vp);
        xs[b] = x[b] - STEP;
        f(t, &xs, &mut vm);
        xs[b] = x[b];
        for a in 0..d {
            jv[a * d + b] = (vp[a] - vm[a]) / (2.0 * STEP);
        }
    }
    let dg = (0..d * d).map(|e| (0..d).map(|k| jv[e / d * d + k] * g[k * d + e % d]).sum()).collect();
    (v, dg)
}

fn identity(d: usize) -> Vec<f64> {
    (0..d * d).map(|e| if e / d == e % d { 1.0 } else { 0.0 }).collect()
}

/// Flow of the `u` slot of a trajectory, sampled at its own times.
pub fn flow_of(traj: &Trajectory) -> Result<FlowMap> {
    integrate_flow(&Velocity::from_trajectory(traj, "u")?, traj.grid(), traj.times())
}

fn check_times(traj: &Trajectory, x: &FlowMap) -> Result<()> {
    if traj.grid() != x.grid() || traj.len() != x.len() {
        return Err(Error::Shape("trajectory and flow map have different layouts".into()));
    }
    if traj.times().iter().zip(x.times()).any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0)) {
        return Err(Error::Data("trajectory and flow map sampled at different times".into()));
    }
    Ok(())
}

/// `f ↦ f∘X` for every slot and sample.
pub fn to_lagrangian(traj: &Trajectory, x: &FlowMap) -> Result<Trajectory> {
    check_times(traj, x)?;
    let names: Vec<&str> = traj.slots().iter().map(|s| s.as_str()).collect();
    let mut out = Trajectory::new(traj.grid(), &names);
    for i in 0..traj.len() {
        let pts = x.positions(i);
        let fields = traj
            .state(i)
            .iter()
            .map(|f| Field::from_physical(f.grid(), Interpolator::new(f)?.eval(&pts)?))
            .collect::<Result<Vec<_>>>()?;
        out.push(traj.times()[i], fields)?;
    }
    Ok(out)
}

/// Preimages `X⁻¹(x)` of the grid points at sample `i` by Newton's method,
/// warm-started from `guess`.
fn invert(x: &FlowMap, i: usize, guess: Vec<f64>) -> Result<Vec<f64>> {
    let g = &x.grid;
    let d = g.dim();
    let dfield = Field::from_physical(g, x.disp[i].clone())?;
    let di = Interpolator::new(&dfield)?;
    let ji = Interpolator::new(&jacobian(&dfield)?)?;
    let target = g.points();
    let mut y = guess;
    let tol = 1e-13 * g.length();
    for _ in 0..50 {
        let dv = di.eval(&y)?;
        let jv = ji.eval(&y)?;
        let mut worst = 0.0f64;
        let mut m = vec![0.0; d * d];
        let mut r = vec![0.0; d];
        for p in 0..g.len() {
            for a in 0..d {
                r[a] = y[p * d + a] + dv[a][p] - target[p * d + a];
                worst = worst.max(r[a].abs());
                for b in 0..d {
                    m[a * d + b] = jv[a * d + b][p] + if a == b { 1.0 } else { 0.0 };
                }
            }
            if !solve_small(&m, &mut r, d) {
                return Err(Error::Diffeo("singular flow Jacobian during inversion".into()));
            }
            for a in 0..d {
                y[p * d + a] -= r[a];
            }
        }
        if worst < tol {
            return Ok(y);
        }
    }
    Err(Error::Diffeo(format!("flow map inversion did not converge at sample {i}")))
}

/// `f̄ ↦ f̄∘X⁻¹` for every slot and sample.
pub fn from_lagrangian(traj: &Trajectory, x: &FlowMap) -> Result<Trajectory> {
    check_times(traj, x)?;
    if !x.periodic {
        return Err(Error::Precondition("inversion needs a periodic displacement".into()));
    }
    let names: Vec<&str> = traj.slots().iter().map(|s| s.as_str()).collect();
    let mut out = Trajectory::new(traj.grid(), &names);
    let mut y = traj.grid().points();
    for i in 0..traj.len() {
        y = invert(x, i, y)?;
        let fields = traj
            .state(i)
            .iter()
            .map(|f| Field::from_physical(f.grid(), Interpolator::new(f)?.eval(&y)?))
            .collect::<Result<Vec<_>>>()?;
        out.push(traj.times()[i], fields)?;
    }
    Ok(out)
}

/// Upper bound for `sup_x |∇u(x)|` from the absolute Fourier series.
pub fn gradient_majorant(u: &Field) -> f64 {
    let g = u.grid();
    let mut s = 0.0;
    for c in 0..u.comps() {
        for a in 0..g.dim() {
            let m: f64 = u.spectral(c).iter().enumerate().map(|(i, v)| g.xi(i, a).abs() * v.norm()).sum();
            s += m * m;
        }
    }
    s.sqrt()
}

/// Lagrangian and Eulerian difference measurements between two solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangianDifference {
    /// `Z_p(T)` norm of the difference of the Lagrangian states.
    pub zp: f64,
    /// `‖δū‖_{L¹_T L∞}`.
    pub l1_linf: f64,
    /// `T^{1/2} ‖G‖_{L²_T}` with `G(t)` the block-sum majorant of `‖δū(t)‖_{L∞}`.
    pub l2_bound: f64,
    /// `T^{1/2} (‖G‖_{L∞_T} ‖G‖_{L¹_T})^{1/2}`.
    pub interpolation_bound: f64,
    /// `T^{1/2} (‖δū‖_{L̃∞Ḃ^{−1+d/p}_{p,1}} ‖δū‖_{L̃¹Ḃ^{1+d/p}_{p,1}})^{1/2}`.
    pub besov_interpolation: f64,
    /// `‖u₂ − u₁‖_{L¹_T L∞}` in Eulerian variables.
    pub eulerian_l1_linf: f64,
    /// `‖u₂∘X₁ − u₂∘X₂‖_{L¹_T L∞}`.
    pub flow_correction: f64,
    /// `∫ sup|∇u₂| · sup_t ‖X₁ − X₂‖_{L∞}`.
    pub flow_bound: f64,
    pub flow_distance: f64,
}

impl LagrangianDifference {
    /// The exact chain `L¹L∞ ≤ T^{1/2} L²(block sum) ≤ interpolation bound`.
    pub fn ordering_holds(&self) -> bool {
        let slack = 1e-12 * self.interpolation_bound.max(1e-300);
        self.l1_linf <= self.l2_bound + slack && self.l2_bound <= self.interpolation_bound + slack
    }
}

fn linf_majorant(f: &Field) -> Result<f64> {
    let g = f.grid();
    let blocks: f64 = block_norms(f, f64::INFINITY)?.values.iter().sum();
    let mean = f.means().iter().map(|m| m * m).sum::<f64>().sqrt();
    Ok(mean + blocks + high_pass(f, g.j_max() + 1)?.lp_norm(f64::INFINITY)?)
}

/// Compares `(a₁, u₁)` with `(a₂, u₂)` through their flows `X₁`, `X₂`.
pub fn lagrangian_difference(
    base: &Trajectory,
    other: &Trajectory,
    x_base: &FlowMap,
    x_other: &FlowMap,
    p: f64,
) -> Result<LagrangianDifference> {
    let lb = to_lagrangian(base, x_base)?;
    let lo = to_lagrangian(other, x_other)?;
    let diff = lo.difference(&lb)?;
    let zp = crate::solvers::cns::zp_norm(&diff, p, None, Cutoff::None)?;
    let t = diff.horizon();
    let du = diff.series("u")?;
    let l1_linf = diff.integrate(|i| du[i].lp_norm(f64::INFINITY))?;
    let gs = du.iter().map(|f| linf_majorant(f)).collect::<Result<Vec<_>>>()?;
    let g2 = diff.integrate(|i| Ok(gs[i] * gs[i]))?;
    let g1 = diff.integrate(|i| Ok(gs[i]))?;
    let gmax = gs.iter().fold(0.0f64, |m, &v| m.max(v));
    let d = base.grid().dim() as f64;
    let low = diff.spacetime_norm("u", BesovIndex::new(d / p - 1.0, p, 1.0)?, TimeNormSpec::new(f64::INFINITY, t, true)?, None, Cutoff::None)?;
    let high = diff.spacetime_norm("u", BesovIndex::new(d / p + 1.0, p, 1.0)?, TimeNormSpec::new(1.0, t, true)?, None, Cutoff::None)?;
    let eul = other.difference(base)?;
    let eu = eul.series("u")?;
    let eulerian_l1_linf = eul.integrate(|i| eu[i].lp_norm(f64::INFINITY))?;
    let uo = other.series("u")?;
    let flow_correction = other.integrate(|i| {
        let it = Interpolator::new(uo[i])?;
        let a = it.eval(&x_base.positions(i))?;
        let b = it.eval(&x_other.positions(i))?;
        let n = base.grid().len();
        Ok((0..n).map(|q| a.iter().zip(&b).map(|(x, y)| (x[q] - y[q]).powi(2)).sum::<f64>().sqrt()).fold(0.0, f64::max))
    })?;
    let flow_distance = x_base.distance(x_other)?;
    let grad_l1 = other.integrate(|i| Ok(gradient_majorant(uo[i])))?;
    Ok(LagrangianDifference {
        zp,
        l1_linf,
        l2_bound: (t * g2).sqrt(),
        interpolation_bound: (t * gmax * g1).sqrt(),
        besov_interpolation: (t * low * high).sqrt(),
        eulerian_l1_linf,
        flow_correction,
        flow_bound: grad_l1 * flow_distance,
        flow_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::Ensemble;
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn constant_velocity_translates() {
        let g = Grid::new(2, 32).unwrap();
        let v = Velocity::Steady(Field::constant(&g, &[0.3, -0.2]));
        let times: Vec<f64> = (0..6).map(|i| i as f64 * 0.2).collect();
        let x = integrate_flow(&v, &g, &times).unwrap();
        for (i, &t) in times.iter().enumerate() {
            for p in 0..g.len() {
                assert!((x.displacement(i)[0][p] - 0.3 * t).abs() < 1e-10);
                assert!((x.displacement(i)[1][p] + 0.2 * t).abs() < 1e-10);
            }
            let (lo, hi) = x.jacobian_range(i);
            assert!((lo - 1.0).abs() < 1e-10 && (hi - 1.0).abs() < 1e-10);
        }
        let z = integrate_flow(&Velocity::Steady(Field::zeros(&g, 2)), &g, &times).unwrap();
        assert!(z.displacement(5).iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn rigid_rotation_matches_closed_form() {
        let g = Grid::new(2, 16).unwrap();
        let rot: Arc<crate::solvers::transport::VelocityFn> = Arc::new(|_, x, o| {
            o[0] = -(x[1] - PI);
            o[1] = x[0] - PI;
        });
        let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.01).collect();
        let x = integrate_flow(&Velocity::Analytic(rot), &g, &times).unwrap();
        let pos = x.positions(100);
        let (c, s) = (1f64.cos(), 1f64.sin());
        for (p, y) in g.points().chunks(2).enumerate() {
            let (dx, dy) = (y[0] - PI, y[1] - PI);
            assert!((pos[2 * p] - (PI + c * dx - s * dy)).abs() < 1e-8);
            assert!((pos[2 * p + 1] - (PI + s * dx + c * dy)).abs() < 1e-8);
        }
        let (lo, hi) = x.jacobian_range(100);
        assert!((lo - 1.0).abs() < 1e-6 && (hi - 1.0).abs() < 1e-6);
    }

    fn shear_traj(g: &Grid, amp: f64) -> Trajectory {
        let mut t = Trajectory::new(g, &["a", "u"]);
        for i in 0..11 {
            let s = i as f64 * 0.05;
            let u = Field::from_fn(g, 2, |x, o| {
                o[0] = amp * (x[1] + s).sin();
                o[1] = amp * 0.5 * x[0].cos();
            })
            .unwrap();
            let a = Field::from_fn(g, 1, |x, o| o[0] = 0.1 * (x[0] - x[1]).cos()).unwrap();
            t.push(s, vec![a, u]).unwrap();
        }
        t
    }

    #[test]
    fn composition_round_trip() {
        let g = Grid::new(2, 32).unwrap();
        let traj = shear_traj(&g, 0.3);
        let x = flow_of(&traj).unwrap();
        let (lo, hi) = x.jacobian_range(10);
        assert!((lo - 1.0).abs() < 1e-6 && (hi - 1.0).abs() < 1e-6, "divergence-free flow keeps volume");
        let lag = to_lagrangian(&traj, &x).unwrap();
        let back = from_lagrangian(&lag, &x).unwrap();
        for i in 0..traj.len() {
            for s in ["a", "u"] {
                let err = back.field(s, i).unwrap().sub(traj.field(s, i).unwrap()).unwrap().max_abs();
                assert!(err < 1e-8, "slot {s} sample {i}: {err}");
            }
        }
        let c = Field::constant(&g, &[0.7]);
        let mut ct = Trajectory::new(&g, &["a"]);
        for &t in traj.times() {
            ct.push(t, vec![c.clone()]).unwrap();
        }
        let cl = to_lagrangian(&ct, &x).unwrap();
        assert!(cl.last("a").unwrap().sub(&c).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn difference_of_identical_runs_vanishes() {
        let g = Grid::new(2, 16).unwrap();
        let traj = shear_traj(&g, 0.2);
        let x = flow_of(&traj).unwrap();
        let r = lagrangian_difference(&traj, &traj, &x, &x, 2.0).unwrap();
        assert_eq!(r.zp, 0.0);
        assert_eq!(r.l1_linf, 0.0);
        assert_eq!(r.eulerian_l1_linf, 0.0);
        assert_eq!(r.flow_distance, 0.0);
        assert!(r.ordering_holds());
    }

    #[test]
    fn perturbed_run_respects_chain() {
        let g = Grid::new(2, 16).unwrap();
        let traj = shear_traj(&g, 0.2);
        let bump = Ensemble::new(0.0, 4).sample(&g, 2, 3).unwrap().scale(1e-3);
        let other = traj.map_slot("u", |u| u.add(&bump)).unwrap();
        let (xb, xo) = (flow_of(&traj).unwrap(), flow_of(&other).unwrap());
        let r = lagrangian_difference(&traj, &other, &xb, &xo, 2.0).unwrap();
        assert!(r.ordering_holds());
        assert!(r.flow_correction <= r.flow_bound);
        assert!(r.zp > 0.0 && r.flow_distance > 0.0);
    }

    #[test]
    fn small_solver_and_determinants() {
        let m = [2.0, 1.0, 1.0, 3.0];
        let mut b = [3.0, 5.0];
        assert!(solve_small(&m, &mut b, 2));
        assert!((b[0] - 0.8).abs() < 1e-14 && (b[1] - 1.4).abs() < 1e-14);
        assert_eq!(det(&identity(3), 3), 1.0);
    }
}
