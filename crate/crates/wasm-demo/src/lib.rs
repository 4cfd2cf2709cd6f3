//! Browser-facing wrappers. Each operation is a plain function returning a
//! serializable struct; the `#[wasm_bindgen]` exports hand JSON strings to
//! the page, with failures reported as `{"error": ...}`.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use cns_core::envelope::{build_weight, BlockMass};
use cns_core::experiments::counterexample::StepPotential;
use cns_core::lp::lp_block;
use cns_core::random::Ensemble;
use cns_core::{Field, Grid, Result};
use num_complex::Complex64;

#[derive(Debug, Serialize)]
pub struct Block {
    pub j: i32,
    pub values: Vec<f64>,
    pub l2: f64,
}

#[derive(Debug, Serialize)]
pub struct Decomposition {
    pub x: Vec<f64>,
    pub signal: Vec<f64>,
    pub mean: f64,
    pub blocks: Vec<Block>,
    /// `max |f − mean − Σ_j Δ_j f|`.
    pub reconstruction_error: f64,
}

/// Dyadic blocks of a random one-dimensional signal on `n` points.
pub fn decompose(n: usize, decay: f64, box_radius: i32, seed: u64) -> Result<Decomposition> {
    let g = Grid::new(1, n)?;
    let f = Ensemble::new(decay, box_radius).sample(&g, 1, seed)?;
    let mean = f.mean(0);
    let mut sum = Field::constant(&g, &[mean]);
    let mut blocks = Vec::new();
    for j in g.j_min()..=g.j_max() {
        let b = lp_block(&f, j)?;
        sum = sum.add(&b)?;
        blocks.push(Block { j, l2: b.lp_norm(2.0)?, values: b.physical(0).to_vec() });
    }
    let reconstruction_error = sum.sub(&f)?.max_abs();
    Ok(Decomposition { x: g.points(), signal: f.physical(0).to_vec(), mean, blocks, reconstruction_error })
}

#[derive(Debug, Serialize)]
pub struct WeightDemo {
    pub limit: Vec<f64>,
    pub members: Vec<Vec<f64>>,
    pub thresholds: Vec<usize>,
    pub weight: Vec<f64>,
    pub valid: bool,
    /// Per member, `Σ ω_i A_i` and its a priori bound.
    pub weighted: Vec<f64>,
    pub bounds: Vec<f64>,
}

/// Greedy weight for the family `A^n_i = ratio^i + 2^{−n}·[i = bump]`,
/// `n = 1..=members`, converging to the geometric limit.
pub fn weight_demo(ratio: f64, len: usize, members: usize, bump: usize, delta0: f64) -> Result<WeightDemo> {
    let limit = BlockMass::geometric(ratio, len);
    let family: Vec<BlockMass> = (1..=members)
        .map(|n| {
            let mut m = limit.clone();
            if let Some(v) = m.values.get_mut(bump) {
                *v += 2f64.powi(-(n as i32));
            }
            m
        })
        .collect();
    let env = build_weight(&family, &limit, delta0, len.saturating_sub(1))?;
    Ok(WeightDemo {
        weighted: family.iter().map(|m| m.weighted(&env.weight)).collect(),
        bounds: family.iter().map(|m| env.uniform_bound(m)).collect(),
        members: family.into_iter().map(|m| m.values).collect(),
        limit: limit.values,
        thresholds: env.thresholds,
        valid: env.weight.validate(),
        weight: env.weight.values,
    })
}

#[derive(Debug, Serialize)]
pub struct OdeDemo {
    pub times: Vec<f64>,
    /// Data straddling the threshold.
    pub straddling: Vec<f64>,
    /// Both data below the threshold.
    pub below: Vec<f64>,
    pub data_distance: f64,
}

/// Distances between solutions of the jump-rate ODE for a pair straddling
/// the threshold and a pair below it, both `eps` apart.
pub fn ode_demo(eps: f64, threshold: f64, phase: f64, t_max: f64, samples: usize) -> Result<OdeDemo> {
    if !(eps > 0.0 && threshold > 0.0 && t_max > 0.0 && samples >= 2) {
        return Err(cns_core::Error::Domain("need positive eps, threshold, t_max and at least two samples".into()));
    }
    let v = StepPotential { threshold, phase };
    let top = threshold.sqrt();
    let one = |a: f64| [Complex64::new(a, 0.0)];
    let dist = |x: f64, y: f64, t: f64| {
        let (sx, sy) = (v.evolve(&one(x), t), v.evolve(&one(y), t));
        (sx[0] - sy[0]).norm()
    };
    let times: Vec<f64> = (0..samples).map(|i| t_max * i as f64 / (samples - 1) as f64).collect();
    Ok(OdeDemo {
        straddling: times.iter().map(|&t| dist(top, top - eps, t)).collect(),
        below: times.iter().map(|&t| dist(top - eps, top - 2.0 * eps, t)).collect(),
        times,
        data_distance: eps,
    })
}

fn to_json<T: Serialize>(r: Result<T>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| format!("{{\"error\":\"{e}\"}}")),
        Err(e) => serde_json::json!({ "error": e.to_string() }).to_string(),
    }
}

#[wasm_bindgen(js_name = lpBlocks)]
pub fn lp_blocks_js(n: usize, decay: f64, box_radius: i32, seed: u64) -> String {
    to_json(decompose(n, decay, box_radius, seed))
}

#[wasm_bindgen(js_name = acceptableWeight)]
pub fn acceptable_weight_js(ratio: f64, len: usize, members: usize, bump: usize, delta0: f64) -> String {
    to_json(weight_demo(ratio, len, members, bump, delta0))
}

#[wasm_bindgen(js_name = counterexampleOde)]
pub fn counterexample_ode_js(eps: f64, threshold: f64, phase: f64, t_max: f64, samples: usize) -> String {
    to_json(ode_demo(eps, threshold, phase, t_max, samples))
}
