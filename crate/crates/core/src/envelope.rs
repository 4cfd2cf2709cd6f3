//! Acceptable frequency weights and the envelope built from a convergent
//! family of block-mass sequences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const REL_TOL: f64 = 1e-12;

/// Nondecreasing weight with growth ratio at most `2^{δ0}` per index, equal
/// to one at and below index zero. Indices past the stored range reuse the
/// last value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptableWeight {
    pub delta0: f64,
    pub values: Vec<f64>,
}

impl AcceptableWeight {
    /// `ω ≡ 1` on indices `0..=top`.
    pub fn identity(delta0: f64, top: usize) -> Self {
        AcceptableWeight { delta0, values: vec![1.0; top + 1] }
    }

    /// `ω_i = 2^{i·rate}` for `i > 0`.
    pub fn geometric(delta0: f64, rate: f64, top: usize) -> Self {
        AcceptableWeight { delta0, values: (0..=top).map(|i| 2f64.powf(rate * i as f64)).collect() }
    }

    pub fn at(&self, i: i32) -> f64 {
        if i <= 0 || self.values.is_empty() {
            return 1.0;
        }
        let i = i as usize;
        *self.values.get(i).unwrap_or_else(|| self.values.last().expect("nonempty"))
    }

    pub fn top(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// Checks every defining property; never errors.
    pub fn validate(&self) -> bool {
        if !(self.delta0 > 0.0 && self.delta0 <= 1.0) || self.values.is_empty() {
            return false;
        }
        if self.values.iter().any(|v| !v.is_finite()) || self.values[0] != 1.0 {
            return false;
        }
        let growth = 2f64.powf(self.delta0) * (1.0 + REL_TOL);
        self.values.windows(2).all(|w| w[0] >= 1.0 && w[1] >= w[0] && w[1] <= growth * w[0])
    }
}

/// Nonnegative masses `A_i` for `i = 0..len` plus the total mass beyond.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockMass {
    pub values: Vec<f64>,
    pub tail: f64,
}

impl BlockMass {
    pub fn new(values: Vec<f64>, tail: f64) -> Self {
        BlockMass { values, tail }
    }

    /// `A_i = ratio^i` for `i < len`, with the exact geometric tail.
    pub fn geometric(ratio: f64, len: usize) -> Self {
        let values: Vec<f64> = (0..len).map(|i| ratio.powi(i as i32)).collect();
        let tail = ratio.powi(len as i32) / (1.0 - ratio);
        BlockMass { values, tail }
    }

    pub fn total(&self) -> f64 {
        self.suffix(0)
    }

    /// `Σ_{l ≥ i} A_l`, summed from the far end.
    pub fn suffix(&self, i: usize) -> f64 {
        let mut s = self.tail;
        for v in self.values.iter().skip(i).rev() {
            s += v;
        }
        s
    }

    fn check(&self) -> Result<()> {
        if self.values.iter().chain(std::iter::once(&self.tail)).any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Precondition("block masses must be finite and nonnegative".into()));
        }
        Ok(())
    }

    fn l1_distance(&self, other: &BlockMass) -> f64 {
        let n = self.values.len().max(other.values.len());
        let mut d = (self.tail - other.tail).abs();
        for i in 0..n {
            let a = self.values.get(i).copied().unwrap_or(0.0);
            let b = other.values.get(i).copied().unwrap_or(0.0);
            d += (a - b).abs();
        }
        d
    }

    /// `Σ ω_i A_i`, with the tail weighted by the last stored weight.
    pub fn weighted(&self, w: &AcceptableWeight) -> f64 {
        let mut s = self.tail * w.at(self.values.len() as i32);
        for (i, v) in self.values.iter().enumerate().rev() {
            s += w.at(i as i32) * v;
        }
        s
    }
}

/// Result of the envelope construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub weight: AcceptableWeight,
    /// Strictly increasing thresholds; the weight equals `2^{k δ0}` on
    /// `thresholds[k] ≤ i < thresholds[k+1]`.
    pub thresholds: Vec<usize>,
}

impl Envelope {
    /// The a priori bound `Σ_i A_i + Σ_{k≥1} 2^{k(δ0−1)}` on `Σ ω_i A_i`.
    pub fn uniform_bound(&self, a: &BlockMass) -> f64 {
        let d = self.weight.delta0;
        let geo = if d < 1.0 {
            let q = 2f64.powf(d - 1.0);
            q / (1.0 - q)
        } else {
            self.thresholds.len() as f64
        };
        a.total() + geo
    }
}

/// Greedy envelope: the smallest strictly increasing thresholds, starting at
/// one, with `sup_n Σ_{i ≥ N_k} A^n_i < 2^{-k}`. The supremum includes the
/// limit. `top` is the last index on which the weight is defined.
pub fn build_weight(sequences: &[BlockMass], limit: &BlockMass, delta0: f64, top: usize) -> Result<Envelope> {
    if !(delta0 > 0.0 && delta0 <= 1.0) {
        return Err(Error::Domain(format!("delta0 {delta0} not in (0,1]")));
    }
    limit.check()?;
    let mut last = f64::INFINITY;
    for (n, s) in sequences.iter().enumerate() {
        s.check()?;
        let d = s.l1_distance(limit);
        if d > last + 1e-10 {
            return Err(Error::Convergence(format!("l1 distance to the limit grows at member {n}: {d:e} > {last:e}")));
        }
        last = d;
    }
    let all: Vec<&BlockMass> = sequences.iter().chain(std::iter::once(limit)).collect();
    let sup_tail = |i: usize| all.iter().map(|s| s.suffix(i)).fold(0.0, f64::max);

    let mut thresholds = Vec::new();
    let mut next = 1usize;
    let mut k = 0i32;
    'outer: while next <= top {
        let bound = 2f64.powi(-k);
        let mut i = next;
        while sup_tail(i) >= bound {
            i += 1;
            if i > top {
                break 'outer;
            }
        }
        thresholds.push(i);
        next = i + 1;
        k += 1;
    }
    let mut values = vec![1.0; top + 1];
    for (k, &start) in thresholds.iter().enumerate() {
        let end = thresholds.get(k + 1).copied().unwrap_or(top + 1);
        for v in values.iter_mut().take(end).skip(start) {
            *v = 2f64.powf(k as f64 * delta0);
        }
    }
    Ok(Envelope { weight: AcceptableWeight { delta0, values }, thresholds })
}

/// Smallest index in `0..=top` with `ω_N ≥ c4/ε`.
pub fn tail_cutoff(w: &AcceptableWeight, c4: f64, eps: f64) -> Result<i32> {
    if !(c4 > 0.0 && eps > 0.0) {
        return Err(Error::Domain(format!("need positive constant and tolerance, got {c4}, {eps}")));
    }
    let target = c4 / eps;
    (0..=w.top() as i32)
        .find(|&i| w.at(i) >= target)
        .ok_or_else(|| Error::Range(format!("weight tops out at {} below {target}", w.at(w.top() as i32))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_examples() {
        assert!(AcceptableWeight::identity(0.5, 10).validate());
        assert!(AcceptableWeight::geometric(0.5, 0.5, 10).validate());
        assert!(!AcceptableWeight::geometric(0.5, 1.0, 10).validate());
        assert!(!AcceptableWeight { delta0: 0.5, values: vec![1.0, 0.9] }.validate());
        assert!(!AcceptableWeight { delta0: 1.5, values: vec![1.0] }.validate());
    }

    #[test]
    fn geometric_masses_give_shifted_thresholds() {
        let a = BlockMass::geometric(0.5, 40);
        let env = build_weight(&[a.clone()], &a, 0.5, 30).unwrap();
        let expect: Vec<usize> = (0..env.thresholds.len()).map(|k| k + 2).collect();
        assert_eq!(env.thresholds, expect);
        for i in 0..=30 {
            let w = if i >= 2 { 2f64.powf((i as f64 - 2.0) / 2.0) } else { 1.0 };
            assert_eq!(env.weight.at(i), w, "index {i}");
        }
        assert!(env.weight.validate());
    }

    #[test]
    fn zero_masses_grow_at_full_rate() {
        let z = BlockMass::new(vec![0.0; 12], 0.0);
        let env = build_weight(&[z.clone()], &z, 0.5, 10).unwrap();
        assert_eq!(env.thresholds, (1..=10).collect::<Vec<_>>());
        assert_eq!(env.weight.at(10), 2f64.powf(4.5));
    }

    #[test]
    fn duplicates_do_not_change_weight() {
        let a = BlockMass::geometric(0.5, 40);
        let one = build_weight(&[a.clone()], &a, 0.5, 20).unwrap();
        let two = build_weight(&[a.clone(), a.clone()], &a, 0.5, 20).unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn rejects_bad_families() {
        let a = BlockMass::geometric(0.5, 10);
        let far = BlockMass::new(vec![3.0; 10], 0.0);
        assert!(matches!(build_weight(&[a.clone(), far], &a, 0.5, 8), Err(Error::Convergence(_))));
        let neg = BlockMass::new(vec![-1.0], 0.0);
        assert!(matches!(build_weight(&[neg], &a, 0.5, 8), Err(Error::Precondition(_))));
    }

    #[test]
    fn cutoff_examples() {
        let a = BlockMass::geometric(0.5, 40);
        let w = build_weight(&[a.clone()], &a, 0.5, 30).unwrap().weight;
        assert_eq!(tail_cutoff(&w, 8.0, 1.0).unwrap(), 8);
        assert_eq!(tail_cutoff(&w, 1.0, 1.0).unwrap(), 0);
        assert_eq!(tail_cutoff(&w, 2.0, 5.0).unwrap(), 0);
        assert!(matches!(tail_cutoff(&w, 1e9, 1.0), Err(Error::Range(_))));
        assert!(tail_cutoff(&w, 1.0, 0.0).is_err());
    }

    #[test]
    fn uniform_bound_holds() {
        let fam: Vec<BlockMass> = (1..=10)
            .map(|n| {
                let mut v: Vec<f64> = (0..20).map(|i| 0.5f64.powi(i)).collect();
                v[12] += 2f64.powi(-(n as i32));
                BlockMass::new(v, 0.0)
            })
            .collect();
        let lim = BlockMass::new((0..20).map(|i| 0.5f64.powi(i)).collect(), 0.0);
        let env = build_weight(&fam, &lim, 0.5, 19).unwrap();
        for a in &fam {
            assert!(a.weighted(&env.weight) <= env.uniform_bound(a));
        }
    }
}
