//! Time-stamped sequences of fields with cached dyadic block norms.

use crate::besov::{block_norms, spacetime_norm, BesovIndex, Cutoff, NormSeries, TimeNormSpec};
use crate::envelope::AcceptableWeight;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;

#[derive(Debug, Clone, PartialEq)]
pub struct CachedNorms {
    pub slot: String,
    pub p: f64,
    pub series: Vec<NormSeries>,
}

/// Named slots (for instance `a` and `u`) sampled at strictly increasing
/// times starting at zero.
#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: Grid,
    slots: Vec<String>,
    times: Vec<f64>,
    states: Vec<Vec<Field>>,
    cache: Vec<CachedNorms>,
}

impl Trajectory {
    pub fn new(grid: &Grid, slots: &[&str]) -> Self {
        Trajectory {
            grid: grid.clone(),
            slots: slots.iter().map(|s| s.to_string()).collect(),
            times: Vec::new(),
            states: Vec::new(),
            cache: Vec::new(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn slots(&self) -> &[String] {
        &self.slots
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

    pub fn horizon(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn push(&mut self, t: f64, fields: Vec<Field>) -> Result<()> {
        if fields.len() != self.slots.len() {
            return Err(Error::Shape(format!("{} fields for {} slots", fields.len(), self.slots.len())));
        }
        if fields.iter().any(|f| f.grid() != &self.grid) {
            return Err(Error::Shape("state lives on a different grid".into()));
        }
        match self.times.last() {
            None if t != 0.0 => return Err(Error::Data(format!("first sample at t={t}, expected 0"))),
            Some(&last) if t <= last => return Err(Error::Data(format!("time {t} not after {last}"))),
            _ => {}
        }
        self.times.push(t);
        self.states.push(fields);
        self.cache.clear();
        Ok(())
    }

    pub fn slot_index(&self, slot: &str) -> Result<usize> {
        self.slots.iter().position(|s| s == slot).ok_or_else(|| Error::Shape(format!("no slot named {slot}")))
    }

    pub fn state(&self, i: usize) -> &[Field] {
        &self.states[i]
    }

    pub fn field(&self, slot: &str, i: usize) -> Result<&Field> {
        Ok(&self.states[i][self.slot_index(slot)?])
    }

    pub fn series(&self, slot: &str) -> Result<Vec<&Field>> {
        let k = self.slot_index(slot)?;
        Ok(self.states.iter().map(|s| &s[k]).collect())
    }

    pub fn last(&self, slot: &str) -> Result<&Field> {
        if self.is_empty() {
            return Err(Error::Data("empty trajectory".into()));
        }
        self.field(slot, self.len() - 1)
    }

    /// Computes and stores block norms of every slot for exponent `p`.
    pub fn cache_norms(&mut self, p: f64) -> Result<()> {
        for (k, slot) in self.slots.clone().iter().enumerate() {
            if self.cached(slot, p).is_some() {
                continue;
            }
            let series = self.states.iter().map(|s| block_norms(&s[k], p)).collect::<Result<Vec<_>>>()?;
            self.cache.push(CachedNorms { slot: slot.clone(), p, series });
        }
        Ok(())
    }

    pub fn cached(&self, slot: &str, p: f64) -> Option<&CachedNorms> {
        self.cache.iter().find(|c| c.slot == slot && c.p == p)
    }

    pub fn cache_entries(&self) -> &[CachedNorms] {
        &self.cache
    }

    pub(crate) fn set_cache(&mut self, cache: Vec<CachedNorms>) {
        self.cache = cache;
    }

    /// Block norms of one slot at every stored time, from the cache when
    /// available.
    pub fn norm_series(&self, slot: &str, p: f64) -> Result<Vec<NormSeries>> {
        if let Some(c) = self.cached(slot, p) {
            return Ok(c.series.clone());
        }
        self.series(slot)?.into_iter().map(|f| block_norms(f, p)).collect()
    }

    pub fn spacetime_norm(
        &self,
        slot: &str,
        idx: BesovIndex,
        spec: TimeNormSpec,
        w: Option<&AcceptableWeight>,
        cutoff: Cutoff,
    ) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::Data("empty trajectory".into()));
        }
        spacetime_norm(&self.times, &self.norm_series(slot, idx.p)?, idx, spec, w, cutoff)
    }

    /// Slotwise difference of two trajectories sampled at the same times.
    pub fn difference(&self, other: &Trajectory) -> Result<Trajectory> {
        if self.slots != other.slots || self.len() != other.len() {
            return Err(Error::Shape("trajectories have different layouts".into()));
        }
        let mut out = Trajectory::new(&self.grid, &self.slots.iter().map(|s| s.as_str()).collect::<Vec<_>>());
        for i in 0..self.len() {
            if (self.times[i] - other.times[i]).abs() > 1e-12 * self.horizon().max(1.0) {
                return Err(Error::Data(format!("sample {i} at different times")));
            }
            let diff = self.states[i].iter().zip(&other.states[i]).map(|(a, b)| a.sub(b)).collect::<Result<Vec<_>>>()?;
            out.push(self.times[i], diff)?;
        }
        Ok(out)
    }

    /// Applies a field map to every state of one slot.
    pub fn map_slot<F>(&self, slot: &str, f: F) -> Result<Trajectory>
    where
        F: Fn(&Field) -> Result<Field>,
    {
        let k = self.slot_index(slot)?;
        let mut out = self.clone();
        out.cache.clear();
        for s in out.states.iter_mut() {
            s[k] = f(&s[k])?;
        }
        Ok(out)
    }

    /// Keeps only the samples with `t ≤ horizon`.
    pub fn truncate(&self, horizon: f64) -> Trajectory {
        let n = self.times.iter().take_while(|&&t| t <= horizon * (1.0 + 1e-12)).count();
        let mut out = self.clone();
        out.times.truncate(n);
        out.states.truncate(n);
        out.cache.clear();
        out
    }

    /// Temporal trapezoid integral of a per-sample scalar.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(usize) -> Result<f64>,
    {
        let vals = (0..self.len()).map(&f).collect::<Result<Vec<_>>>()?;
        Ok(self.times.windows(2).zip(vals.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum())
    }

    /// Largest per-sample scalar.
    pub fn sup<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(usize) -> Result<f64>,
    {
        (0..self.len()).map(f).try_fold(0.0f64, |m, v| Ok(m.max(v?)))
    }
}
