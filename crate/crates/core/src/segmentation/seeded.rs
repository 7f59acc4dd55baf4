use crate::error::{Error, Result};
use crate::signal::Interval;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Rounding slack: `l_k` and `s_k` come from powers of `1/a`, which are rarely exact
/// in floating point (`sqrt(2)^2` is not 2).
const SNAP: f64 = 1e-9;

fn floor_snap(x: f64) -> f64 {
    (x + SNAP).floor()
}

fn ceil_snap(x: f64) -> f64 {
    (x - SNAP).ceil()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeededLayer {
    pub k: usize,
    /// Number of intervals `n_k`.
    pub count: usize,
    /// Interval length `l_k`.
    pub length: f64,
    /// Shift `s_k` between consecutive intervals (0 for the first layer).
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeededIntervalSet {
    pub decay: f64,
    pub len: usize,
    pub layers: Vec<SeededLayer>,
    /// Layer by layer, left to right, duplicates and intervals shorter than the
    /// minimum removed.
    pub intervals: Vec<Interval>,
}

impl SeededIntervalSet {
    /// Intervals of layer `k` before filtering, in order.
    pub fn layer_intervals(&self, k: usize) -> Vec<Interval> {
        self.layers
            .iter()
            .find(|layer| layer.k == k)
            .map(|layer| layer_intervals(self.len, layer))
            .unwrap_or_default()
    }
}

fn layer_intervals(len: usize, layer: &SeededLayer) -> Vec<Interval> {
    (0..layer.count)
        .map(|i| {
            let start = i as f64 * layer.shift;
            let l = floor_snap(start) as usize;
            let r = (ceil_snap(start + layer.length) as usize).min(len);
            Interval { l, r }
        })
        .collect()
}

/// Deterministic multiscale interval collection on `(0, T]`.
///
/// Layer `k` has `n_k = 2 ceil((1/a)^(k-1)) - 1` intervals of length
/// `l_k = T a^(k-1)`, evenly shifted by `s_k = (T - l_k) / (n_k - 1)`; the `i`-th is
/// `(floor((i-1) s_k), ceil((i-1) s_k + l_k)]`. Layers run up to
/// `k = ceil(log_{1/a} T)`.
pub fn seeded_intervals(len: usize, decay: f64, min_len: usize) -> Result<SeededIntervalSet> {
    if !(0.5..1.0).contains(&decay) {
        return Err(Error::config(format!("decay must lie in [1/2, 1); got {decay}")));
    }
    if min_len < 2 || min_len > len {
        return Err(Error::config(format!("min_len must lie in 2..={len}; got {min_len}")));
    }
    let t = len as f64;
    let depth = (ceil_snap(t.ln() / (1.0 / decay).ln()) as usize).max(1);
    let mut layers = Vec::with_capacity(depth);
    let mut intervals = Vec::new();
    let mut seen = HashSet::new();
    for k in 1..=depth {
        let growth = (1.0 / decay).powi(k as i32 - 1);
        let count = 2 * ceil_snap(growth) as usize - 1;
        let length = t * decay.powi(k as i32 - 1);
        let shift = if count > 1 {
            (t - length) / (count - 1) as f64
        } else {
            0.0
        };
        let layer = SeededLayer {
            k,
            count,
            length,
            shift,
        };
        for interval in layer_intervals(len, &layer) {
            if interval.len() >= min_len && seen.insert(interval) {
                intervals.push(interval);
            }
        }
        layers.push(layer);
    }
    Ok(SeededIntervalSet {
        decay,
        len,
        layers,
        intervals,
    })
}
