//! Gain functions `G_(l,r](s)` and the evaluation-counting oracle.
//!
//! A [`Gain`] is an immutable, shareable description of how to score a split `s`
//! of the context `(l, r]`. Searches never call it directly; they go through a
//! [`GainOracle`], which owns the evaluation counter used for all cost accounting.

mod covariance;
mod cusum;
mod population;

pub use covariance::{CovLogdetGain, PopulationCovGain};
pub use cusum::{cusum, CumulativeSums, CusumGain};
pub use population::{population_cusum, population_sq_gain, PopulationCusumGain, PopulationSqGain};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainKind {
    CusumAbs,
    PopulationCusumAbs,
    PopulationSqError,
    CovLogdet,
    PopulationCovLogdet,
    Custom,
}

/// A gain function over a fixed series or signal of length `len()`.
pub trait Gain: Send + Sync {
    fn kind(&self) -> GainKind;

    /// Number of observations `T`.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Smallest admissible distance between a split and either context boundary.
    fn min_seg(&self) -> usize {
        1
    }

    /// `G_(l,r](s)` for `0 <= l < s < r <= T`.
    fn gain(&self, l: usize, s: usize, r: usize) -> Result<f64>;
}

pub(crate) fn check_triple(l: usize, s: usize, r: usize, len: usize) -> Result<()> {
    if r > len || l >= r {
        return Err(Error::InvalidInterval { l, r, len });
    }
    if !(l < s && s < r) {
        return Err(Error::InvalidSplit { l, s, r });
    }
    Ok(())
}

/// A gain given by a closure `f(l, s, r)`, for synthetic gain curves.
pub struct FnGain<F> {
    len: usize,
    min_seg: usize,
    f: F,
}

impl<F> FnGain<F>
where
    F: Fn(usize, usize, usize) -> f64 + Send + Sync,
{
    pub fn new(len: usize, f: F) -> Self {
        Self { len, min_seg: 1, f }
    }

    pub fn with_min_seg(mut self, min_seg: usize) -> Self {
        self.min_seg = min_seg.max(1);
        self
    }
}

impl<F> Gain for FnGain<F>
where
    F: Fn(usize, usize, usize) -> f64 + Send + Sync,
{
    fn kind(&self) -> GainKind {
        GainKind::Custom
    }

    fn len(&self) -> usize {
        self.len
    }

    fn min_seg(&self) -> usize {
        self.min_seg
    }

    fn gain(&self, l: usize, s: usize, r: usize) -> Result<f64> {
        check_triple(l, s, r, self.len)?;
        if s - l < self.min_seg || r - s < self.min_seg {
            return Err(Error::SegmentTooShort {
                l,
                r,
                min_seg: self.min_seg,
            });
        }
        Ok((self.f)(l, s, r))
    }
}

/// Single-owner evaluation handle on a [`Gain`].
///
/// `eval_count` increases by exactly one per [`evaluate`](Self::evaluate) call,
/// whether or not the call succeeds. Cloning yields a fresh oracle with a zero count.
pub struct GainOracle<'g> {
    gain: &'g dyn Gain,
    evals: usize,
}

impl<'g> GainOracle<'g> {
    pub fn new(gain: &'g dyn Gain) -> Self {
        Self { gain, evals: 0 }
    }

    pub fn evaluate(&mut self, l: usize, s: usize, r: usize) -> Result<f64> {
        self.evals += 1;
        self.gain.gain(l, s, r)
    }

    pub fn eval_count(&self) -> usize {
        self.evals
    }

    pub fn kind(&self) -> GainKind {
        self.gain.kind()
    }

    pub fn len(&self) -> usize {
        self.gain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gain.is_empty()
    }

    pub fn min_seg(&self) -> usize {
        self.gain.min_seg()
    }

    pub fn gain_fn(&self) -> &'g dyn Gain {
        self.gain
    }
}

impl Clone for GainOracle<'_> {
    fn clone(&self) -> Self {
        Self::new(self.gain)
    }
}

impl std::fmt::Debug for GainOracle<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GainOracle")
            .field("kind", &self.kind())
            .field("evals", &self.evals)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Series;

    #[test]
    fn counter_counts_every_call() {
        let series = Series::univariate(vec![0.0, 0.0, 1.0, 1.0], 0).unwrap();
        let gain = CusumGain::new(&series).unwrap();
        let mut oracle = GainOracle::new(&gain);
        for i in 1..=10 {
            oracle.evaluate(0, 2, 4).unwrap();
            assert_eq!(oracle.eval_count(), i);
        }
        assert!(oracle.evaluate(0, 0, 4).is_err());
        assert_eq!(oracle.eval_count(), 11);
        let fresh = oracle.clone();
        assert_eq!(fresh.eval_count(), 0);
        assert_eq!(fresh.kind(), GainKind::CusumAbs);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let series = Series::univariate((0..50).map(|i| ((i * 37) % 11) as f64).collect(), 0).unwrap();
        let gain = CusumGain::new(&series).unwrap();
        let mut oracle = GainOracle::new(&gain);
        let a = oracle.evaluate(3, 20, 44).unwrap();
        let b = oracle.evaluate(3, 20, 44).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
