//! Multivariate Gaussian log-likelihood gain for covariance changes.
//!
//! For a segment `(a, b]` the fitted covariance is the (mean-centred, divisor `n`)
//! empirical covariance plus `ridge * sqrt(T / (b - a)) * I`. The gain of splitting
//! `(l, r]` at `s` is
//!
//! ```text
//! ((r - l) logdet S_(l,r] - (s - l) logdet S_(l,s] - (r - s) logdet S_(s,r]) / T
//! ```

use super::{check_triple, Gain, GainKind};
use crate::error::{Error, Result};
use crate::signal::{CovarianceSignal, Series};
use nalgebra::{Cholesky, DMatrix};

/// Above this dimension segment moments are recomputed from the rows instead of
/// being read from per-pair prefix sums.
pub const PREFIX_DIM_LIMIT: usize = 64;

fn logdet(matrix: DMatrix<f64>) -> Option<f64> {
    let chol = Cholesky::new(matrix)?;
    Some(2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

#[derive(Debug, Clone)]
pub struct CovLogdetGain {
    data: Series,
    ridge: f64,
    min_seg: usize,
    /// `(T + 1) x p` prefix sums of the coordinates.
    first: Option<Vec<f64>>,
    /// `(T + 1) x p(p+1)/2` prefix sums of the upper-triangular cross products.
    second: Option<Vec<f64>>,
}

impl CovLogdetGain {
    /// `min_seg` defaults to `ceil(0.01 T)`.
    pub fn new(data: Series, ridge: f64, min_seg: Option<usize>) -> Result<Self> {
        if !(ridge > 0.0 && ridge.is_finite()) {
            return Err(Error::config(format!("ridge must be positive; got {ridge}")));
        }
        let len = data.len();
        let min_seg = min_seg.unwrap_or_else(|| len.div_ceil(100)).max(1);
        let p = data.dim();
        let (first, second) = if p <= PREFIX_DIM_LIMIT {
            let pairs = p * (p + 1) / 2;
            let mut first = vec![0.0; (len + 1) * p];
            let mut second = vec![0.0; (len + 1) * pairs];
            for (t, row) in data.rows().enumerate() {
                let (done, next) = first.split_at_mut((t + 1) * p);
                let prev = &done[t * p..];
                for j in 0..p {
                    next[j] = prev[j] + row[j];
                }
                let (done, next) = second.split_at_mut((t + 1) * pairs);
                let prev = &done[t * pairs..];
                let mut k = 0;
                for i in 0..p {
                    for j in i..p {
                        next[k] = prev[k] + row[i] * row[j];
                        k += 1;
                    }
                }
            }
            (Some(first), Some(second))
        } else {
            (None, None)
        };
        Ok(Self {
            data,
            ridge,
            min_seg,
            first,
            second,
        })
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    /// Regularised covariance of rows `(a, b]`.
    pub fn segment_covariance(&self, a: usize, b: usize) -> DMatrix<f64> {
        let p = self.data.dim();
        let n = (b - a) as f64;
        let mut mean = vec![0.0; p];
        let mut cov = DMatrix::zeros(p, p);
        match (&self.first, &self.second) {
            (Some(first), Some(second)) => {
                let pairs = p * (p + 1) / 2;
                for j in 0..p {
                    mean[j] = (first[b * p + j] - first[a * p + j]) / n;
                }
                let mut k = 0;
                for i in 0..p {
                    for j in i..p {
                        let v = (second[b * pairs + k] - second[a * pairs + k]) / n - mean[i] * mean[j];
                        cov[(i, j)] = v;
                        cov[(j, i)] = v;
                        k += 1;
                    }
                }
            }
            _ => {
                for t in a..b {
                    for (m, x) in mean.iter_mut().zip(self.data.row(t)) {
                        *m += x / n;
                    }
                }
                for t in a..b {
                    let row = self.data.row(t);
                    for i in 0..p {
                        for j in i..p {
                            cov[(i, j)] += (row[i] - mean[i]) * (row[j] - mean[j]) / n;
                        }
                    }
                }
                for i in 0..p {
                    for j in 0..i {
                        cov[(i, j)] = cov[(j, i)];
                    }
                }
            }
        }
        let penalty = self.ridge * (self.data.len() as f64 / n).sqrt();
        for i in 0..p {
            cov[(i, i)] += penalty;
        }
        cov
    }

    fn segment_logdet(&self, a: usize, b: usize) -> Result<f64> {
        logdet(self.segment_covariance(a, b)).ok_or(Error::Factorization { l: a, r: b })
    }
}

impl Gain for CovLogdetGain {
    fn kind(&self) -> GainKind {
        GainKind::CovLogdet
    }

    fn len(&self) -> usize {
        self.data.len()
    }

    fn min_seg(&self) -> usize {
        self.min_seg
    }

    fn gain(&self, l: usize, s: usize, r: usize) -> Result<f64> {
        check_triple(l, s, r, self.len())?;
        if s - l < self.min_seg || r - s < self.min_seg {
            return Err(Error::SegmentTooShort {
                l,
                r,
                min_seg: self.min_seg,
            });
        }
        let whole = self.segment_logdet(l, r)?;
        let left = self.segment_logdet(l, s)?;
        let right = self.segment_logdet(s, r)?;
        Ok(((r - l) as f64 * whole - (s - l) as f64 * left - (r - s) as f64 * right) / self.len() as f64)
    }
}

/// The same gain with the true segment covariances plugged in: `Sigma_(a,b]` is the
/// length-weighted mix of the covariances active on `(a, b]`.
#[derive(Debug, Clone)]
pub struct PopulationCovGain {
    signal: CovarianceSignal,
    min_seg: usize,
}

impl PopulationCovGain {
    pub fn new(signal: CovarianceSignal) -> Self {
        Self { signal, min_seg: 1 }
    }

    pub fn with_min_seg(mut self, min_seg: usize) -> Self {
        self.min_seg = min_seg.max(1);
        self
    }

    fn segment_logdet(&self, a: usize, b: usize) -> Result<f64> {
        logdet(self.signal.segment_covariance(a, b)).ok_or(Error::Factorization { l: a, r: b })
    }
}

impl Gain for PopulationCovGain {
    fn kind(&self) -> GainKind {
        GainKind::PopulationCovLogdet
    }

    fn len(&self) -> usize {
        self.signal.len()
    }

    fn min_seg(&self) -> usize {
        self.min_seg
    }

    fn gain(&self, l: usize, s: usize, r: usize) -> Result<f64> {
        check_triple(l, s, r, self.len())?;
        if s - l < self.min_seg || r - s < self.min_seg {
            return Err(Error::SegmentTooShort {
                l,
                r,
                min_seg: self.min_seg,
            });
        }
        let whole = self.segment_logdet(l, r)?;
        let left = self.segment_logdet(l, s)?;
        let right = self.segment_logdet(s, r)?;
        Ok(((r - l) as f64 * whole - (s - l) as f64 * left - (r - s) as f64 * right) / self.len() as f64)
    }
}
