use super::{check_triple, Gain, GainKind};
use crate::error::{Error, Result};
use crate::signal::Series;

/// Prefix sums `prefix[t] = X_1 + ... + X_t`, `prefix[0] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeSums {
    prefix: Vec<f64>,
}

impl CumulativeSums {
    pub fn new(values: &[f64]) -> Result<Self> {
        let mut prefix = Vec::with_capacity(values.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for (i, &x) in values.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite(i));
            }
            acc += x;
            prefix.push(acc);
        }
        Ok(Self { prefix })
    }

    pub fn from_series(series: &Series) -> Result<Self> {
        if series.dim() != 1 {
            return Err(Error::config(format!(
                "cumulative sums need a univariate series; got dimension {}",
                series.dim()
            )));
        }
        Self::new(series.values())
    }

    /// Number of observations `T`.
    pub fn len(&self) -> usize {
        self.prefix.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    /// `X_{a+1} + ... + X_b`.
    #[inline]
    pub fn segment_sum(&self, a: usize, b: usize) -> f64 {
        self.prefix[b] - self.prefix[a]
    }

    #[inline]
    pub(crate) fn cusum_unchecked(&self, l: usize, s: usize, r: usize) -> f64 {
        let n = (r - l) as f64;
        let left = (s - l) as f64;
        let right = (r - s) as f64;
        (right / (n * left)).sqrt() * self.segment_sum(l, s) - (left / (n * right)).sqrt() * self.segment_sum(s, r)
    }
}

/// Signed CUSUM statistic of `(l, r]` at `s`, in `O(1)`.
pub fn cusum(sums: &CumulativeSums, l: usize, s: usize, r: usize) -> Result<f64> {
    check_triple(l, s, r, sums.len())?;
    Ok(sums.cusum_unchecked(l, s, r))
}

/// Absolute CUSUM gain on observed data.
#[derive(Debug, Clone)]
pub struct CusumGain {
    sums: CumulativeSums,
}

impl CusumGain {
    pub fn new(series: &Series) -> Result<Self> {
        Ok(Self {
            sums: CumulativeSums::from_series(series)?,
        })
    }

    pub fn from_sums(sums: CumulativeSums) -> Self {
        Self { sums }
    }

    pub fn sums(&self) -> &CumulativeSums {
        &self.sums
    }
}

impl Gain for CusumGain {
    fn kind(&self) -> GainKind {
        GainKind::CusumAbs
    }

    fn len(&self) -> usize {
        self.sums.len()
    }

    fn gain(&self, l: usize, s: usize, r: usize) -> Result<f64> {
        check_triple(l, s, r, self.sums.len())?;
        Ok(self.sums.cusum_unchecked(l, s, r).abs())
    }
}
