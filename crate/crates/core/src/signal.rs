//! Signal models, series containers and the simulation setups.
//!
//! Change points are stored as integer sample indices `c` meaning the distribution
//! changes between observation `c` and `c + 1` (1-based), i.e. segments are the
//! half-open index ranges `(c_{i-1}, c_i]`.

use crate::error::{Error, Result};
pub use crate::rng::RngSpec;
use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Half-open index interval `(l, r]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval {
    pub l: usize,
    pub r: usize,
}

impl Interval {
    /// Checked constructor for a series of length `len`.
    pub fn new(l: usize, r: usize, len: usize) -> Result<Self> {
        if l >= r || r > len {
            return Err(Error::InvalidInterval { l, r, len });
        }
        Ok(Self { l, r })
    }

    pub const fn len(&self) -> usize {
        self.r - self.l
    }

    pub const fn is_empty(&self) -> bool {
        self.r <= self.l
    }

    /// True when `s` is a split strictly inside `(l, r)`.
    pub const fn contains_split(&self, s: usize) -> bool {
        self.l < s && s < self.r
    }
}

fn validate_change_points(len: usize, change_points: &[usize]) -> Result<()> {
    if len == 0 {
        return Err(Error::signal("total length must be positive"));
    }
    let mut prev = 0;
    for &c in change_points {
        if c <= prev || c >= len {
            return Err(Error::signal(format!(
                "change points must be strictly increasing inside (0, {len}); got {change_points:?}"
            )));
        }
        prev = c;
    }
    Ok(())
}

fn indices_from_fractions(len: usize, fractions: &[f64]) -> Result<Vec<usize>> {
    fractions
        .iter()
        .map(|&tau| {
            let scaled = tau * len as f64;
            let rounded = scaled.round();
            if !(tau > 0.0 && tau < 1.0) || (scaled - rounded).abs() > 1e-9 * len as f64 {
                Err(Error::signal(format!(
                    "tau * T must be an integer in (0, T); got {tau} * {len}"
                )))
            } else {
                Ok(rounded as usize)
            }
        })
        .collect()
}

/// Piecewise-constant mean signal with i.i.d. Gaussian noise of known `sigma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPiecewise", into = "RawPiecewise")]
pub struct PiecewiseSignal {
    len: usize,
    change_points: Vec<usize>,
    levels: Vec<f64>,
    sigma: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPiecewise {
    #[serde(rename = "T")]
    len: usize,
    tau_indices: Vec<usize>,
    levels: Vec<f64>,
    sigma: f64,
}

impl TryFrom<RawPiecewise> for PiecewiseSignal {
    type Error = Error;

    fn try_from(raw: RawPiecewise) -> Result<Self> {
        Self::new(raw.len, raw.tau_indices, raw.levels, raw.sigma)
    }
}

impl From<PiecewiseSignal> for RawPiecewise {
    fn from(s: PiecewiseSignal) -> Self {
        Self {
            len: s.len,
            tau_indices: s.change_points,
            levels: s.levels,
            sigma: s.sigma,
        }
    }
}

impl PiecewiseSignal {
    pub fn new(len: usize, change_points: Vec<usize>, levels: Vec<f64>, sigma: f64) -> Result<Self> {
        validate_change_points(len, &change_points)?;
        if levels.len() != change_points.len() + 1 {
            return Err(Error::signal(format!(
                "expected {} levels for {} change points, got {}",
                change_points.len() + 1,
                change_points.len(),
                levels.len()
            )));
        }
        if levels.iter().any(|m| !m.is_finite()) {
            return Err(Error::signal("levels must be finite"));
        }
        if let Some(w) = levels.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::signal(format!(
                "adjacent levels must differ; got {} twice",
                w[0]
            )));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::signal(format!("sigma must be finite and >= 0; got {sigma}")));
        }
        Ok(Self {
            len,
            change_points,
            levels,
            sigma,
        })
    }

    /// Builds the signal from change point fractions `tau_i`, each of which must
    /// land on an integer sample index.
    pub fn from_fractions(len: usize, fractions: &[f64], levels: Vec<f64>, sigma: f64) -> Result<Self> {
        let change_points = indices_from_fractions(len, fractions)?;
        Self::new(len, change_points, levels, sigma)
    }

    /// A signal with no change point.
    pub fn constant(len: usize, level: f64, sigma: f64) -> Result<Self> {
        Self::new(len, Vec::new(), vec![level], sigma)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn change_points(&self) -> &[usize] {
        &self.change_points
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::signal(format!("sigma must be finite and >= 0; got {sigma}")));
        }
        self.sigma = sigma;
        Ok(self)
    }

    pub fn fractions(&self) -> Vec<f64> {
        self.change_points.iter().map(|&c| c as f64 / self.len as f64).collect()
    }

    /// Segment boundaries `0, c_1, ..., c_K, T`.
    fn boundaries(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(0)
            .chain(self.change_points.iter().copied())
            .chain(std::iter::once(self.len))
    }

    /// Minimal segment length in samples (`lambda * T`).
    pub fn min_spacing(&self) -> usize {
        let b: Vec<usize> = self.boundaries().collect();
        b.windows(2).map(|w| w[1] - w[0]).min().unwrap_or(self.len)
    }

    /// Minimal absolute jump between adjacent levels, `None` without change points.
    pub fn min_jump(&self) -> Option<f64> {
        self.levels
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .min_by(f64::total_cmp)
    }

    /// `E[X_t]` for the 1-based observation index `t`.
    pub fn mean_at(&self, t: usize) -> f64 {
        let segment = self.change_points.partition_point(|&c| c < t);
        self.levels[segment]
    }

    /// `sum_{a < t <= b} E[X_t]` from segment overlaps, `O(K)`.
    pub fn mean_sum(&self, a: usize, b: usize) -> f64 {
        let k = self.change_points.len();
        let mut total = 0.0;
        for (i, &mu) in self.levels.iter().enumerate() {
            let start = if i == 0 { 0 } else { self.change_points[i - 1] };
            let end = if i == k { self.len } else { self.change_points[i] };
            let lo = start.max(a);
            let hi = end.min(b);
            if hi > lo {
                total += mu * (hi - lo) as f64;
            }
        }
        total
    }

    /// Noise-free values `E[X_1], ..., E[X_T]`.
    pub fn means(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len);
        for (w, &mu) in self.boundaries().collect::<Vec<_>>().windows(2).zip(&self.levels) {
            out.extend(std::iter::repeat_n(mu, w[1] - w[0]));
        }
        out
    }
}

/// Zero-mean Gaussian vectors whose covariance changes at the change points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCovariance", into = "RawCovariance")]
pub struct CovarianceSignal {
    len: usize,
    change_points: Vec<usize>,
    covariances: Vec<DMatrix<f64>>,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
struct RawCovariance {
    #[serde(rename = "T")]
    len: usize,
    tau_indices: Vec<usize>,
    covariances: Vec<Vec<Vec<f64>>>,
    p: usize,
}

impl TryFrom<RawCovariance> for CovarianceSignal {
    type Error = Error;

    fn try_from(raw: RawCovariance) -> Result<Self> {
        let p = raw.p;
        let mats = raw
            .covariances
            .into_iter()
            .map(|rows| {
                if rows.len() != p || rows.iter().any(|row| row.len() != p) {
                    return Err(Error::signal(format!("covariances must be {p}x{p}")));
                }
                Ok(DMatrix::from_fn(p, p, |i, j| rows[i][j]))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(raw.len, raw.tau_indices, mats)
    }
}

impl From<CovarianceSignal> for RawCovariance {
    fn from(s: CovarianceSignal) -> Self {
        Self {
            len: s.len,
            tau_indices: s.change_points,
            covariances: s
                .covariances
                .iter()
                .map(|m| (0..s.dim).map(|i| (0..s.dim).map(|j| m[(i, j)]).collect()).collect())
                .collect(),
            p: s.dim,
        }
    }
}

impl CovarianceSignal {
    pub fn new(len: usize, change_points: Vec<usize>, covariances: Vec<DMatrix<f64>>) -> Result<Self> {
        validate_change_points(len, &change_points)?;
        if covariances.len() != change_points.len() + 1 {
            return Err(Error::signal(format!(
                "expected {} covariance matrices, got {}",
                change_points.len() + 1,
                covariances.len()
            )));
        }
        let dim = covariances[0].nrows();
        if dim == 0 {
            return Err(Error::signal("dimension must be positive"));
        }
        for (i, sigma) in covariances.iter().enumerate() {
            if sigma.nrows() != dim || sigma.ncols() != dim {
                return Err(Error::signal(format!("covariance {i} is not {dim}x{dim}")));
            }
            if (sigma - sigma.transpose()).amax() > 1e-12 {
                return Err(Error::signal(format!("covariance {i} is not symmetric")));
            }
            if Cholesky::new(sigma.clone()).is_none() {
                return Err(Error::signal(format!("covariance {i} is not positive definite")));
            }
        }
        if let Some(i) = covariances.windows(2).position(|w| (&w[1] - &w[0]).norm() == 0.0) {
            return Err(Error::signal(format!("covariances {i} and {} coincide", i + 1)));
        }
        Ok(Self {
            len,
            change_points,
            covariances,
            dim,
        })
    }

    pub fn from_fractions(len: usize, fractions: &[f64], covariances: Vec<DMatrix<f64>>) -> Result<Self> {
        let change_points = indices_from_fractions(len, fractions)?;
        Self::new(len, change_points, covariances)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn change_points(&self) -> &[usize] {
        &self.change_points
    }

    pub fn covariances(&self) -> &[DMatrix<f64>] {
        &self.covariances
    }

    fn boundaries(&self) -> Vec<usize> {
        std::iter::once(0)
            .chain(self.change_points.iter().copied())
            .chain(std::iter::once(self.len))
            .collect()
    }

    /// Length-weighted convex combination of the segment covariances over `(a, b]`.
    pub fn segment_covariance(&self, a: usize, b: usize) -> DMatrix<f64> {
        let mut acc = DMatrix::zeros(self.dim, self.dim);
        let n = (b - a) as f64;
        for (w, sigma) in self.boundaries().windows(2).zip(&self.covariances) {
            let lo = w[0].max(a);
            let hi = w[1].min(b);
            if hi > lo {
                acc += sigma * ((hi - lo) as f64 / n);
            }
        }
        acc
    }
}

/// Observed data, row-major with `dim` columns per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    values: Vec<f64>,
    dim: usize,
    seed: u64,
}

impl Series {
    pub fn univariate(values: Vec<f64>, seed: u64) -> Result<Self> {
        Self::multivariate(values, 1, seed)
    }

    pub fn multivariate(values: Vec<f64>, dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 || !values.len().is_multiple_of(dim) {
            return Err(Error::signal(format!(
                "{} values do not form rows of dimension {dim}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i / dim));
        }
        Ok(Self { values, dim, seed })
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row `t` (0-based) of a multivariate series.
    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.dim..(t + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }
}

/// Draws `X_t = E[X_t] + sigma * Z_t` with `Z_t` from the Box-Muller stream of `rng`.
pub fn generate_gaussian(signal: &PiecewiseSignal, rng: RngSpec) -> Series {
    let mut normal = rng.normal();
    let sigma = signal.sigma();
    let values = signal
        .means()
        .into_iter()
        .map(|mu| mu + sigma * normal.next_f64())
        .collect();
    Series {
        values,
        dim: 1,
        seed: rng.seed,
    }
}

/// Draws row `t` as `L_i z` with `L_i` the lower Cholesky factor of its segment's
/// covariance and `z` standard normal.
pub fn generate_multivariate(signal: &CovarianceSignal, rng: RngSpec) -> Result<Series> {
    let p = signal.dim();
    let factors = signal
        .covariances()
        .iter()
        .enumerate()
        .map(|(i, sigma)| {
            Cholesky::new(sigma.clone())
                .map(|c| c.l())
                .ok_or_else(|| Error::signal(format!("covariance {i} is not positive definite")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut normal = rng.normal();
    let mut values = Vec::with_capacity(signal.len() * p);
    let bounds = signal.boundaries();
    let mut z = DVector::zeros(p);
    for (w, factor) in bounds.windows(2).zip(&factors) {
        for _ in w[0]..w[1] {
            for zi in z.iter_mut() {
                *zi = normal.next_f64();
            }
            values.extend((factor * &z).iter());
        }
    }
    Series::multivariate(values, p, rng.seed)
}

/// Single mean shift: 100 observations at level 0, then `n` at level 0.5.
pub fn single_shift_signal(n: usize, sigma: f64) -> Result<PiecewiseSignal> {
    PiecewiseSignal::new(100 + n, vec![100], vec![0.0, 0.5], sigma)
}

pub const BLOCKS_CHANGE_POINTS: [usize; 11] = [205, 267, 308, 472, 512, 820, 902, 1332, 1557, 1598, 1659];
pub const BLOCKS_LEVELS: [f64; 12] = [
    0.0, 14.64, -3.66, 7.32, -7.32, 10.98, -4.39, 3.29, 19.03, 7.68, 15.37, 0.0,
];

/// The blocks test signal on 2048 samples with noise level 10.
pub fn blocks_signal() -> PiecewiseSignal {
    PiecewiseSignal::new(2048, BLOCKS_CHANGE_POINTS.to_vec(), BLOCKS_LEVELS.to_vec(), 10.0)
        .expect("blocks signal is valid")
}

/// Up/down pattern at `T/8, 3T/16, T/4` whose population CUSUM on `(0, T]` is
/// exactly zero outside `(T/8, T/4)`.
pub fn cancellation_signal(len: usize, sigma: f64) -> Result<PiecewiseSignal> {
    if len == 0 || !len.is_multiple_of(16) {
        return Err(Error::signal(format!(
            "length must be a positive multiple of 16; got {len}"
        )));
    }
    PiecewiseSignal::new(
        len,
        vec![len / 8, 3 * len / 16, len / 4],
        vec![0.0, 1.0, -1.0, 0.0],
        sigma,
    )
}

/// Chain-network covariance `exp(-|s_i - s_j| / 2)` with unit spacing 0.75, and its
/// variant with the top-left 5x5 block replaced by the identity.
pub fn chain_network_sigma(p: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if p < 6 {
        return Err(Error::signal(format!("chain network needs p >= 6; got {p}")));
    }
    let sigma = DMatrix::from_fn(p, p, |i, j| (-0.5 * 0.75 * i.abs_diff(j) as f64).exp());
    let mut modified = sigma.clone();
    for i in 0..5 {
        for j in 0..5 {
            modified[(i, j)] = if i == j { 1.0 } else { 0.0 };
        }
    }
    Ok((sigma, modified))
}

/// Chain-network layouts used by the covariance study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainLayout {
    /// One change from `Sigma` to the modified matrix at `0.2 T`.
    Single,
    /// Alternating matrices on segments of 100 observations.
    Alternating,
    /// Six segments of 550, 300, 700, 250, 100, 100 observations (scaled to `T`).
    Uneven,
}

pub fn chain_network_signal(layout: ChainLayout, len: usize, p: usize) -> Result<CovarianceSignal> {
    let (sigma, modified) = chain_network_sigma(p)?;
    let change_points: Vec<usize> = match layout {
        ChainLayout::Single => vec![len / 5],
        ChainLayout::Alternating => (1..len.div_ceil(100)).map(|i| i * 100).collect(),
        ChainLayout::Uneven => {
            let mut acc = 0;
            [550, 300, 700, 250, 100]
                .iter()
                .map(|&seg| {
                    acc += seg * len / 2000;
                    acc
                })
                .collect()
        }
    };
    let covariances = (0..=change_points.len())
        .map(|i| if i % 2 == 0 { sigma.clone() } else { modified.clone() })
        .collect();
    CovarianceSignal::new(len, change_points, covariances)
}
