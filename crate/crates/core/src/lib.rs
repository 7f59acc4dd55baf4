//! Change point detection built around optimistic search.
//!
//! Optimistic search locates the maximiser of a gain function `G_(L,R](s)` with a
//! logarithmic number of evaluations, in the spirit of golden-section search. The
//! crate provides:
//!
//! - [`signal`]: piecewise-constant and covariance-change signal models, plus
//!   deterministic generators for the benchmark setups.
//! - [`gain`]: CUSUM, population CUSUM and covariance log-determinant gains behind
//!   an evaluation-counting [`gain::GainOracle`].
//! - [`search`]: naive, advanced and combined optimistic search, the dyadic-grid
//!   variant with boundary exclusion, and the full-grid baseline.
//! - [`segmentation`]: optimistic binary segmentation, seeded intervals and
//!   candidate selection (greedy and narrowest-over-threshold).
//! - [`bench`]: Hausdorff distance and the experiment runners.

pub mod bench;
pub mod error;
pub mod gain;
pub mod rng;
pub mod search;
pub mod segmentation;
pub mod signal;

pub use error::{Error, Result};
pub use gain::{CumulativeSums, Gain, GainOracle};
pub use search::{SearchConfig, SearchKind, SearchOutcome};
pub use segmentation::{Segmentation, SegmentationConfig, Selection};
pub use signal::{CovarianceSignal, Interval, PiecewiseSignal, RngSpec, Series};
