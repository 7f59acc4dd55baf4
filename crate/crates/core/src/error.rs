use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("invalid interval ({l}, {r}] for a series of length {len}")]
    InvalidInterval { l: usize, r: usize, len: usize },

    #[error("split {s} is not strictly inside ({l}, {r}]")]
    InvalidSplit { l: usize, s: usize, r: usize },

    #[error("segment ({l}, {r}] is shorter than the minimal segment length {min_seg}")]
    SegmentTooShort { l: usize, r: usize, min_seg: usize },

    #[error("covariance factorization failed on ({l}, {r}]; ridge too small?")]
    Factorization { l: usize, r: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("search interval ({l}, {r}] is too short: {reason}")]
    SearchTooShort { l: usize, r: usize, reason: &'static str },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Self::InvalidConfig(msg.into())
    }

    pub(crate) fn signal(msg: impl Into<String>) -> Self {
        Self::InvalidSignal(msg.into())
    }
}
