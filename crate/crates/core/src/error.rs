//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("malformed spin window at site {site}: {reason}")]
    MalformedWindow { site: i64, reason: String },
    #[error("site range {lo}..={hi} too small: {reason}")]
    RangeTooSmall { lo: i64, hi: i64, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("leakage budget exceeded at t = {time}: probability {prob:.3e} within {margin} sites of a wall")]
    Leakage { time: f64, prob: f64, margin: usize },
    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("numerical convergence failure: {0}")]
    Convergence(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for violations of a numerical budget (leakage, convergence, size caps).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Leakage { .. } | Error::DimensionCap { .. } | Error::Convergence(_)
        )
    }
}
