use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("trajectory has no samples")]
    EmptyTrajectory,

    #[error("horizon {horizon} exceeds trajectory length {len}")]
    HorizonTooLong { horizon: usize, len: usize },

    #[error("horizon {horizon} is too short for lag {lag} (need at least lag + 1)")]
    HorizonTooShort { horizon: usize, lag: usize },

    #[error("prefix length {prefix} exceeds horizon {horizon}")]
    PrefixExceedsHorizon { prefix: usize, horizon: usize },

    #[error("dimension mismatch in {block}: {detail}")]
    DimensionMismatch { block: String, detail: String },

    #[error("{path}: line {line}, column {column}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        msg: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    #[error("polynomial has degree zero and no roots")]
    DegreeZero,

    #[error("polynomial matrix is identically zero")]
    ZeroMatrix,

    #[error("denominator determinant is the zero polynomial")]
    SingularDenominator,

    #[error("interconnection is ill-posed: {0}")]
    IllPosedInterconnection(String),

    #[error("system is not stable (spectral radius {radius:.6})")]
    UnstableSystem { radius: f64 },

    #[error("closed loop is not stable (spectral radius {radius:.6})")]
    UnstableClosedLoop { radius: f64 },

    #[error("transfer function is not proper: {0}")]
    NotProper(String),

    #[error("data rank {rank} differs from the required {required}")]
    RankConditionViolated { rank: usize, required: usize },

    #[error("constraint nullspace is trivial; the quadratic test is vacuous")]
    DegenerateNullspace,

    #[error("no finite gain below {upper:e}; the loop is unstable or mis-assembled")]
    NoFiniteGain { upper: f64 },

    #[error(
        "prefix nu = {nu} violates nu >= max(lag bound of plant = {lag_bound}, lag of model part + 1 = {model_lag_plus_one})"
    )]
    PrefixPolicy {
        nu: usize,
        lag_bound: usize,
        model_lag_plus_one: usize,
    },

    #[error("noise level must be zero, got {0}")]
    NonzeroNoise(f64),

    #[error("{0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dims(block: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            block: block.into(),
            detail: detail.into(),
        }
    }
}
