use thiserror::Error;

/// Errors produced by the numerical kernels.
#[derive(Debug, Error)]
pub enum ApxError {
    #[error("grid size must be a power of two and at least 4, got {0}")]
    BadGridSize(usize),

    #[error("grid with {n_points} points cannot represent degree {degree} exactly (need at least {needed} points)")]
    GridTooCoarse {
        degree: usize,
        n_points: usize,
        needed: usize,
    },

    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    #[error("weight has a pole at x = {0}; pointwise evaluation is undefined there")]
    WeightPole(f64),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("weight is not in the admissible class for p = {p}: {reason}")]
    NotInClass { p: f64, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("empty input: {0}")]
    Empty(String),
}

pub type Result<T> = std::result::Result<T, ApxError>;
