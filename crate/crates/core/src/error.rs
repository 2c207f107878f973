use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum FppError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown example id {0} (expected 1..=7)")]
    UnknownExample(u8),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("quadrature did not reach tolerance {tolerance:e} (estimated error {estimate:e} after {intervals} subintervals)")]
    Quadrature {
        tolerance: f64,
        estimate: f64,
        intervals: usize,
    },

    #[error("linear system is singular")]
    SingularSystem,

    #[error("series did not converge within {0} terms")]
    NonConvergence(usize),

    #[error("Monte Carlo estimate unreliable: {censored} of {total} paths censored")]
    Censored { censored: usize, total: usize },

    #[error("target q = {target} unreachable within bounds; best achieved q = {best_q}, reachable range [{q_min}, {q_max}]")]
    Unreachable {
        target: f64,
        best_q: f64,
        q_min: f64,
        q_max: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, FppError>;

pub(crate) fn invalid(msg: impl Into<String>) -> FppError {
    FppError::InvalidParameter(msg.into())
}
