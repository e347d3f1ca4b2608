use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point outside {domain}: {detail}")]
    OutsideDomain { domain: &'static str, detail: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("not a Schur-class function: {0}")]
    NotSchur(String),
    #[error("singular evaluation: {0}")]
    SingularEvaluation(String),
    #[error("ill-conditioned feedback inversion, condition estimate {cond:.3e}")]
    IllConditionedFeedback { cond: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("infeasible interpolation constraints: {0}")]
    InfeasibleConstraints(String),
    #[error("rank-deficient constraint matrix: {0}")]
    RankDeficientConstraints(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("Fourier order too low: {0}")]
    OrderTooLow(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
