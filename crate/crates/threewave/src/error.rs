use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("ill-conditioned origin fit (condition number {0:.3e})")]
    IllConditionedFit(f64),
    #[error("tail integral does not converge: {0}")]
    TailDivergence(String),
    #[error("integrand diverges at the origin: {0}")]
    OriginDivergence(String),
    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),
    #[error("pole at {0}")]
    Pole(String),
    #[error("branch tracking failed: {0}")]
    BranchTracking(String),
    #[error("contour truncation: {0}")]
    ContourTruncation(String),
    #[error("quadrature did not converge: value {value:.6e}, error estimate {error:.3e}")]
    Quadrature { value: f64, error: f64 },
    #[error("stability violation: {0}")]
    Stability(String),
    #[error("condensate density became nonpositive: n = {0}")]
    NonPositiveCondensate(f64),
    #[error("nonmonotone trace at index {0}")]
    NonmonotoneTrace(usize),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Configuration and input-validation errors, as opposed to numerical ones.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidRange(_) | Error::Json(_))
    }
}
