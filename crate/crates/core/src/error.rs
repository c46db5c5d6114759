use thiserror::Error;

#[derive(Debug, Error)]
pub enum SgError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },
    #[error("length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("topology error: {0}")]
    Topology(String),
    #[error("field is not periodic (boundary jump {jump:.3e})")]
    NonPeriodic { jump: f64 },
    #[error("tail of sampled solution misses its asymptote by {gap:.3e}")]
    TailViolation { gap: f64 },
    #[error("time step {dt} violates the CFL limit {limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("solution blew up at t = {time}")]
    BlowUp { time: f64 },
    #[error("{stage}: no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        stage: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("no sign change of f - pi near x = {near}")]
    NoBracket { near: f64 },
    #[error("denominator too small: {0:.3e}")]
    SmallDenominator(f64),
    #[error("point {x} lies outside the sampled range")]
    OutOfRange { x: f64 },
    #[error("not enough data: {0}")]
    InsufficientData(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SgError>;
