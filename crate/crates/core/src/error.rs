use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("non-finite evaluation point {0}")]
    NonFiniteArgument(f64),

    /// The displacement left the chart `min v' > -1` (or the nodal map stopped increasing).
    #[error("chart violation: min derivative {min_derivative:e} at or below threshold {threshold:e}")]
    ChartViolation { min_derivative: f64, threshold: f64 },

    #[error("inversion did not converge at x = {x} (residual {residual:e})")]
    ConvergenceFailure { x: f64, residual: f64 },

    #[error("non-positive time step {0}")]
    InvalidStep(f64),

    #[error("requested time {0} is not available in both histories")]
    TimeMismatch(f64),

    #[error("solution became non-finite at t = {0}")]
    NonFinite(f64),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
