use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {estimate:e})")]
    NonConvergence { subdivisions: usize, estimate: f64 },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid ensemble spec: {0}")]
    InvalidSpec(String),
    #[error("chart overflow: grid point ({x}, {y}) maps outside the open hemisphere")]
    ChartOverflow { x: f64, y: f64 },
    #[error("degenerate grid: {ties} of {total} vertices below the tie threshold")]
    DegenerateGrid { ties: usize, total: usize },
    #[error("premise violated at ({x}, {y}): {reason}")]
    PremiseViolation { x: f64, y: f64, reason: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("experiment aborted: {0}")]
    Aborted(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
