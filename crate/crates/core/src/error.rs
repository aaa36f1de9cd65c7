use thiserror::Error;

/// Errors produced by the curvflow library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid speed function: {0}")]
    InvalidSpec(String),

    #[error("point outside the positive cone: {0}")]
    Domain(String),

    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("jacobi iteration did not converge after {sweeps} sweeps (off-diagonal mass {residual:e})")]
    ConvergenceFailure { sweeps: usize, residual: f64 },

    #[error("degenerate spectrum: eigenvalues {0} and {1} are closer than the gap threshold")]
    DegenerateSpectrum(usize, usize),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("initial shape is not strictly convex: {0}")]
    NonConvexShape(String),

    #[error("convexity lost: {0}")]
    ConvexityLost(String),

    #[error("explicit scheme became unstable: {0}")]
    StabilityFailure(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

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
