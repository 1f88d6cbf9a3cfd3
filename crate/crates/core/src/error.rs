use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to map failures to exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input text (parameter files, records).
    Parse,
    /// An integrator or eigensolver could not deliver the requested accuracy.
    Numerical,
    /// Inputs or outputs violate a model invariant.
    Invariant,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid mapping record: {0}")]
    InvalidMapping(String),

    #[error("matrix is not Hermitian: max |H - H†| = {defect:e} exceeds {tolerance:e}")]
    NotHermitian { defect: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("transport efficiency needs a sink: trap rate is zero")]
    NoSink,

    #[error(
        "step size underflow at t = {time:e} (h = {step:e}); the problem is too stiff for \
         explicit stepping with {rates}"
    )]
    Stiffness { time: f64, step: f64, rates: String },

    #[error("trace drifted by {drift:e} (limit {limit:e}) during evolution")]
    TraceDrift { drift: f64, limit: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Fock basis has {size} states, above the cap of {cap}")]
    BasisTooLarge { size: u128, cap: usize },

    #[error("report rejected: {0}")]
    ReportRejected(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. } => ErrorKind::Parse,
            Error::Stiffness { .. } | Error::NoConvergence { .. } | Error::TraceDrift { .. } => {
                ErrorKind::Numerical
            }
            _ => ErrorKind::Invariant,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
