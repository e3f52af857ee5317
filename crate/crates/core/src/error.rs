use thiserror::Error;

/// Errors raised by the geometry kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A matrix function was asked to act outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The point lies on the boundary where the metric diverges.
    #[error("boundary error: {0}")]
    Boundary(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("zero vector")]
    ZeroVector,

    #[error("scan failure: found {found} of {expected} bounce points")]
    ScanFailure { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub fn mismatch(expected: usize, found: usize) -> Self {
        Error::DimensionMismatch { expected, found }
    }

    /// Short machine-readable kind tag, used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::Domain(_) => "DomainError",
            Error::Boundary(_) => "BoundaryError",
            Error::Singular(_) => "SingularError",
            Error::Degenerate(_) => "DegenerateError",
            Error::ZeroVector => "ZeroVectorError",
            Error::ScanFailure { .. } => "ScanFailure",
            Error::Invalid(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
