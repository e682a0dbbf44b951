use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Failures are split into precondition violations (bad input) and numerical
/// failures (rank, factorization) so callers can map them to distinct exit
/// codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(&'static str),

    #[error("precondition violated: {0}")]
    Precondition(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("density must be positive, found {value} at ({x}, {y})")]
    NonPositiveDensity { value: f64, x: f64, y: f64 },

    #[error("patch nullspace has dimension {found}, expected 1 ({pattern})")]
    PatternDimension { pattern: &'static str, found: usize },

    #[error("singular saddle-point system: constraint rank {rank} < {rows} rows")]
    SingularKkt { rank: usize, rows: usize },

    #[error("factorization failed: {0}")]
    Factorization(&'static str),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

impl Error {
    /// `true` for errors caused by the caller's input rather than numerics.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::InvalidMesh(_)
                | Error::Precondition(_)
                | Error::DimensionMismatch { .. }
                | Error::NonPositiveDensity { .. }
        )
    }
}
