use std::fmt;

/// A failed command: a machine-readable kind, a message and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub kind: &'static str,
    pub message: String,
    pub code: i32,
}

pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 1;

impl Failure {
    pub fn precondition(message: impl Into<String>) -> Self {
        Failure { kind: "precondition", message: message.into(), code: EXIT_PRECONDITION }
    }

    pub fn numerical(kind: &'static str, message: impl Into<String>) -> Self {
        Failure { kind, message: message.into(), code: EXIT_NUMERICAL }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Failure { kind: "io", message: message.into(), code: EXIT_IO }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.kind, "message": self.message, "exit_code": self.code }).to_string()
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<rrm_core::Error> for Failure {
    fn from(e: rrm_core::Error) -> Self {
        use rrm_core::Error as E;
        let kind = match e {
            E::InvalidMesh(_) => "invalid_mesh",
            E::Precondition(_) => "precondition",
            E::DimensionMismatch { .. } => "dimension_mismatch",
            E::NonPositiveDensity { .. } => "non_positive_density",
            E::PatternDimension { .. } => "pattern_dimension",
            E::SingularKkt { .. } => "singular_kkt",
            E::Factorization(_) => "factorization",
            E::NoConvergence { .. } => "no_convergence",
        };
        let code = if e.is_precondition() { EXIT_PRECONDITION } else { EXIT_NUMERICAL };
        Failure { kind, message: e.to_string(), code }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, Failure>;
