use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "truncation error: tail weight {tail:.3e} beyond cutoff {cutoff} exceeds {tolerance:.1e}; \
         cutoff {required} or larger is required"
    )]
    Truncation {
        cutoff: usize,
        required: usize,
        tail: f64,
        tolerance: f64,
    },

    #[error("basis mismatch: {left} vs {right}")]
    BasisMismatch { left: String, right: String },

    #[error("type error: {0}")]
    Type(String),

    #[error("operator is not Hermitian (max |M - M^dagger| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("resource error: dimension {dim} exceeds the configured maximum {max}")]
    Resource { dim: usize, max: usize },

    #[error(
        "truncation leakage: population {population:.3e} in the top Fock levels of factor {factor} \
         exceeds {tolerance:.1e}; increase the cutoff"
    )]
    Leakage {
        factor: usize,
        population: f64,
        tolerance: f64,
    },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("post-selection impossible: outcome {outcome} has probability {probability:.3e}")]
    PostSelectionImpossible { outcome: u8, probability: f64 },

    #[error("degenerate branch: normalization squared {norm2:.3e}")]
    DegenerateBranch { norm2: f64 },

    #[error("state has {factors} factors; reduce to a single Fock mode first")]
    ReduceFirst { factors: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit status for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } => 2,
            Error::Validation { .. } => 3,
            Error::Resource { .. } => 4,
            Error::Io(_) => 1,
            _ => 5,
        }
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
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

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
