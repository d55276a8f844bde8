use thiserror::Error;

/// Errors raised by the workbench.
///
/// `OutOfBudget` and `Absent` are deliberately distinct: the first means a
/// construction left the materialized snapshot, the second that the snapshot
/// was searched exhaustively and nothing qualified.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed presentation: {0}")]
    Malformed(String),
    #[error("out of budget: {0}")]
    OutOfBudget(String),
    #[error("absent: {0}")]
    Absent(String),
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("construction failed at step {step}: {reason}")]
    ConstructionFailed { step: usize, reason: String },
    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("law violation: {0}")]
    LawViolation(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("hash mismatch: {0}")]
    HashMismatch(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
