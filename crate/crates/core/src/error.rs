use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("line {line}: weight {weight} is not positive")]
    NonPositiveWeight { line: usize, weight: f64 },

    #[error("line {line}: node index {index} out of range 1..={n}")]
    IndexOutOfRange { line: usize, index: usize, n: usize },

    #[error("line {line}: duplicate edge ({i}, {j})")]
    DuplicateEdge { line: usize, i: usize, j: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("matrix is reducible (the contact graph is not strongly connected)")]
    ReducibleMatrix,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("below the epidemic threshold: R0 = {r0}")]
    BelowThreshold { r0: f64 },

    #[error("state left the admissible box by {excursion:e} at t = {t} (step size too large?)")]
    InvariantViolation { t: f64, excursion: f64 },

    #[error("NaN encountered at t = {t}")]
    NotANumber { t: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
