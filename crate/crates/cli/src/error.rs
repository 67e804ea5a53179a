use std::fmt;

/// An error together with the process exit status it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_GRAPH: u8 = 3;
pub const EXIT_THRESHOLD: u8 = 4;
pub const EXIT_NUMERICAL: u8 = 5;

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn graph(message: impl Into<String>) -> Self {
        Self { code: EXIT_GRAPH, message: message.into() }
    }

    pub fn io(err: std::io::Error) -> Self {
        Self { code: 1, message: err.to_string() }
    }
}

impl From<netepi::Error> for CliError {
    fn from(err: netepi::Error) -> Self {
        use netepi::Error::*;
        let code = match err {
            EmptyInput
            | MalformedLine { .. }
            | NonPositiveWeight { .. }
            | IndexOutOfRange { .. }
            | DuplicateEdge { .. }
            | InvalidMatrix(_)
            | ReducibleMatrix => EXIT_GRAPH,
            BelowThreshold { .. } => EXIT_THRESHOLD,
            NonConvergence { .. } | InvariantViolation { .. } | NotANumber { .. } => EXIT_NUMERICAL,
            DimensionMismatch { .. } | InvalidArgument(_) => EXIT_CONFIG,
        };
        Self { code, message: err.to_string() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}
