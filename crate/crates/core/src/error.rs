use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the numerical and corpus routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A target value cannot be reached by the model (e.g. an entropy at or
    /// above `ln n`, or maxent targets outside the feature hull).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// An iterative method failed to converge.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Malformed input data. `line` is 1-based; 0 refers to the whole input.
    #[error("ingest error{}: {message}", at_line(*line))]
    Ingest { line: usize, message: String },

    /// Structurally valid input that does not match an expected schema.
    #[error("schema error: {0}")]
    Schema(String),
}

fn at_line(line: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!(" at line {line}")
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn ingest(line: usize, msg: impl Into<String>) -> Self {
        Error::Ingest {
            line,
            message: msg.into(),
        }
    }
}
