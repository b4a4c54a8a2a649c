use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, QsgError>;

/// One schema or invariant violation, located by a dotted field path
/// (`teams[2].intel_prob`, `readout_error[0]`, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldIssue {
    pub path: String,
    pub message: String,
}

impl FieldIssue {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for FieldIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

fn join_issues(issues: &[FieldIssue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum QsgError {
    #[error("register of {requested} qubits exceeds the limit of {limit}")]
    TooManyQubits { requested: usize, limit: usize },

    #[error("qubit index {index} is out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("qubit {0} is referenced more than once")]
    DuplicateQubit(usize),

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("{name} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid bitstring {0:?}")]
    InvalidBitstring(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid sabotage operator: {0}")]
    InvalidSabotage(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{}", join_issues(.0))]
    Schema(Vec<FieldIssue>),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl QsgError {
    pub(crate) fn out_of_range(name: &'static str, value: f64, min: f64, max: f64) -> Self {
        QsgError::OutOfRange {
            name,
            value,
            min,
            max,
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: impl fmt::Display) -> Self {
        QsgError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    /// Field issues carried by a schema error; empty for every other variant.
    pub fn issues(&self) -> &[FieldIssue] {
        match self {
            QsgError::Schema(issues) => issues,
            _ => &[],
        }
    }
}

/// Checks `value ∈ [min, max]`, rejecting NaN.
pub(crate) fn check_range(name: &'static str, value: f64, min: f64, max: f64) -> Result<f64> {
    if value.is_finite() && value >= min && value <= max {
        Ok(value)
    } else {
        Err(QsgError::out_of_range(name, value, min, max))
    }
}
