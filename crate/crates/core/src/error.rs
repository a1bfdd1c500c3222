//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A state or program would exceed the dense-representation caps
    /// (24 qubits for pure states, 11 for density matrices).
    #[error("qubit cap exceeded: {requested} qubits requested, cap is {cap}")]
    QubitCapExceeded { requested: usize, cap: usize },

    #[error("qubit index {index} out of range for {num_qubits}-qubit system (qubits are numbered 1..={num_qubits})")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("matrix is not unitary")]
    NotUnitary,

    #[error("bit string length mismatch: expected {expected} bits, got {actual}")]
    BitLengthMismatch { expected: usize, actual: usize },

    #[error("Z must be a set: duplicate string {z:?}")]
    DuplicateZ { z: String },

    #[error("angle {theta} outside (0, 2*pi]")]
    AngleOutOfRange { theta: f64 },

    #[error("invalid {field}: {message}")]
    InvalidField { field: String, message: String },

    #[error("malformed document: {0}")]
    Malformed(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(field: &str, message: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// True for errors caused by the dense-representation caps; the CLI
    /// maps these to a dedicated exit code.
    pub fn is_cap_violation(&self) -> bool {
        matches!(self, Error::QubitCapExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
