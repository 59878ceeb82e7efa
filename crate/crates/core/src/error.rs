use thiserror::Error;

/// Errors raised by the simulator core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qubit count mismatch: {left} vs {right}")]
    QubitMismatch { left: usize, right: usize },

    #[error("{kind} representation is capped at {cap} qubits, {requested} requested")]
    QubitCapExceeded {
        kind: &'static str,
        cap: usize,
        requested: usize,
    },

    #[error("parameter {index} is not finite ({value})")]
    NonFiniteParameter { index: usize, value: f64 },

    #[error("parameter slot {slot} out of range for a circuit with {count} parameters")]
    ParameterSlotOutOfRange { slot: usize, count: usize },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("observable is not Hermitian (largest anti-Hermitian weight {weight:e})")]
    NonHermitian { weight: f64 },

    #[error("matrix is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("rotation terms must pairwise commute")]
    NonCommutingGenerators,

    #[error("shot count must be at least one")]
    ZeroShots,

    #[error("Trotter step count must be at least one")]
    ZeroTrotterSteps,

    #[error("mode index {index} out of range 1..={modes}")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("state is not normalised (norm {norm})")]
    NotNormalised { norm: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, QuantumError>;
