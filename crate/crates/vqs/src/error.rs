use thiserror::Error;
use vqlab_core::QuantumError;

/// Errors raised by variational time evolution.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum VqsError {
    #[error(transparent)]
    Quantum(#[from] QuantumError),

    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),

    #[error("total time must be non-negative and finite, got {0}")]
    InvalidTime(f64),

    #[error("McLachlan matrix condition number {condition:e} exceeds {limit:e} at t = {time}")]
    IllConditioned { time: f64, condition: f64, limit: f64 },

    #[error("M|u0> vanishes")]
    ZeroImage,

    #[error("Gibbs ansatz must act on 2×{system} qubits, found {found}")]
    PurificationWidth { system: usize, found: usize },

    #[error("initial joint state is not maximally entangled (deviation {deviation:e})")]
    NotMaximallyEntangled { deviation: f64 },
}

pub type Result<T> = std::result::Result<T, VqsError>;
