use thiserror::Error;
use vqlab_core::QuantumError;

/// Errors raised by channel construction and noisy simulation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error(transparent)]
    Quantum(#[from] QuantumError),

    #[error("probability {value} outside [0, {max}]")]
    ProbabilityOutOfRange { value: f64, max: f64 },

    #[error("channel is not trace preserving (deviation {deviation:e})")]
    NotTracePreserving { deviation: f64 },

    #[error("operation increases trace (excess {excess:e})")]
    TraceIncreasing { excess: f64 },

    #[error("no channel assigned to gate `{gate}` on {arity} qubit(s)")]
    MissingChannel { gate: String, arity: usize },

    #[error("unsupported channel arity {0}")]
    UnsupportedArity(usize),

    #[error("trace drifted by {drift:e} at t = {time}; halve the step")]
    TraceDrift { drift: f64, time: f64 },

    #[error("integration unstable at t = {time} (purity {purity}); halve the step")]
    Unstable { time: f64, purity: f64 },

    #[error("dt · max jump rate = {value} exceeds 0.1")]
    StepTooLarge { value: f64 },

    #[error("time step must be positive and time non-negative (dt = {dt}, t = {t})")]
    InvalidTime { dt: f64, t: f64 },

    #[error("boost factor must be at least 1, got {0}")]
    InvalidBoost(f64),

    #[error("gate `{0}` is not self-inverse and cannot be folded")]
    NotSelfInverse(String),

    #[error("noise scale h for qubit {qubit} must be at least 1, got {value}")]
    InvalidScale { qubit: usize, value: f64 },

    #[error("invalid confusion matrix: {0}")]
    InvalidConfusion(String),

    #[error("unknown channel specification `{0}`")]
    UnknownChannel(String),
}

pub type Result<T> = std::result::Result<T, NoiseError>;
