use thiserror::Error;
use vqlab_core::QuantumError;
use vqlab_noise::NoiseError;
use vqlab_solvers::SolverError;

/// Errors raised by the mitigation estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QemError {
    #[error(transparent)]
    Quantum(#[from] QuantumError),

    #[error(transparent)]
    Noise(#[from] NoiseError),

    #[error(transparent)]
    Solver(#[from] SolverError),

    #[error("no input points")]
    EmptyInput,

    #[error("noise rate {0} appears more than once")]
    DuplicateRate(f64),

    #[error("invalid noise rates: {0}")]
    InvalidRates(String),

    #[error("boost factor must exceed 1, got {0}")]
    InvalidFactor(f64),

    #[error("need at least {needed} points, got {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("design matrix has rank {rank}, need {needed}")]
    RankDeficient { rank: usize, needed: usize },

    #[error("basis does not span the inverse channel (residual {residual:e})")]
    NotSpanning { residual: f64 },

    #[error("noise channel is not invertible (condition number {condition:e})")]
    NotInvertible { condition: f64 },

    #[error("shot budget must be positive")]
    ZeroShots,

    #[error("no quasi-probability decomposition for noise slot {slot} of gate {gate}")]
    MissingDecomposition { gate: usize, slot: usize },

    #[error("channel is not a Pauli channel")]
    NotPauliChannel,

    #[error("invalid symmetry: {0}")]
    InvalidSymmetry(String),

    #[error("symmetry does not commute with the Hamiltonian term {0}")]
    NonCommuting(String),

    #[error("acceptance probability {0:e} is below 1e-12")]
    LowAcceptance(f64),

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error("confusion matrix is singular (condition number {0:e})")]
    SingularConfusion(f64),

    #[error("training set is degenerate: all noisy values coincide")]
    DegenerateTraining,

    #[error("noise divisor for qubit {qubit} must exceed 1, got {value}")]
    InvalidDivisor { qubit: usize, value: f64 },

    #[error("hyperbolic model violated: negative radicand {0:e}")]
    NegativeRadicand(f64),

    #[error("incompatible mitigation pipeline: {0}")]
    IncompatibleStage(String),
}

pub type Result<T> = std::result::Result<T, QemError>;
