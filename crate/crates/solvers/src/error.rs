use thiserror::Error;
use vqlab_core::QuantumError;

/// Errors raised by the variational solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Quantum(#[from] QuantumError),

    #[error("invalid optimizer setting: {0}")]
    InvalidConfig(String),

    #[error("clause {index} is empty")]
    EmptyClause { index: usize },

    #[error("variable {var} out of range 1..={n_vars}")]
    VariableOutOfRange { var: usize, n_vars: usize },

    #[error("DIMACS line {line}: {message}")]
    Dimacs { line: usize, message: String },

    #[error("QAOA depth must be at least one")]
    ZeroDepth,

    #[error("expansion set must contain the identity string")]
    MissingIdentity,

    #[error("overlap matrix has no eigenvalue above {threshold:e}")]
    SingularOverlap { threshold: f64 },

    #[error("M|v0> vanishes, the multiplication target is undefined")]
    ZeroImage,

    #[error("unsupported cost: {0}")]
    UnsupportedCost(String),

    #[error("{requested} levels requested but the space has dimension {dim}")]
    TooManyLevels { requested: usize, dim: usize },

    #[error("penalty weight must be non-negative, got {0}")]
    NegativePenalty(f64),
}

pub type Result<T> = std::result::Result<T, SolverError>;
