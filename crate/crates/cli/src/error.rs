use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("{what} needs {requested} qubits, above the cap of {cap}")]
    Cap {
        what: &'static str,
        requested: usize,
        cap: usize,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Quantum(#[from] vqlab_core::QuantumError),
    #[error(transparent)]
    Noise(#[from] vqlab_noise::NoiseError),
    #[error(transparent)]
    Solver(#[from] vqlab_solvers::SolverError),
    #[error(transparent)]
    Vqs(#[from] vqlab_vqs::VqsError),
    #[error(transparent)]
    Qem(#[from] vqlab_qem::QemError),
}

pub type Result<T> = std::result::Result<T, CliError>;
