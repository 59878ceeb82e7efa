//! Noise channels, noisy circuit execution, Lindblad dynamics, stochastic
//! trajectories, Pauli twirling and error-rate boosting.

pub mod boost;
pub mod channel;
pub mod confusion;
pub mod error;
pub mod lindblad;
pub mod model;
pub mod trajectory;
pub mod twirl;

pub use boost::{boost_error_rate, effective_error_rate, BoostedProgram};
pub use channel::{ptm_of, unitary_ptm, QuantumChannel};
pub use confusion::ConfusionMatrix;
pub use error::{NoiseError, Result};
pub use lindblad::{embed_single, lindblad_evolve, lindblad_snapshots, lowering, LindbladSystem};
pub use model::{
    measured_distribution, parse_channel, run_noisy, run_noisy_circuit, ContinuousNoise, NoiseModel,
};
pub use trajectory::{no_jump_state, sse_ensemble, sse_trajectory, EnsembleAverage, Trajectory};
pub use twirl::pauli_twirl;
