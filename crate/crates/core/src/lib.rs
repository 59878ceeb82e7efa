//! Dense simulation core: Pauli algebra, statevectors and density matrices,
//! parametrised circuits with analytic derivatives, and measurement
//! primitives in exact and shot-sampled form.
//!
//! Qubit 0 is the most significant bit of every basis index.

pub mod ansatz;
pub mod circuit;
pub mod error;
pub mod fermion;
pub mod gate;
pub mod kernels;
pub mod linalg;
pub mod measure;
pub mod models;
pub mod pauli;
pub mod state;
pub mod trotter;

pub use num_complex::Complex64 as C64;

pub use circuit::Circuit;
pub use error::{QuantumError, Result};
pub use gate::{Angle, GateOp};
pub use measure::{
    ancilla_interference, expectation, expectation_mixed, expectation_pure, hadamard_test,
    hadamard_test_ancilla, overlap_exact, sampled_expectation, swap_test, swap_test_sampled,
    Insertion, ShotSettings, SwapMode,
};
pub use pauli::{Pauli, PauliString, PauliSum};
pub use state::{DensityMatrix, QuantumState, Statevector};

/// Largest register simulated as a statevector.
pub const MAX_STATEVECTOR_QUBITS: usize = 14;
/// Largest register simulated as a density matrix.
pub const MAX_DENSITY_QUBITS: usize = 7;
