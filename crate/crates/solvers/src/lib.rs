//! Variational quantum optimisation: VQE, QAOA for SAT instances,
//! excited-state spectra and variational linear algebra.

pub mod cost;
pub mod error;
pub mod linear;
pub mod optimize;
pub mod qaoa;
pub mod sat;
pub mod spectrum;
pub mod vqe;

pub use cost::{gradient, CostFunction, CostKind, GradientMode, Observable};
pub use error::{Result, SolverError};
pub use linear::{
    hamiltonian_morphing, linear_algebra_hamiltonian, morph_matrix, CostLocality, LinearTask,
    MorphingOptions, MorphingResult,
};
pub use optimize::{minimize, Method, OptimizeResult, OptimizerConfig};
pub use qaoa::{qaoa, qaoa_circuit, QaoaResult, Schedule};
pub use sat::{sat_to_hamiltonian, Cnf, Literal};
pub use spectrum::{
    excited_by_overlap, mc_vqe, mc_vqe_matrix, solve_pencil, ssvqe, subspace_expansion,
    PencilSolution, SpectrumMethod, SpectrumResult, SpectrumState,
};
pub use vqe::{minimize_cost, vqe, VqeResult};
