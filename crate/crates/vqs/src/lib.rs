//! Variational quantum simulation: McLachlan real and imaginary time
//! evolution, generalised linear dynamics, and Gibbs-state preparation.

pub mod error;
pub mod evolve;
pub mod generalised;
pub mod gibbs;
pub mod mclachlan;

pub use error::{Result, VqsError};
pub use evolve::{evolve, EvolutionTrace, EvolveOptions};
pub use generalised::{
    evolve_generalised, multiply_by_evolution, solve_by_evolution, Drive, GeneralisedSpec,
    GeneralisedTrace, LinearEvolution, Source, CONDITION_LIMIT,
};
pub use gibbs::{lift_to_system, prepare_gibbs, purification_ansatz, GibbsResult};
pub use mclachlan::{assemble_mclachlan, assemble_mclachlan_circuits, McLachlanSystem, Mode};
