//! Error-mitigation estimators for noisy expectation values.

pub mod cdr;
pub mod error;
pub mod estimate;
pub mod extrapolation;
pub mod ier;
pub mod measurement;
pub mod pipeline;
pub mod qse;
pub mod quasi;
pub mod symmetry;

pub use cdr::{clifford_data_regression, clifford_params, fit_linear, CdrFit, CdrOptions};
pub use error::{QemError, Result};
pub use estimate::{Measured, MitigatedEstimate, RatePoint};
pub use extrapolation::{
    exponential_extrapolate, hyperbolic_extrapolate, hyperbolic_forward, least_squares_fit,
    monomials, multi_exponential_fit, richardson, richardson_coefficients, ExponentialFit,
    FitPoint, PolynomialFit,
};
pub use ier::{individual_error_reduction, reduction_coefficient};
pub use measurement::{mitigate_measurement, project_simplex, MeasurementMethod, MitigatedDistribution};
pub use pipeline::{
    boost_channel, boost_noise, combine, CombinedEstimate, Extrapolation, NoisyExperiment, Stage,
    StageReport,
};
pub use qse::qse_mitigate;
pub use quasi::{
    commuting_part, decompose_channel, decompose_noise, invert_channel, mitigated_state,
    pauli_basis, quasi_probability_estimate, quasi_probability_exhaustive, quasi_probability_mean,
    standard_basis, standard_basis_n, total_cost, BasisKind, NoiseDecompositions,
    QuasiProbabilityDecomposition,
};
pub use symmetry::{sector_values, symmetry_verify, SectorValues, SymmetryOperator, VerifyMode};
