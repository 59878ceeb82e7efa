//! Variational matrix-vector multiplication and linear solves, with global
//! or local costs, and Hamiltonian morphing along a schedule.

use nalgebra::{DMatrix, DVector};
use vqlab_core::{Circuit, PauliSum, QuantumError, C64};

use crate::cost::{CostFunction, CostKind};
use crate::error::{Result, SolverError};
use crate::optimize::OptimizerConfig;
use crate::vqe::minimize_cost;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearTask {
    /// Target M|v₀⟩/‖M|v₀⟩‖.
    Multiply,
    /// Target ∝ M⁻¹|v₀⟩.
    Solve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostLocality {
    Global,
    Local,
}

/// I − (1/N) Σ_k |0_k⟩⟨0_k| ⊗ I_k̄, which is diagonal.
fn local_projector_complement(n: usize) -> DMatrix<C64> {
    let dim = 1usize << n;
    DMatrix::from_fn(dim, dim, |r, c| {
        if r != c {
            return C64::new(0.0, 0.0);
        }
        let zeros = (0..n).filter(|q| (r >> (n - 1 - q)) & 1 == 0).count();
        C64::new(1.0 - zeros as f64 / n as f64, 0.0)
    })
}

/// Cost Hamiltonian whose zero-energy ground state solves `task`.
///
/// Multiply (global): I − M|v₀⟩⟨v₀|M†/‖M|v₀⟩‖².
/// Solve (global): M†(I − |v₀⟩⟨v₀|)M.
/// Solve (local): M†U_{v₀}(I − (1/N)Σ_k|0_k⟩⟨0_k|⊗I_k̄)U_{v₀}†M.
/// `v0` is a parameter-free circuit with U_{v₀}|0…0⟩ = |v₀⟩.
pub fn linear_algebra_hamiltonian(
    matrix: &PauliSum,
    v0: &Circuit,
    task: LinearTask,
    locality: CostLocality,
) -> Result<CostFunction> {
    let n = matrix.n_qubits();
    if v0.n_qubits() != n {
        return Err(QuantumError::QubitMismatch {
            left: n,
            right: v0.n_qubits(),
        }
        .into());
    }
    let m = matrix.to_dense();
    let u = v0.unitary(&vec![0.0; v0.n_params()])?;
    let dim = 1usize << n;
    let v: DVector<C64> = u.column(0).into_owned();
    let identity = DMatrix::<C64>::identity(dim, dim);
    let h = match (task, locality) {
        (LinearTask::Multiply, CostLocality::Global) => {
            let b = &m * &v;
            let nb = b.norm_squared();
            if nb < 1e-24 {
                return Err(SolverError::ZeroImage);
            }
            identity - (&b * b.adjoint()) / C64::new(nb, 0.0)
        }
        (LinearTask::Multiply, CostLocality::Local) => {
            return Err(SolverError::UnsupportedCost(
                "local cost is defined for the solve task only".into(),
            ))
        }
        (LinearTask::Solve, CostLocality::Global) => {
            m.adjoint() * (identity - &v * v.adjoint()) * &m
        }
        (LinearTask::Solve, CostLocality::Local) => {
            m.adjoint() * &u * local_projector_complement(n) * u.adjoint() * &m
        }
    };
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let kind = match locality {
        CostLocality::Global => CostKind::GlobalLinearAlgebra,
        CostLocality::Local => CostKind::LocalLinearAlgebra,
    };
    CostFunction::dense(kind, h)
}

/// M(s) = (1 − s)I + sM, the morphing path for the solve task.
pub fn morph_matrix(matrix: &PauliSum, s: f64) -> PauliSum {
    PauliSum::identity(matrix.n_qubits())
        .scale(C64::new(1.0 - s, 0.0))
        .add(&matrix.scale(C64::new(s, 0.0)))
        .simplify(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorphingResult {
    pub energy: f64,
    pub params: Vec<f64>,
    /// Optimised cost at each schedule point s = 1/steps, …, 1.
    pub trace: Vec<f64>,
    pub converged: bool,
    /// First schedule point where the warm start failed to reach a minimum.
    pub failed_at: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorphingOptions {
    pub steps: usize,
    /// Known ground energy along the whole path, if any (0 for linear-algebra costs).
    pub known_minimum: Option<f64>,
    /// Allowed excess over `known_minimum`.
    pub tolerance: f64,
}

/// Outer loop over s = j/steps: re-optimise the cost H(s) from the previous
/// optimum. A step fails when the warm-started point sits above
/// `known_minimum + tolerance`, or when it is not a local minimum (negative
/// curvature along some parameter).
pub fn hamiltonian_morphing<S>(
    schedule: S,
    ansatz: &Circuit,
    x0: &[f64],
    options: MorphingOptions,
    config: &OptimizerConfig,
) -> Result<MorphingResult>
where
    S: Fn(f64) -> Result<CostFunction>,
{
    let steps = options.steps.max(1);
    let cfg = OptimizerConfig {
        restarts: 0,
        ..config.clone()
    };
    let mut params = x0.to_vec();
    let mut trace = Vec::with_capacity(steps);
    let mut converged = true;
    let mut failed_at = None;
    let mut energy = f64::NAN;
    for j in 1..=steps {
        let s = j as f64 / steps as f64;
        let cost = schedule(s)?;
        let r = minimize_cost(&cost, ansatz, &params, &cfg)?;
        params = r.params;
        energy = r.value;
        trace.push(energy);
        let above = options
            .known_minimum
            .is_some_and(|m| energy > m + options.tolerance);
        let saddle = negative_curvature(&cost, ansatz, &params)?;
        if (above || saddle || !r.converged) && failed_at.is_none() {
            failed_at = Some(s);
            converged = false;
        }
    }
    Ok(MorphingResult {
        energy,
        params,
        trace,
        converged,
        failed_at,
    })
}

fn negative_curvature(cost: &CostFunction, ansatz: &Circuit, params: &[f64]) -> Result<bool> {
    let h = 1e-3;
    let e0 = cost.evaluate(ansatz, params)?;
    let mut p = params.to_vec();
    for i in 0..params.len() {
        p[i] = params[i] + h;
        let ep = cost.evaluate(ansatz, &p)?;
        p[i] = params[i] - h;
        let em = cost.evaluate(ansatz, &p)?;
        p[i] = params[i];
        if (ep - 2.0 * e0 + em) / (h * h) < -1e-6 {
            return Ok(true);
        }
    }
    Ok(false)
}
