//! Variational eigensolver on a parametrised ansatz.

use vqlab_core::{Circuit, PauliSum, QuantumError};

use crate::cost::{gradient, CostFunction};
use crate::error::Result;
use crate::optimize::{minimize, OptimizeResult, OptimizerConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct VqeResult {
    pub energy: f64,
    pub params: Vec<f64>,
    /// Best-so-far energy after each accepted step.
    pub trace: Vec<f64>,
    pub iterations: usize,
    /// False when the iteration budget ran out; the best point is still returned.
    pub converged: bool,
}

impl From<OptimizeResult> for VqeResult {
    fn from(r: OptimizeResult) -> Self {
        Self {
            energy: r.value,
            params: r.params,
            trace: r.trace,
            iterations: r.iterations,
            converged: r.converged,
        }
    }
}

/// Minimise an arbitrary cost over the ansatz parameters.
pub fn minimize_cost(
    cost: &CostFunction,
    ansatz: &Circuit,
    x0: &[f64],
    config: &OptimizerConfig,
) -> Result<OptimizeResult> {
    if cost.n_qubits() != ansatz.n_qubits() {
        return Err(QuantumError::QubitMismatch {
            left: cost.n_qubits(),
            right: ansatz.n_qubits(),
        }
        .into());
    }
    ansatz.check_params(x0)?;
    let f = |p: &[f64]| cost.evaluate(ansatz, p);
    let g = |p: &[f64]| {
        gradient(
            |c: &Circuit, q: &[f64]| cost.evaluate(c, q),
            ansatz,
            p,
            config.gradient,
            config.fd_step,
        )
    };
    minimize(f, g, x0, config)
}

/// min_θ ⟨φ(θ)|H|φ(θ)⟩ starting from `x0`.
pub fn vqe(
    hamiltonian: &PauliSum,
    ansatz: &Circuit,
    x0: &[f64],
    config: &OptimizerConfig,
) -> Result<VqeResult> {
    let cost = CostFunction::expectation(hamiltonian)?;
    Ok(minimize_cost(&cost, ansatz, x0, config)?.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use vqlab_core::{Angle, GateOp};

    #[test]
    fn identity_energy_is_one() {
        let c = Circuit::new(1).unwrap().then(GateOp::ry(1, 0, Angle::Param(0))).unwrap();
        let h = PauliSum::from_real_terms(&[(1.0, "I")]).unwrap();
        let r = vqe(&h, &c, &[0.8], &OptimizerConfig::default()).unwrap();
        assert!((r.energy - 1.0).abs() < 1e-14);
    }

    #[test]
    fn width_mismatch() {
        let c = Circuit::new(2).unwrap().then(GateOp::ry(2, 0, Angle::Param(0))).unwrap();
        let h = PauliSum::from_real_terms(&[(1.0, "Z")]).unwrap();
        assert!(vqe(&h, &c, &[0.0], &OptimizerConfig::default()).is_err());
    }
}
