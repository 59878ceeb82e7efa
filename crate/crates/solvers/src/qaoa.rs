//! Quantum approximate optimisation on a diagonal problem Hamiltonian.

use vqlab_core::{Angle, Circuit, GateOp, Pauli, PauliString, PauliSum, C64};

use crate::error::{Result, SolverError};
use crate::optimize::{OptimizeResult, OptimizerConfig};
use crate::vqe::minimize_cost;
use crate::cost::CostFunction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    /// Optimise ⟨H_P⟩ directly.
    Fixed,
    /// Warm-started optimisation along H(s) = (1 − s)H_X + sH_P, s = 1/steps … 1.
    Morphing { steps: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QaoaResult {
    /// ⟨H_P⟩ at the returned parameters.
    pub energy: f64,
    pub params: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// Most probable basis index (lowest index on ties).
    pub best_index: usize,
    pub trace: Vec<f64>,
    pub converged: bool,
}

/// H_X = Σ_j X_j.
pub fn mixer(n_qubits: usize) -> PauliSum {
    let mut h = PauliSum::zero(n_qubits);
    for q in 0..n_qubits {
        h.push(C64::new(1.0, 0.0), PauliString::single(n_qubits, q, Pauli::X));
    }
    h
}

/// |−…−⟩ followed by D layers of exp(−iθ₁H_X)exp(−iθ₂H_P). Slot 2k is θ₁ of
/// layer k, slot 2k+1 is θ₂.
pub fn qaoa_circuit(problem: &PauliSum, depth: usize) -> Result<Circuit> {
    if depth == 0 {
        return Err(SolverError::ZeroDepth);
    }
    problem.ensure_hermitian()?;
    let n = problem.n_qubits();
    let mut c = Circuit::new(n)?;
    for q in 0..n {
        c.push(GateOp::x(q))?;
        c.push(GateOp::h(q))?;
    }
    let problem_terms = problem.real_terms();
    let mixer_terms = mixer(n).real_terms();
    for k in 0..depth {
        c.push(GateOp::rotation("problem", problem_terms.clone(), Angle::Param(2 * k + 1))?)?;
        c.push(GateOp::rotation("mixer", mixer_terms.clone(), Angle::Param(2 * k))?)?;
    }
    Ok(c)
}

pub fn qaoa(
    problem: &PauliSum,
    depth: usize,
    schedule: Schedule,
    x0: &[f64],
    config: &OptimizerConfig,
) -> Result<QaoaResult> {
    let circuit = qaoa_circuit(problem, depth)?;
    let target = CostFunction::expectation(problem)?;
    let run: OptimizeResult = match schedule {
        Schedule::Fixed => minimize_cost(&target, &circuit, x0, config)?,
        Schedule::Morphing { steps } => {
            let steps = steps.max(1);
            let hx = mixer(problem.n_qubits());
            let mut params = x0.to_vec();
            let mut trace = Vec::with_capacity(steps);
            let mut converged = true;
            let mut iterations = 0;
            for j in 1..=steps {
                let s = j as f64 / steps as f64;
                let h = hx
                    .scale(C64::new(1.0 - s, 0.0))
                    .add(&problem.scale(C64::new(s, 0.0)));
                let cost = CostFunction::expectation(&h)?;
                let r = minimize_cost(&cost, &circuit, &params, config)?;
                converged &= r.converged;
                iterations += r.iterations;
                params = r.params;
                trace.push(r.value);
            }
            let value = target.evaluate(&circuit, &params)?;
            OptimizeResult {
                params,
                value,
                trace,
                iterations,
                converged,
            }
        }
    };
    let probabilities = circuit.prepare(&run.params)?.probabilities();
    let best_index = probabilities
        .iter()
        .enumerate()
        .fold(0, |b, (i, &p)| if p > probabilities[b] { i } else { b });
    Ok(QaoaResult {
        energy: run.value,
        params: run.params,
        probabilities,
        best_index,
        trace: run.trace,
        converged: run.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_angles_give_uniform_distribution() {
        let h = PauliSum::from_real_terms(&[(1.0, "ZZI"), (-0.5, "IZZ")]).unwrap();
        let c = qaoa_circuit(&h, 2).unwrap();
        for p in c.prepare(&[0.0; 4]).unwrap().probabilities() {
            assert!((p - 0.125).abs() < 1e-14);
        }
    }

    #[test]
    fn depth_zero_rejected() {
        let h = PauliSum::from_real_terms(&[(1.0, "Z")]).unwrap();
        assert_eq!(qaoa_circuit(&h, 0).unwrap_err(), SolverError::ZeroDepth);
    }
}
