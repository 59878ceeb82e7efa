//! Cost functions evaluated on ansatz states, and their gradients.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use vqlab_core::{Angle, Circuit, GateOp, PauliSum, QuantumError, Statevector, C64};

use crate::error::{Result, SolverError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    PauliExpectation,
    OverlapPenalised,
    GlobalLinearAlgebra,
    LocalLinearAlgebra,
    SubspaceSum,
}

/// A Hermitian observable, either as a Pauli sum or a dense matrix.
#[derive(Debug, Clone)]
pub enum Observable {
    Pauli(PauliSum),
    Dense(DMatrix<C64>),
}

impl Observable {
    pub fn n_qubits(&self) -> usize {
        match self {
            Observable::Pauli(h) => h.n_qubits(),
            Observable::Dense(m) => m.nrows().trailing_zeros() as usize,
        }
    }

    pub fn apply(&self, state: &Statevector) -> Vec<C64> {
        match self {
            Observable::Pauli(h) => h.apply(state.amplitudes()),
            Observable::Dense(m) => (m * state.to_dvector()).iter().copied().collect(),
        }
    }

    pub fn expectation(&self, state: &Statevector) -> f64 {
        let hv = self.apply(state);
        state
            .amplitudes()
            .iter()
            .zip(&hv)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .re
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match self {
            Observable::Pauli(h) => h.to_dense(),
            Observable::Dense(m) => m.clone(),
        }
    }

    fn check_qubits(&self, n: usize) -> Result<()> {
        if self.n_qubits() != n {
            return Err(QuantumError::QubitMismatch {
                left: self.n_qubits(),
                right: n,
            }
            .into());
        }
        Ok(())
    }
}

/// Scalar cost ⟨φ|O|φ⟩ + Σ α_j |⟨E_j|φ⟩|², or Σ_j ⟨φ_j|U†OU|φ_j⟩ when
/// explicit inputs are set.
#[derive(Debug, Clone)]
pub struct CostFunction {
    kind: CostKind,
    observable: Observable,
    penalties: Vec<(Statevector, f64)>,
    inputs: Vec<Statevector>,
}

impl CostFunction {
    pub fn expectation(hamiltonian: &PauliSum) -> Result<Self> {
        hamiltonian.ensure_hermitian()?;
        Ok(Self {
            kind: CostKind::PauliExpectation,
            observable: Observable::Pauli(hamiltonian.clone()),
            penalties: Vec::new(),
            inputs: Vec::new(),
        })
    }

    /// H + Σ α_j |E_j⟩⟨E_j|.
    pub fn overlap_penalised(
        hamiltonian: &PauliSum,
        penalties: Vec<(Statevector, f64)>,
    ) -> Result<Self> {
        let mut out = Self::expectation(hamiltonian)?;
        for (s, w) in &penalties {
            if *w < 0.0 {
                return Err(SolverError::NegativePenalty(*w));
            }
            out.observable.check_qubits(s.n_qubits())?;
        }
        out.kind = CostKind::OverlapPenalised;
        out.penalties = penalties;
        Ok(out)
    }

    /// Σ_j ⟨φ_j|U†HU|φ_j⟩ over orthogonal inputs.
    pub fn subspace_sum(hamiltonian: &PauliSum, inputs: Vec<Statevector>) -> Result<Self> {
        let mut out = Self::expectation(hamiltonian)?;
        for s in &inputs {
            out.observable.check_qubits(s.n_qubits())?;
        }
        out.kind = CostKind::SubspaceSum;
        out.inputs = inputs;
        Ok(out)
    }

    /// Cost from a dense Hermitian matrix.
    pub fn dense(kind: CostKind, matrix: DMatrix<C64>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim || !dim.is_power_of_two() {
            return Err(QuantumError::DimensionMismatch {
                expected: dim.next_power_of_two(),
                found: matrix.ncols(),
            }
            .into());
        }
        let weight = (&matrix - matrix.adjoint()).camax();
        if weight > 1e-10 * matrix.camax().max(1.0) {
            return Err(QuantumError::NonHermitian { weight }.into());
        }
        Ok(Self {
            kind,
            observable: Observable::Dense(matrix),
            penalties: Vec::new(),
            inputs: Vec::new(),
        })
    }

    pub fn kind(&self) -> CostKind {
        self.kind
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn penalties(&self) -> &[(Statevector, f64)] {
        &self.penalties
    }

    pub fn n_qubits(&self) -> usize {
        self.observable.n_qubits()
    }

    /// ⟨φ|O|φ⟩ without penalties.
    pub fn unpenalised(&self, state: &Statevector) -> f64 {
        self.observable.expectation(state)
    }

    /// Full cost on a single state (inputs are ignored).
    pub fn evaluate_state(&self, state: &Statevector) -> f64 {
        let mut e = self.observable.expectation(state);
        for (p, w) in &self.penalties {
            e += w * p.inner(state).norm_sqr();
        }
        e
    }

    pub fn evaluate(&self, ansatz: &Circuit, params: &[f64]) -> Result<f64> {
        self.observable.check_qubits(ansatz.n_qubits())?;
        if self.inputs.is_empty() {
            return Ok(self.evaluate_state(&ansatz.prepare(params)?));
        }
        let mut total = 0.0;
        for s in &self.inputs {
            total += self.evaluate_state(&ansatz.apply_pure(params, s)?);
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradientMode {
    /// Two-point shift for exp(−iθP/2) gates, central differences elsewhere.
    ParameterShift,
    FiniteDifference,
}

/// Copy of `ansatz` with gate `index` rebound to a fresh trailing slot.
fn isolate(ansatz: &Circuit, index: usize) -> Result<Circuit> {
    let fresh = ansatz.n_params();
    let mut c = Circuit::new(ansatz.n_qubits())?.with_params(fresh + 1);
    if ansatz.has_custom_reference() {
        c = c.with_reference(ansatz.reference())?;
    }
    for (k, g) in ansatz.gates().iter().enumerate() {
        let gate = match g {
            GateOp::Rotation { name, terms, .. } if k == index => GateOp::Rotation {
                name: name.clone(),
                terms: terms.clone(),
                angle: Angle::Param(fresh),
            },
            other => other.clone(),
        };
        c.push(gate)?;
    }
    Ok(c)
}

/// ∇f at `params`, where f is any cost of the form Σ⟨ψ|O|ψ⟩ over states
/// produced by `ansatz`.
pub fn gradient<F>(
    f: F,
    ansatz: &Circuit,
    params: &[f64],
    mode: GradientMode,
    fd_step: f64,
) -> Result<Vec<f64>>
where
    F: Fn(&Circuit, &[f64]) -> Result<f64>,
{
    ansatz.check_params(params)?;
    let mut grad = vec![0.0; params.len()];
    let mut shifted = params.to_vec();
    for (slot, g) in grad.iter_mut().enumerate() {
        let gates = ansatz.gates_for_slot(slot);
        if gates.is_empty() {
            continue;
        }
        let exact = mode == GradientMode::ParameterShift
            && gates.iter().all(|&k| ansatz.gates()[k].is_shift_rule_compatible());
        if exact {
            if gates.len() == 1 {
                shifted[slot] = params[slot] + FRAC_PI_2;
                let plus = f(ansatz, &shifted)?;
                shifted[slot] = params[slot] - FRAC_PI_2;
                let minus = f(ansatz, &shifted)?;
                shifted[slot] = params[slot];
                *g = 0.5 * (plus - minus);
            } else {
                // shared slot: product rule, one shift pair per gate
                let mut ext = params.to_vec();
                ext.push(params[slot]);
                let last = ext.len() - 1;
                for &k in &gates {
                    let c = isolate(ansatz, k)?;
                    ext[last] = params[slot] + FRAC_PI_2;
                    let plus = f(&c, &ext)?;
                    ext[last] = params[slot] - FRAC_PI_2;
                    let minus = f(&c, &ext)?;
                    *g += 0.5 * (plus - minus);
                }
            }
        } else {
            shifted[slot] = params[slot] + fd_step;
            let plus = f(ansatz, &shifted)?;
            shifted[slot] = params[slot] - fd_step;
            let minus = f(ansatz, &shifted)?;
            shifted[slot] = params[slot];
            *g = (plus - minus) / (2.0 * fd_step);
        }
    }
    Ok(grad)
}

/// ‖(O − E)|ψ⟩‖ with E = ⟨ψ|O|ψ⟩.
pub fn residual(observable: &Observable, state: &Statevector) -> f64 {
    let e = observable.expectation(state);
    let hv = DVector::from_vec(observable.apply(state));
    (hv - state.to_dvector() * C64::new(e, 0.0)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use vqlab_core::ansatz::hardware_efficient;

    #[test]
    fn shared_slot_shift_matches_differences() {
        let mut c = Circuit::new(2).unwrap();
        c.push(GateOp::ry(2, 0, Angle::Param(0))).unwrap();
        c.push(GateOp::cnot(0, 1)).unwrap();
        c.push(GateOp::rx(2, 1, Angle::Param(0))).unwrap();
        c.push(GateOp::rz(2, 0, Angle::Param(1))).unwrap();
        c.push(GateOp::ry(2, 0, Angle::Param(1))).unwrap();
        let h = PauliSum::from_real_terms(&[(0.7, "ZX"), (-0.3, "YY"), (0.2, "XI")]).unwrap();
        let cost = CostFunction::expectation(&h).unwrap();
        let f = |c: &Circuit, p: &[f64]| cost.evaluate(c, p);
        let p = [0.37, -1.1];
        let a = gradient(f, &c, &p, GradientMode::ParameterShift, 1e-5).unwrap();
        let b = gradient(f, &c, &p, GradientMode::FiniteDifference, 1e-5).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
    }

    #[test]
    fn penalty_never_lowers_cost() {
        let h = PauliSum::from_real_terms(&[(1.0, "ZZ"), (0.5, "XI")]).unwrap();
        let pen = Statevector::basis(2, 1).unwrap();
        let plain = CostFunction::expectation(&h).unwrap();
        let cost = CostFunction::overlap_penalised(&h, vec![(pen, 3.0)]).unwrap();
        let c = hardware_efficient(2, 1).unwrap();
        let p: Vec<f64> = (0..c.n_params()).map(|k| 0.3 * k as f64 - 0.8).collect();
        assert!(cost.evaluate(&c, &p).unwrap() >= plain.evaluate(&c, &p).unwrap());
    }
}
