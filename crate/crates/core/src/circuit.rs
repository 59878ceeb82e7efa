//! Parametrised circuits U(θ) = U_N(θ_N)…U_1(θ_1) acting on a reference state.

use nalgebra::DMatrix;

use crate::error::{QuantumError, Result};
use crate::gate::GateOp;
use crate::pauli::PauliString;
use crate::state::{DensityMatrix, QuantumState, Statevector};
use crate::{C64, MAX_STATEVECTOR_QUBITS};

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    n_params: usize,
    gates: Vec<GateOp>,
    reference: Option<Statevector>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_STATEVECTOR_QUBITS {
            return Err(QuantumError::QubitCapExceeded {
                kind: "statevector",
                cap: MAX_STATEVECTOR_QUBITS,
                requested: n_qubits,
            });
        }
        Ok(Self {
            n_qubits,
            n_params: 0,
            gates: Vec::new(),
            reference: None,
        })
    }

    /// Declare at least `count` parameter slots (slots used by gates are
    /// declared automatically).
    pub fn with_params(mut self, count: usize) -> Self {
        self.n_params = self.n_params.max(count);
        self
    }

    pub fn with_reference(mut self, reference: Statevector) -> Result<Self> {
        if reference.n_qubits() != self.n_qubits {
            return Err(QuantumError::QubitMismatch {
                left: self.n_qubits,
                right: reference.n_qubits(),
            });
        }
        self.reference = Some(reference);
        Ok(self)
    }

    pub fn push(&mut self, gate: GateOp) -> Result<()> {
        gate.check_width(self.n_qubits)?;
        if let Some(slot) = gate.slot() {
            self.n_params = self.n_params.max(slot + 1);
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn then(mut self, gate: GateOp) -> Result<Self> {
        self.push(gate)?;
        Ok(self)
    }

    /// Append another circuit's gates (parameter slots are shared, not shifted).
    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(QuantumError::QubitMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        for g in &other.gates {
            self.push(g.clone())?;
        }
        self.n_params = self.n_params.max(other.n_params);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn reference(&self) -> Statevector {
        self.reference
            .clone()
            .unwrap_or_else(|| Statevector::zero(self.n_qubits).expect("within cap"))
    }

    pub fn has_custom_reference(&self) -> bool {
        self.reference.is_some()
    }

    pub fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params {
            return Err(QuantumError::DimensionMismatch {
                expected: self.n_params,
                found: params.len(),
            });
        }
        for (index, &value) in params.iter().enumerate() {
            if !value.is_finite() {
                return Err(QuantumError::NonFiniteParameter { index, value });
            }
        }
        Ok(())
    }

    /// U(θ)|ψ⟩ for an explicit input.
    pub fn apply_pure(&self, params: &[f64], state: &Statevector) -> Result<Statevector> {
        self.check_params(params)?;
        if state.n_qubits() != self.n_qubits {
            return Err(QuantumError::QubitMismatch {
                left: self.n_qubits,
                right: state.n_qubits(),
            });
        }
        let mut s = state.clone();
        for g in &self.gates {
            g.apply_pure(&mut s, params);
        }
        Ok(s)
    }

    /// U(θ) ρ U(θ)†.
    pub fn apply_mixed(&self, params: &[f64], rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_params(params)?;
        if rho.n_qubits() != self.n_qubits {
            return Err(QuantumError::QubitMismatch {
                left: self.n_qubits,
                right: rho.n_qubits(),
            });
        }
        let mut r = rho.clone();
        for g in &self.gates {
            g.apply_mixed(&mut r, params);
        }
        Ok(r)
    }

    pub fn apply(&self, params: &[f64], state: &QuantumState) -> Result<QuantumState> {
        match state {
            QuantumState::Pure(s) => self.apply_pure(params, s).map(QuantumState::Pure),
            QuantumState::Mixed(r) => self.apply_mixed(params, r).map(QuantumState::Mixed),
        }
    }

    /// U(θ)†|ψ⟩.
    pub fn apply_adjoint(&self, params: &[f64], state: &Statevector) -> Result<Statevector> {
        self.check_params(params)?;
        let mut s = state.clone();
        for g in self.gates.iter().rev() {
            g.apply_adjoint_pure(&mut s, params);
        }
        Ok(s)
    }

    /// |φ(θ)⟩ = U(θ)|φ_ref⟩.
    pub fn prepare(&self, params: &[f64]) -> Result<Statevector> {
        self.apply_pure(params, &self.reference())
    }

    /// Dense U(θ) (reference state not included).
    pub fn unitary(&self, params: &[f64]) -> Result<DMatrix<C64>> {
        self.check_params(params)?;
        let dim = 1usize << self.n_qubits;
        let mut out = DMatrix::identity(dim, dim);
        for g in &self.gates {
            out = g.dense(self.n_qubits, params) * out;
        }
        Ok(out)
    }

    /// Indices of gates bound to parameter `slot`.
    pub fn gates_for_slot(&self, slot: usize) -> Vec<usize> {
        self.gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.slot() == Some(slot))
            .map(|(k, _)| k)
            .collect()
    }

    /// ∂|φ(θ)⟩/∂θ_p for every slot, as Σ_{gates k on p} Σ_i g_{k,i} U_N…U_k σ_{k,i} U_{k−1}…U_1|φ_ref⟩.
    pub fn derivative_states(&self, params: &[f64]) -> Result<Vec<Statevector>> {
        self.check_params(params)?;
        let dim = 1usize << self.n_qubits;
        let mut out = vec![vec![C64::new(0.0, 0.0); dim]; self.n_params];
        let mut s = self.reference();
        for (k, g) in self.gates.iter().enumerate() {
            g.apply_pure(&mut s, params);
            let Some(slot) = g.slot() else { continue };
            for (gk, sigma) in g.generators() {
                let mut branch = Statevector::from_amplitudes_unchecked(sigma.apply(s.amplitudes()))?;
                for later in &self.gates[k + 1..] {
                    later.apply_pure(&mut branch, params);
                }
                for (o, b) in out[slot].iter_mut().zip(branch.amplitudes()) {
                    *o += gk * b;
                }
            }
        }
        out.into_iter()
            .map(Statevector::from_amplitudes_unchecked)
            .collect()
    }

    /// Branch state U_N…U_{k+1} σ U_k…U_1|φ_ref⟩ with σ inserted after gate
    /// `k` (or the plain output when `insert` is `None`).
    pub fn branch_state(
        &self,
        params: &[f64],
        insert: Option<(usize, &PauliString)>,
    ) -> Result<Statevector> {
        self.check_params(params)?;
        let mut s = self.reference();
        for (k, g) in self.gates.iter().enumerate() {
            g.apply_pure(&mut s, params);
            if let Some((at, sigma)) = insert {
                if at == k {
                    s = Statevector::from_amplitudes_unchecked(sigma.apply(s.amplitudes()))?;
                }
            }
        }
        Ok(s)
    }

    /// Circuit with every gate embedded at `offset` inside `width` qubits.
    pub fn embed(&self, offset: usize, width: usize) -> Result<Circuit> {
        let mut c = Circuit::new(width)?.with_params(self.n_params);
        for g in &self.gates {
            c.push(g.embed(offset, width))?;
        }
        Ok(c)
    }
}
