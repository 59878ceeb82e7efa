//! Subspace-expansion mitigation on a noisy density matrix.

use nalgebra::DMatrix;
use vqlab_core::{DensityMatrix, PauliString, PauliSum, QuantumError, C64};
use vqlab_solvers::{solve_pencil, SolverError};

use crate::error::Result;
use crate::estimate::MitigatedEstimate;

/// Lowest root of H̃c = ES̃c with H̃_ij = Tr[ρP_i†HP_j] and S̃_ij = Tr[ρP_i†P_j].
/// γ = (Σ|c_i|)⁴ bounds the weight the energy puts on the measured entries.
pub fn qse_mitigate(rho: &DensityMatrix, h: &PauliSum, expansion: &[PauliString]) -> Result<MitigatedEstimate> {
    h.ensure_hermitian()?;
    let n = rho.n_qubits();
    if h.n_qubits() != n {
        return Err(QuantumError::QubitMismatch {
            left: n,
            right: h.n_qubits(),
        }
        .into());
    }
    if let Some(p) = expansion.iter().find(|p| p.n_qubits() != n) {
        return Err(QuantumError::QubitMismatch {
            left: n,
            right: p.n_qubits(),
        }
        .into());
    }
    if !expansion.iter().any(|p| p.is_identity()) {
        return Err(SolverError::MissingIdentity.into());
    }
    let r = rho.to_matrix();
    let hd = h.to_dense();
    let ops: Vec<DMatrix<C64>> = expansion.iter().map(|p| p.to_dense()).collect();
    let m = ops.len();
    let mut ht = DMatrix::zeros(m, m);
    let mut st = DMatrix::zeros(m, m);
    for i in 0..m {
        let left = &r * ops[i].adjoint();
        for j in 0..m {
            ht[(i, j)] = (&left * &hd * &ops[j]).trace();
            st[(i, j)] = (&left * &ops[j]).trace();
        }
    }
    let pencil = solve_pencil(&ht, &st)?;
    let c = pencil.coefficients.column(0);
    let l1: f64 = c.iter().map(|z| z.norm()).sum();
    let raw = h.trace_with(rho.data()).re;
    let mut out = MitigatedEstimate::new("qse", pencil.energies[0], 0.0, l1.powi(4).max(1.0), vec![raw])
        .with_detail("removed_directions", pencil.removed as f64);
    if pencil.removed > 0 {
        out.flags.push(format!("{} dependent directions removed", pencil.removed));
    }
    Ok(out)
}
