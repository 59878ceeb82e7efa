//! Named model Hamiltonians.

use crate::error::{QuantumError, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::C64;

/// Open-chain transverse-field Ising model h Σ Z_i Z_{i+1} + λ Σ X_i.
pub fn transverse_ising(n_qubits: usize, h: f64, lambda: f64) -> Result<PauliSum> {
    if n_qubits == 0 {
        return Err(QuantumError::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    let mut out = PauliSum::zero(n_qubits);
    for i in 0..n_qubits.saturating_sub(1) {
        out.push(
            C64::new(h, 0.0),
            PauliString::from_sparse(n_qubits, &[(i, Pauli::Z), (i + 1, Pauli::Z)]),
        );
    }
    for i in 0..n_qubits {
        out.push(C64::new(lambda, 0.0), PauliString::single(n_qubits, i, Pauli::X));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigh;

    #[test]
    fn two_site_spectrum() {
        // h ZZ + λ(XI + IX): eigenvalues ±sqrt(h² + 4λ²) and ±h
        let (vals, _) = eigh(&transverse_ising(2, 1.0, 0.5).unwrap().to_dense());
        let r = 2f64.sqrt();
        let expect = [-r, -1.0, 1.0, r];
        for (v, e) in vals.iter().zip(expect) {
            assert!((v - e).abs() < 1e-12);
        }
    }
}
