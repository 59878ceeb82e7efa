//! First-order Trotter circuits.

use crate::circuit::Circuit;
use crate::error::{QuantumError, Result};
use crate::gate::{Angle, GateOp};
use crate::pauli::PauliSum;

/// (Π_j e^{−i f_j P_j t/N_T})^{N_T} as a fixed-angle circuit. Identity terms
/// become global-phase gates so the dense unitary matches e^{−iHt} exactly
/// in the commuting case.
pub fn trotterize(hamiltonian: &PauliSum, t: f64, steps: usize) -> Result<Circuit> {
    if steps == 0 {
        return Err(QuantumError::ZeroTrotterSteps);
    }
    hamiltonian.ensure_hermitian()?;
    let n = hamiltonian.n_qubits();
    let terms = hamiltonian.real_terms();
    let dt = t / steps as f64;
    let mut c = Circuit::new(n)?;
    for _ in 0..steps {
        for (f, p) in &terms {
            c.push(GateOp::rotation("trotter", vec![(*f, p.clone())], Angle::Fixed(dt))?)?;
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    #[test]
    fn zero_steps_rejected() {
        let h = PauliSum::from_real_terms(&[(1.0, "Z")]).unwrap();
        assert_eq!(trotterize(&h, 1.0, 0).unwrap_err(), QuantumError::ZeroTrotterSteps);
    }

    #[test]
    fn commuting_terms_exact() {
        let h = PauliSum::from_real_terms(&[(0.7, "ZI"), (-0.4, "IZ"), (0.2, "II")]).unwrap();
        let u = trotterize(&h, 1.3, 1).unwrap().unitary(&[]).unwrap();
        let want = linalg::unitary_propagator(&h.to_dense(), 1.3);
        assert!((u - want).iter().all(|z| z.norm() < 1e-12));
    }
}
