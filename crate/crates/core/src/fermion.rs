//! Jordan–Wigner encoding of fermionic ladder operators.

use crate::error::{QuantumError, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Create,
    Annihilate,
}

/// Qubit image of a_i† (or a_i) for mode `i` of `modes`, 1-based:
/// I^{⊗i−1} ⊗ (X ± iY)/2 ⊗ Z^{⊗N−i}, with the + sign for creation.
pub fn jordan_wigner(i: usize, modes: usize, kind: LadderKind) -> Result<PauliSum> {
    if i == 0 || i > modes {
        return Err(QuantumError::ModeOutOfRange { index: i, modes });
    }
    let mut x = vec![Pauli::I; modes];
    for l in x.iter_mut().skip(i) {
        *l = Pauli::Z;
    }
    let mut y = x.clone();
    x[i - 1] = Pauli::X;
    y[i - 1] = Pauli::Y;
    let sign = match kind {
        LadderKind::Create => 0.5,
        LadderKind::Annihilate => -0.5,
    };
    PauliSum::new(
        modes,
        vec![
            (C64::new(0.5, 0.0), PauliString::new(x)),
            (C64::new(0.0, sign), PauliString::new(y)),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_of_range_mode() {
        assert!(jordan_wigner(0, 2, LadderKind::Create).is_err());
        assert!(jordan_wigner(3, 2, LadderKind::Create).is_err());
    }

    #[test]
    fn annihilator_is_adjoint_of_creator() {
        let c = jordan_wigner(2, 3, LadderKind::Create).unwrap().to_dense();
        let a = jordan_wigner(2, 3, LadderKind::Annihilate).unwrap().to_dense();
        assert!((c.adjoint() - a).iter().all(|z| z.norm() < 1e-15));
    }
}
