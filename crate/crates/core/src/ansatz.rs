//! Ansatz templates.

use crate::circuit::Circuit;
use crate::error::Result;
use crate::gate::{Angle, GateOp};
use crate::pauli::PauliString;

/// Hardware-efficient ansatz: `depth` blocks of (Ry, Rz on every qubit, then a
/// CNOT ladder 0→1→…→n−1), closed by a final Ry/Rz layer.
/// Parameter count is 2n(depth + 1).
pub fn hardware_efficient(n_qubits: usize, depth: usize) -> Result<Circuit> {
    let mut c = Circuit::new(n_qubits)?;
    let mut slot = 0;
    let mut rotation_layer = |c: &mut Circuit| -> Result<()> {
        for q in 0..n_qubits {
            c.push(GateOp::ry(n_qubits, q, Angle::Param(slot)))?;
            c.push(GateOp::rz(n_qubits, q, Angle::Param(slot + 1)))?;
            slot += 2;
        }
        Ok(())
    };
    for _ in 0..depth {
        rotation_layer(&mut c)?;
        for q in 0..n_qubits.saturating_sub(1) {
            c.push(GateOp::cnot(q, q + 1))?;
        }
    }
    rotation_layer(&mut c)?;
    Ok(c)
}

/// Global-phase gate e^{−iθ}, a rotation about the identity string. It is
/// invisible on density matrices but lets variational evolution track phase.
pub fn global_phase(n_qubits: usize, angle: Angle) -> GateOp {
    GateOp::Rotation {
        name: "gphase".into(),
        terms: vec![(1.0, PauliString::identity(n_qubits))],
        angle,
    }
}
