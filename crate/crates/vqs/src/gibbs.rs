//! Gibbs-state preparation by imaginary-time evolution of a purification.
//!
//! Register layout: ancillas a_0…a_{n−1} on qubits 0…n−1, system s_i on
//! qubit n + i. Evolving |ψ_max⟩ = ⊗_i (|00⟩ + |11⟩)/√2 under H_s ⊗ I for
//! imaginary time τ leaves Tr_a|ψ⟩⟨ψ| = e^{−2Hτ}/Z on the system.

use vqlab_core::{Angle, Circuit, DensityMatrix, GateOp, Pauli, PauliString, PauliSum};

use crate::error::{Result, VqsError};
use crate::evolve::{evolve, EvolutionTrace, EvolveOptions};
use crate::mclachlan::Mode;

/// Bell-pair preparation followed by one rotation for every generator
/// G = P_a Q_s + Q_a P_s (or P_a P_s) with an odd number of Y letters. Such
/// rotations are real orthogonal and commute with the ancilla–system swap,
/// so the state stays of the form (S ⊗ I)|ψ_max⟩ with S real symmetric,
/// which is where e^{−Hτ}|ψ_max⟩ lives for real H. The parameter count grows
/// as 16ⁿ/4, so this is meant for small systems. Identity at θ = 0.
pub fn purification_ansatz(n_system: usize) -> Result<Circuit> {
    let width = 2 * n_system;
    let mut c = Circuit::new(width)?;
    for i in 0..n_system {
        c.push(GateOp::h(i))?;
        c.push(GateOp::cnot(i, n_system + i))?;
    }
    let strings = PauliString::all(n_system);
    let joint = |a: &PauliString, s: &PauliString| {
        let mut letters = a.letters().to_vec();
        letters.extend_from_slice(s.letters());
        PauliString::new(letters)
    };
    let mut slot = 0;
    for (i, p) in strings.iter().enumerate() {
        for q in &strings[i..] {
            let g = joint(p, q);
            if g.letters().iter().filter(|&&l| l == Pauli::Y).count() % 2 == 0 {
                continue;
            }
            let mut terms = vec![(0.5, g)];
            if p != q {
                terms.push((0.5, joint(q, p)));
            }
            c.push(GateOp::rotation("Rsym", terms, Angle::Param(slot))?)?;
            slot += 1;
        }
    }
    Ok(c)
}

/// H acting on the system half of the joint register.
pub fn lift_to_system(hamiltonian: &PauliSum) -> PauliSum {
    let n = hamiltonian.n_qubits();
    let mut out = PauliSum::zero(2 * n);
    for (c, p) in hamiltonian.terms() {
        let mut letters = vec![Pauli::I; n];
        letters.extend_from_slice(p.letters());
        out.push(*c, PauliString::with_phase(letters, p.phase_power()));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsResult {
    pub state: DensityMatrix,
    pub trace: EvolutionTrace,
}

/// Approximates e^{−2Hτ}/Z. `ansatz` acts on 2n qubits and must prepare a
/// maximally entangled ancilla–system state at `theta0`.
pub fn prepare_gibbs(
    hamiltonian: &PauliSum,
    ansatz: &Circuit,
    theta0: &[f64],
    tau: f64,
    dt: f64,
) -> Result<GibbsResult> {
    let n = hamiltonian.n_qubits();
    if ansatz.n_qubits() != 2 * n {
        return Err(VqsError::PurificationWidth {
            system: n,
            found: ansatz.n_qubits(),
        });
    }
    let ancillas: Vec<usize> = (0..n).collect();
    let reduced = |params: &[f64]| -> Result<DensityMatrix> {
        Ok(ansatz.prepare(params)?.to_density()?.partial_trace(&ancillas)?)
    };
    let start = reduced(theta0)?;
    let mixed = DensityMatrix::maximally_mixed(n)?;
    let deviation = start.trace_distance(&mixed);
    if deviation > 1e-8 {
        return Err(VqsError::NotMaximallyEntangled { deviation });
    }
    let options = EvolveOptions::new(Mode::Imaginary, tau, dt);
    let trace = evolve(ansatz, theta0, &lift_to_system(hamiltonian), &options)?;
    let state = reduced(trace.final_params())?;
    Ok(GibbsResult { state, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ansatz_starts_at_bell_pairs() {
        let c = purification_ansatz(1).unwrap();
        // IY+YI, XY+YX, YZ+ZY
        assert_eq!(c.n_params(), 3);
        let psi = c.prepare(&[0.0; 3]).unwrap();
        let s = 0.5f64.sqrt();
        let expect = [s, 0.0, 0.0, s];
        for (a, e) in psi.amplitudes().iter().zip(expect) {
            assert!((a.re - e).abs() < 1e-15 && a.im.abs() < 1e-15);
        }
    }

    #[test]
    fn lift_places_h_on_system_half() {
        let h = PauliSum::from_real_terms(&[(0.5, "XZ")]).unwrap();
        let lifted = lift_to_system(&h);
        assert_eq!(lifted.n_qubits(), 4);
        assert_eq!(lifted.terms()[0].1.to_string(), "IIXZ");
    }
}
