//! Pauli twirling.

use vqlab_core::PauliString;

use crate::channel::QuantumChannel;
use crate::error::{NoiseError, Result};

/// Pauli-averaged channel (1/4^k) Σ_P P† E(P ρ P†) P, returned as a Pauli
/// channel whose transfer matrix is the diagonal of the input's.
pub fn pauli_twirl(channel: &QuantumChannel) -> Result<QuantumChannel> {
    let k = channel.n_qubits();
    if k == 0 || k > 2 {
        return Err(NoiseError::UnsupportedArity(k));
    }
    let r = channel.ptm();
    let strings = PauliString::all(k);
    let m = strings.len();
    // p_j = (1/4^k) Σ_i s_ij λ_i with s_ij = ±1 for commuting / anticommuting pairs.
    let probs: Vec<f64> = (0..m)
        .map(|j| {
            let s: f64 = (0..m)
                .map(|i| {
                    let sign = if strings[i].commutes_with(&strings[j]) { 1.0 } else { -1.0 };
                    sign * r[(i, i)]
                })
                .sum();
            let p = s / m as f64;
            if p.abs() < 1e-15 {
                0.0
            } else {
                p
            }
        })
        .collect();
    QuantumChannel::pauli(&format!("twirl({})", channel.label()), k, &probs)
}
