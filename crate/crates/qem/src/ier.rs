//! Individual error reduction: subtract the change seen when the noise on
//! one qubit at a time is divided by h_l.

use vqlab_core::{Circuit, PauliSum, QuantumError};
use vqlab_noise::{run_noisy, NoiseModel};

use crate::error::{QemError, Result};
use crate::estimate::MitigatedEstimate;

/// Weight h/(h − 1) that turns the change from dividing the noise by h into
/// the full first-order contribution of that qubit (1 for h = ∞).
pub fn reduction_coefficient(h: f64) -> f64 {
    if h.is_infinite() {
        1.0
    } else {
        h / (h - 1.0)
    }
}

/// ⟨M⟩ − Σ_l h_l/(h_l − 1)·(⟨M⟩ − ⟨M⟩_l), where ⟨M⟩_l is measured with the
/// noise on qubit l divided by `divisors[l]`. The first-order noise
/// contribution cancels, leaving an O(τ²) bias.
pub fn individual_error_reduction(
    circuit: &Circuit,
    params: &[f64],
    noise: &NoiseModel,
    observable: &PauliSum,
    divisors: &[f64],
) -> Result<MitigatedEstimate> {
    let n = circuit.n_qubits();
    if divisors.len() != n {
        return Err(QuantumError::QubitMismatch {
            left: n,
            right: divisors.len(),
        }
        .into());
    }
    for (qubit, &value) in divisors.iter().enumerate() {
        if !(value > 1.0) {
            return Err(QemError::InvalidDivisor { qubit, value });
        }
    }
    let measure = |model: &NoiseModel| -> Result<f64> {
        let rho = run_noisy(circuit, params, model)?;
        Ok(observable.trace_with(rho.data()).re)
    };
    let raw = measure(noise)?;
    let mut inputs = vec![raw];
    let mut value = raw;
    let mut weight_raw = 1.0;
    let mut gamma = 0.0;
    for (l, &h) in divisors.iter().enumerate() {
        let reduced = noise.clone().with_scale(l, noise.scale(l) * h)?;
        let m_l = measure(&reduced)?;
        let c = reduction_coefficient(h);
        value -= c * (raw - m_l);
        weight_raw -= c;
        gamma += c * c;
        inputs.push(m_l);
    }
    gamma += weight_raw * weight_raw;
    Ok(MitigatedEstimate::new("individual_error_reduction", value, 0.0, gamma, inputs))
}
