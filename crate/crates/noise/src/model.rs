//! Noise models and noisy circuit execution.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use vqlab_core::{Circuit, DensityMatrix, GateOp, PauliSum, QuantumState, C64};

use crate::channel::QuantumChannel;
use crate::confusion::ConfusionMatrix;
use crate::error::{NoiseError, Result};
use crate::lindblad::LindbladSystem;

/// Per-qubit continuous noise applied to every qubit after every gate for a
/// duration `tau`. Each entry of `jumps` is a list of single-qubit jump
/// operators (rates absorbed) in the factor-2 Lindblad convention.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousNoise {
    pub jumps: Vec<DMatrix<C64>>,
    pub tau: f64,
}

/// Gate-indexed channel assignment plus readout and continuous noise.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NoiseModel {
    /// Channel after every 1-qubit gate (and per target of ≥3-qubit gates).
    pub single_qubit: Option<QuantumChannel>,
    /// Channel after every 2-qubit gate.
    pub two_qubit: Option<QuantumChannel>,
    /// Overrides keyed by gate name.
    pub by_name: BTreeMap<String, QuantumChannel>,
    /// Noise-reduction divisors h_q ≥ 1 (default 1 for every qubit).
    pub scales: Vec<f64>,
    pub continuous: Option<ContinuousNoise>,
    pub readout: Option<ConfusionMatrix>,
    /// Error on gates without an assigned channel instead of treating them as noiseless.
    pub strict: bool,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn with_single_qubit(mut self, ch: QuantumChannel) -> Self {
        self.single_qubit = Some(ch);
        self
    }

    pub fn with_two_qubit(mut self, ch: QuantumChannel) -> Self {
        self.two_qubit = Some(ch);
        self
    }

    pub fn with_gate(mut self, name: &str, ch: QuantumChannel) -> Self {
        self.by_name.insert(name.to_string(), ch);
        self
    }

    pub fn with_continuous(mut self, noise: ContinuousNoise) -> Self {
        self.continuous = Some(noise);
        self
    }

    pub fn with_readout(mut self, n: ConfusionMatrix) -> Self {
        self.readout = Some(n);
        self
    }

    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    /// Set the noise-reduction divisor of one qubit.
    pub fn with_scale(mut self, qubit: usize, h: f64) -> Result<Self> {
        if !(h >= 1.0) {
            return Err(NoiseError::InvalidScale { qubit, value: h });
        }
        if self.scales.len() <= qubit {
            self.scales.resize(qubit + 1, 1.0);
        }
        self.scales[qubit] = h;
        Ok(self)
    }

    pub fn scale(&self, qubit: usize) -> f64 {
        self.scales.get(qubit).copied().unwrap_or(1.0)
    }

    /// Channel assignments for one gate as (channel, targets) pairs.
    pub fn channels_for(&self, gate: &GateOp) -> Result<Vec<(QuantumChannel, Vec<usize>)>> {
        let targets = gate.targets();
        if let Some(ch) = self.by_name.get(gate.name()) {
            if ch.n_qubits() == targets.len() {
                return Ok(vec![(ch.clone(), targets)]);
            }
            return Ok(targets.iter().map(|&q| (ch.clone(), vec![q])).collect());
        }
        let assigned = match targets.len() {
            0 => Some(Vec::new()),
            2 => self.two_qubit.as_ref().map(|ch| vec![(ch.clone(), targets.clone())]),
            _ => self
                .single_qubit
                .as_ref()
                .map(|ch| targets.iter().map(|&q| (ch.clone(), vec![q])).collect()),
        };
        match assigned {
            Some(v) => Ok(v),
            None if self.strict => Err(NoiseError::MissingChannel {
                gate: gate.name().to_string(),
                arity: targets.len(),
            }),
            None => Ok(Vec::new()),
        }
    }

    /// Weight applied to a discrete channel on `targets`: Π 1/h_q.
    fn weight(&self, targets: &[usize]) -> f64 {
        targets.iter().map(|&q| 1.0 / self.scale(q)).product()
    }

    /// Single-qubit channel for the continuous noise on `qubit`, with the
    /// jump rates divided by h_q.
    pub fn continuous_channel(&self, qubit: usize) -> Result<Option<QuantumChannel>> {
        let Some(cont) = &self.continuous else {
            return Ok(None);
        };
        let h = self.scale(qubit);
        if h.is_infinite() || cont.jumps.is_empty() {
            return Ok(None);
        }
        let scale = C64::new((1.0 / h).sqrt(), 0.0);
        let jumps = cont.jumps.iter().map(|l| l * scale).collect();
        let zero = PauliSum::from_real_terms(&[(0.0, "I")])?;
        Ok(Some(LindbladSystem::new(&zero, jumps)?.channel(cont.tau)?))
    }
}

impl NoiseModel {
    /// Every channel applied after each gate of `circuit`, in application
    /// order: the gate's discrete channels (already weighted by the h
    /// divisors) followed by the continuous channel of every qubit.
    pub fn circuit_noise(&self, circuit: &Circuit) -> Result<Vec<Vec<(QuantumChannel, Vec<usize>)>>> {
        let n = circuit.n_qubits();
        let continuous: Vec<Option<QuantumChannel>> =
            (0..n).map(|q| self.continuous_channel(q)).collect::<Result<_>>()?;
        let mut out = Vec::with_capacity(circuit.gates().len());
        for g in circuit.gates() {
            let mut slots = Vec::new();
            for (ch, targets) in self.channels_for(g)? {
                let w = self.weight(&targets);
                if w == 1.0 {
                    slots.push((ch, targets));
                } else if w > 0.0 {
                    slots.push((ch.scaled(w)?, targets));
                }
            }
            for (q, ch) in continuous.iter().enumerate() {
                if let Some(ch) = ch {
                    slots.push((ch.clone(), vec![q]));
                }
            }
            out.push(slots);
        }
        Ok(out)
    }
}

/// E_N∘U_N∘…∘E_1∘U_1(ρ_in) on a density matrix.
pub fn run_noisy_circuit(
    circuit: &Circuit,
    params: &[f64],
    noise: &NoiseModel,
    input: &QuantumState,
) -> Result<DensityMatrix> {
    circuit.check_params(params)?;
    let mut rho = input.to_density()?;
    if rho.n_qubits() != circuit.n_qubits() {
        return Err(vqlab_core::QuantumError::QubitMismatch {
            left: circuit.n_qubits(),
            right: rho.n_qubits(),
        }
        .into());
    }
    let slots = noise.circuit_noise(circuit)?;
    for (g, after) in circuit.gates().iter().zip(&slots) {
        g.apply_mixed(&mut rho, params);
        for (ch, targets) in after {
            ch.apply(&mut rho, targets)?;
        }
    }
    Ok(rho)
}

/// Run from the circuit's own reference state.
pub fn run_noisy(circuit: &Circuit, params: &[f64], noise: &NoiseModel) -> Result<DensityMatrix> {
    run_noisy_circuit(circuit, params, noise, &QuantumState::Pure(circuit.reference()))
}

/// Computational-basis outcome distribution, passed through the readout
/// confusion matrix when the model has one.
pub fn measured_distribution(rho: &DensityMatrix, noise: &NoiseModel) -> Vec<f64> {
    let p = rho.diagonal();
    match &noise.readout {
        Some(n) if n.n_qubits() == rho.n_qubits() => n.apply(&p),
        _ => p,
    }
}

/// Parse a declarative channel specification such as `depolarizing 0.01`
/// for a gate of the given arity.
pub fn parse_channel(spec: &str, arity: usize) -> Result<QuantumChannel> {
    let mut parts = spec.split_whitespace();
    let name = parts.next().unwrap_or("");
    let arg = parts.next();
    let value = || -> Result<f64> {
        arg.and_then(|a| a.parse::<f64>().ok())
            .ok_or_else(|| NoiseError::UnknownChannel(spec.to_string()))
    };
    if parts.next().is_some() {
        return Err(NoiseError::UnknownChannel(spec.to_string()));
    }
    let single = match name {
        "identity" | "none" => return Ok(QuantumChannel::identity(arity)),
        "global_depolarizing" => return QuantumChannel::global_depolarizing(value()?, arity),
        "depolarizing" => QuantumChannel::depolarizing(value()?)?,
        "bit_flip" => QuantumChannel::bit_flip(value()?)?,
        "phase_flip" => QuantumChannel::phase_flip(value()?)?,
        "amplitude_damping" => QuantumChannel::amplitude_damping(value()?)?,
        "phase_damping" => QuantumChannel::phase_damping(value()?)?,
        _ => return Err(NoiseError::UnknownChannel(spec.to_string())),
    };
    let mut ch = single.clone();
    for _ in 1..arity {
        ch = ch.tensor(&single)?;
    }
    Ok(ch.with_label(name))
}
