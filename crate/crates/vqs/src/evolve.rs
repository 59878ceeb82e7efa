//! Explicit-Euler integration of the McLachlan equations.

use std::fmt::Write as _;

use vqlab_core::{Circuit, PauliSum};

use crate::error::{Result, VqsError};
use crate::mclachlan::{assemble_mclachlan, Mode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub mode: Mode,
    pub total_time: f64,
    pub dt: f64,
    /// Relative singular-value cutoff for M⁺.
    pub cutoff: f64,
    /// Steps whose McLachlan residual exceeds this are flagged.
    pub residual_budget: Option<f64>,
}

impl EvolveOptions {
    pub fn new(mode: Mode, total_time: f64, dt: f64) -> Self {
        Self {
            mode,
            total_time,
            dt,
            cutoff: 1e-8,
            residual_budget: None,
        }
    }

    /// Number of Euler steps and the grid t_k = T·k/N.
    pub(crate) fn grid(&self) -> Result<(usize, f64)> {
        check_grid(self.total_time, self.dt)
    }
}

pub(crate) fn check_grid(total_time: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(VqsError::InvalidStep(dt));
    }
    if !(total_time >= 0.0) || !total_time.is_finite() {
        return Err(VqsError::InvalidTime(total_time));
    }
    let steps = (total_time / dt - 1e-9).ceil().max(0.0) as usize;
    Ok((steps, total_time))
}

/// Recorded trajectory; row k holds the state at `times[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub params: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub energies: Vec<f64>,
    /// Rows whose residual exceeded the budget.
    pub over_budget: Vec<usize>,
    /// Imaginary mode only: rows where the energy rose above the previous row.
    pub energy_increases: Vec<usize>,
}

impl EvolutionTrace {
    pub fn final_params(&self) -> &[f64] {
        self.params.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn final_energy(&self) -> f64 {
        self.energies.last().copied().unwrap_or(f64::NAN)
    }

    /// Columns t, θ_0…θ_{n−1}, residual, energy.
    pub fn to_csv(&self) -> String {
        let n = self.params.first().map_or(0, Vec::len);
        let mut out = String::from("t");
        for k in 0..n {
            let _ = write!(out, ",theta_{k}");
        }
        out.push_str(",residual,energy\n");
        for (i, t) in self.times.iter().enumerate() {
            let _ = write!(out, "{t:.12e}");
            for p in &self.params[i] {
                let _ = write!(out, ",{p:.12e}");
            }
            let _ = writeln!(out, ",{:.12e},{:.12e}", self.residuals[i], self.energies[i]);
        }
        out
    }
}

/// Integrates θ̇ = M⁺V (real time) or θ̇ = M⁺C (imaginary time) from θ0.
pub fn evolve(
    ansatz: &Circuit,
    theta0: &[f64],
    hamiltonian: &PauliSum,
    options: &EvolveOptions,
) -> Result<EvolutionTrace> {
    ansatz.check_params(theta0)?;
    if hamiltonian.n_qubits() != ansatz.n_qubits() {
        return Err(vqlab_core::QuantumError::QubitMismatch {
            left: hamiltonian.n_qubits(),
            right: ansatz.n_qubits(),
        }
        .into());
    }
    let (steps, total) = options.grid()?;
    let mut theta = theta0.to_vec();
    let mut trace = EvolutionTrace {
        times: Vec::with_capacity(steps + 1),
        params: Vec::with_capacity(steps + 1),
        residuals: Vec::with_capacity(steps + 1),
        energies: Vec::with_capacity(steps + 1),
        over_budget: Vec::new(),
        energy_increases: Vec::new(),
    };
    for k in 0..=steps {
        let t = if steps == 0 { 0.0 } else { total * k as f64 / steps as f64 };
        let sys = assemble_mclachlan(ansatz, &theta, hamiltonian, options.mode)?;
        let rate = sys.solve(options.cutoff);
        let residual = sys.residual(&rate);
        if options.residual_budget.is_some_and(|b| residual > b) {
            trace.over_budget.push(k);
        }
        if options.mode == Mode::Imaginary {
            if let Some(&prev) = trace.energies.last() {
                if sys.energy > prev + 1e-12 * prev.abs().max(1.0) {
                    trace.energy_increases.push(k);
                }
            }
        }
        trace.times.push(t);
        trace.params.push(theta.clone());
        trace.residuals.push(residual);
        trace.energies.push(sys.energy);
        if k < steps {
            let t_next = total * (k + 1) as f64 / steps as f64;
            let h = t_next - t;
            for (th, r) in theta.iter_mut().zip(rate.iter()) {
                *th += h * r;
            }
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covers_total_time() {
        assert_eq!(check_grid(1.0, 1e-3).unwrap().0, 1000);
        assert_eq!(check_grid(1.0, 0.3).unwrap().0, 4);
        assert_eq!(check_grid(0.0, 0.1).unwrap().0, 0);
        assert!(check_grid(1.0, f64::NAN).is_err());
    }
}
