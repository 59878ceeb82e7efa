//! Lindblad master equation in the factor-2 convention
//! dρ/dt = −i[H, ρ] + Σ_k (2 L_k ρ L_k† − L_k†L_k ρ − ρ L_k†L_k).
//!
//! With this convention amplitude damping L = √γ σ⁻ gives ρ₁₁(t) = ρ₁₁(0) e^{−2γt},
//! twice the rate of the more common ½-normalised form.

use nalgebra::DMatrix;
use vqlab_core::{DensityMatrix, PauliSum, QuantumError, C64};

use crate::channel::QuantumChannel;
use crate::error::{NoiseError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladSystem {
    n_qubits: usize,
    hamiltonian: DMatrix<C64>,
    jumps: Vec<DMatrix<C64>>,
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// σ⁻ = |0⟩⟨1|.
pub fn lowering() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)])
}

/// Embed a single-qubit operator on `qubit` of an `n`-qubit register.
pub fn embed_single(op: &DMatrix<C64>, qubit: usize, n: usize) -> DMatrix<C64> {
    let mut m = DMatrix::from_element(1, 1, c(1.0));
    for q in 0..n {
        if q == qubit {
            m = m.kronecker(op);
        } else {
            m = m.kronecker(&DMatrix::identity(2, 2));
        }
    }
    m
}

impl LindbladSystem {
    /// Jump operators are full-register matrices with rates absorbed.
    pub fn new(hamiltonian: &PauliSum, jumps: Vec<DMatrix<C64>>) -> Result<Self> {
        hamiltonian.ensure_hermitian()?;
        let n = hamiltonian.n_qubits();
        let dim = 1usize << n;
        for l in &jumps {
            if l.nrows() != dim || l.ncols() != dim {
                return Err(QuantumError::DimensionMismatch {
                    expected: dim,
                    found: l.nrows(),
                }
                .into());
            }
        }
        Ok(Self {
            n_qubits: n,
            hamiltonian: hamiltonian.to_dense(),
            jumps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn hamiltonian(&self) -> &DMatrix<C64> {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[DMatrix<C64>] {
        &self.jumps
    }

    /// dρ/dt.
    pub fn derivative(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let h = &self.hamiltonian;
        let mut out = (h * rho - rho * h) * C64::new(0.0, -1.0);
        for l in &self.jumps {
            let ld = l.adjoint();
            let ldl = &ld * l;
            out += (l * rho * &ld) * c(2.0) - &ldl * rho - rho * &ldl;
        }
        out
    }

    /// Row-major superoperator of the generator.
    pub fn superoperator(&self) -> DMatrix<C64> {
        let d = 1usize << self.n_qubits;
        let id = DMatrix::<C64>::identity(d, d);
        let h = &self.hamiltonian;
        let mut g = (h.kronecker(&id) - id.kronecker(&h.transpose())) * C64::new(0.0, -1.0);
        for l in &self.jumps {
            let ldl = l.adjoint() * l;
            g += l.kronecker(&l.map(|z| z.conj())) * c(2.0)
                - ldl.kronecker(&id)
                - id.kronecker(&ldl.transpose());
        }
        g
    }

    /// Exact propagation channel e^{tG} (small registers only).
    pub fn channel(&self, t: f64) -> Result<QuantumChannel> {
        let s = (self.superoperator() * c(t)).exp();
        QuantumChannel::from_superoperator("lindblad", &s)
    }

    /// Largest eigenvalue of Σ_k 2 L_k†L_k, the bound on the total jump rate.
    pub fn max_jump_rate(&self) -> f64 {
        let d = 1usize << self.n_qubits;
        let total = self
            .jumps
            .iter()
            .fold(DMatrix::<C64>::zeros(d, d), |acc, l| acc + l.adjoint() * l * c(2.0));
        let (vals, _) = vqlab_core::linalg::eigh(&total);
        vals.last().copied().unwrap_or(0.0).max(0.0)
    }
}

fn check_step(rho: &DMatrix<C64>, time: f64) -> Result<()> {
    let tr = rho.trace();
    let drift = ((tr.re - 1.0).powi(2) + tr.im.powi(2)).sqrt();
    if drift > 1e-8 || !drift.is_finite() {
        return Err(NoiseError::TraceDrift { drift, time });
    }
    let purity: f64 = rho.iter().map(|z| z.norm_sqr()).sum();
    if purity > 1.0 + 1e-8 || !purity.is_finite() {
        return Err(NoiseError::Unstable { time, purity });
    }
    Ok(())
}

/// Classic fourth-order Runge–Kutta integration from 0 to `t` with a step of
/// at most `dt`. Errors when the trace drifts by more than 1e-8 or the state
/// becomes unphysical.
pub fn lindblad_evolve(
    system: &LindbladSystem,
    rho0: &DensityMatrix,
    t: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    let out = lindblad_snapshots(system, rho0, &[t], dt)?;
    Ok(out.into_iter().next().expect("one snapshot"))
}

/// RK4 integration returning the state at each requested (ascending) time.
pub fn lindblad_snapshots(
    system: &LindbladSystem,
    rho0: &DensityMatrix,
    times: &[f64],
    dt: f64,
) -> Result<Vec<DensityMatrix>> {
    if !(dt > 0.0) || times.iter().any(|&t| !(t >= 0.0)) {
        return Err(NoiseError::InvalidTime {
            dt,
            t: times.first().copied().unwrap_or(0.0),
        });
    }
    if rho0.n_qubits() != system.n_qubits {
        return Err(QuantumError::QubitMismatch {
            left: system.n_qubits,
            right: rho0.n_qubits(),
        }
        .into());
    }
    let mut rho = rho0.to_matrix();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - now;
        if span < 0.0 {
            return Err(NoiseError::InvalidTime { dt, t: target });
        }
        let steps = (span / dt).ceil() as usize;
        let h = if steps > 0 { span / steps as f64 } else { 0.0 };
        for s in 0..steps {
            let k1 = system.derivative(&rho);
            let k2 = system.derivative(&(&rho + &k1 * c(h / 2.0)));
            let k3 = system.derivative(&(&rho + &k2 * c(h / 2.0)));
            let k4 = system.derivative(&(&rho + &k3 * c(h)));
            rho += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0);
            check_step(&rho, now + (s + 1) as f64 * h)?;
        }
        now = target;
        out.push(DensityMatrix::from_matrix_unchecked(&rho)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_traceless() {
        let h = PauliSum::from_real_terms(&[(0.4, "X"), (0.3, "Z")]).unwrap();
        let sys = LindbladSystem::new(&h, vec![lowering() * c(0.5)]).unwrap();
        let rho = DMatrix::from_row_slice(2, 2, &[c(0.3), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(0.7)]);
        assert!(sys.derivative(&rho).trace().norm() < 1e-15);
    }

    #[test]
    fn huge_step_is_reported() {
        let h = PauliSum::from_real_terms(&[(0.0, "Z")]).unwrap();
        let sys = LindbladSystem::new(&h, vec![lowering() * c(3.0)]).unwrap();
        let rho = vqlab_core::Statevector::basis(1, 1).unwrap().to_density().unwrap();
        assert!(lindblad_evolve(&sys, &rho, 5.0, 1.0).is_err());
    }
}
