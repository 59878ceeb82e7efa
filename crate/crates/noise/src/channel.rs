//! Quantum channels in Kraus form with superoperator and Pauli-transfer views.

use nalgebra::DMatrix;
use vqlab_core::linalg;
use vqlab_core::{kernels, DensityMatrix, Pauli, PauliString, C64};

use crate::error::{NoiseError, Result};

/// A completely positive map on `n_qubits` ≤ 2 qubits, Σ K†K = I unless
/// built as a trace-non-increasing operation.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    label: String,
    n_qubits: usize,
    kraus: Vec<DMatrix<C64>>,
    trace_preserving: bool,
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn kraus_sum(kraus: &[DMatrix<C64>], dim: usize) -> DMatrix<C64> {
    kraus
        .iter()
        .fold(DMatrix::zeros(dim, dim), |acc, k| acc + k.adjoint() * k)
}

fn check_probability(p: f64, max: f64) -> Result<()> {
    if !(0.0..=max).contains(&p) || !p.is_finite() {
        return Err(NoiseError::ProbabilityOutOfRange { value: p, max });
    }
    Ok(())
}

impl QuantumChannel {
    /// Trace-preserving channel; Σ K†K = I is checked to 1e-10.
    pub fn new(label: &str, kraus: Vec<DMatrix<C64>>) -> Result<Self> {
        let dim = kraus.first().map(|k| k.nrows()).unwrap_or(1);
        if !dim.is_power_of_two() || kraus.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
            return Err(NoiseError::UnsupportedArity(0));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        let dev = (kraus_sum(&kraus, dim) - DMatrix::identity(dim, dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > 1e-10 {
            return Err(NoiseError::NotTracePreserving { deviation: dev });
        }
        Ok(Self {
            label: label.to_string(),
            n_qubits,
            kraus,
            trace_preserving: true,
        })
    }

    /// Trace-non-increasing operation (Σ K†K ≤ I), e.g. a projection.
    pub fn operation(label: &str, kraus: Vec<DMatrix<C64>>) -> Result<Self> {
        let dim = kraus.first().map(|k| k.nrows()).unwrap_or(1);
        if !dim.is_power_of_two() || kraus.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
            return Err(NoiseError::UnsupportedArity(0));
        }
        let (vals, _) = linalg::eigh(&kraus_sum(&kraus, dim));
        let top = vals.last().copied().unwrap_or(0.0);
        if top > 1.0 + 1e-10 {
            return Err(NoiseError::TraceIncreasing { excess: top - 1.0 });
        }
        let trace_preserving = vals.iter().all(|v| (v - 1.0).abs() < 1e-10);
        Ok(Self {
            label: label.to_string(),
            n_qubits: dim.trailing_zeros() as usize,
            kraus,
            trace_preserving,
        })
    }

    pub fn identity(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            label: "identity".into(),
            n_qubits,
            kraus: vec![DMatrix::identity(dim, dim)],
            trace_preserving: true,
        }
    }

    pub fn unitary(label: &str, u: DMatrix<C64>) -> Result<Self> {
        Self::new(label, vec![u])
    }

    /// Σ_j p_j P_j ρ P_j over the Pauli strings of `n_qubits` qubits, in the
    /// order of [`PauliString::all`].
    pub fn pauli(label: &str, n_qubits: usize, probs: &[f64]) -> Result<Self> {
        let strings = PauliString::all(n_qubits);
        if probs.len() != strings.len() {
            return Err(NoiseError::UnsupportedArity(n_qubits));
        }
        for &p in probs {
            check_probability(p, 1.0)?;
        }
        let kraus = strings
            .iter()
            .zip(probs)
            .filter(|(_, &p)| p > 0.0)
            .map(|(s, &p)| s.to_dense() * c(p.sqrt()))
            .collect();
        Self::new(label, kraus)
    }

    /// (1 − 3p/4)ρ + (p/4)(XρX + YρY + ZρZ), 0 ≤ p ≤ 4/3.
    pub fn depolarizing(p: f64) -> Result<Self> {
        check_probability(p, 4.0 / 3.0)?;
        Self::pauli("depolarizing", 1, &[1.0 - 0.75 * p, p / 4.0, p / 4.0, p / 4.0])
    }

    /// (1 − p)ρ + p·I/2^k. Commutes with every unitary on the same qubits.
    pub fn global_depolarizing(p: f64, n_qubits: usize) -> Result<Self> {
        let d2 = (1usize << (2 * n_qubits)) as f64;
        check_probability(p, d2 / (d2 - 1.0))?;
        let mut probs = vec![p / d2; 1 << (2 * n_qubits)];
        probs[0] = 1.0 - p + p / d2;
        Self::pauli("global_depolarizing", n_qubits, &probs)
    }

    pub fn bit_flip(p: f64) -> Result<Self> {
        check_probability(p, 1.0)?;
        Self::pauli("bit_flip", 1, &[1.0 - p, p, 0.0, 0.0])
    }

    pub fn phase_flip(p: f64) -> Result<Self> {
        check_probability(p, 1.0)?;
        Self::pauli("phase_flip", 1, &[1.0 - p, 0.0, 0.0, p])
    }

    /// Decay |1⟩ → |0⟩ with probability γ.
    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        check_probability(gamma, 1.0)?;
        let z = c(0.0);
        let k0 = DMatrix::from_row_slice(2, 2, &[c(1.0), z, z, c((1.0 - gamma).sqrt())]);
        let k1 = DMatrix::from_row_slice(2, 2, &[z, c(gamma.sqrt()), z, z]);
        Self::new("amplitude_damping", vec![k0, k1])
    }

    pub fn phase_damping(lambda: f64) -> Result<Self> {
        check_probability(lambda, 1.0)?;
        let z = c(0.0);
        let k0 = DMatrix::from_row_slice(2, 2, &[c(1.0), z, z, c((1.0 - lambda).sqrt())]);
        let k1 = DMatrix::from_row_slice(2, 2, &[z, z, z, c(lambda.sqrt())]);
        Self::new("phase_damping", vec![k0, k1])
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn kraus(&self) -> &[DMatrix<C64>] {
        &self.kraus
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// max |Σ K†K − I|.
    pub fn trace_preservation_error(&self) -> f64 {
        let dim = self.dim();
        (kraus_sum(&self.kraus, dim) - DMatrix::identity(dim, dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Dense action on a 2^k × 2^k matrix.
    pub fn apply_matrix(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        self.kraus
            .iter()
            .fold(DMatrix::zeros(rho.nrows(), rho.ncols()), |acc, k| {
                acc + k * rho * k.adjoint()
            })
    }

    /// ρ ← Σ K ρ K† on the listed qubits of a larger register.
    pub fn apply(&self, rho: &mut DensityMatrix, targets: &[usize]) -> Result<()> {
        if targets.len() != self.n_qubits {
            return Err(NoiseError::UnsupportedArity(targets.len()));
        }
        let n = rho.n_qubits();
        for &q in targets {
            if q >= n {
                return Err(vqlab_core::QuantumError::QubitOutOfRange {
                    index: q,
                    n_qubits: n,
                }
                .into());
            }
        }
        if self.kraus.len() == 1 && self.trace_preserving && self.label == "identity" {
            return Ok(());
        }
        let cols: Vec<usize> = targets.iter().map(|&q| q + n).collect();
        let original = rho.data().to_vec();
        let mut acc = vec![C64::new(0.0, 0.0); original.len()];
        for k in &self.kraus {
            let mut work = original.clone();
            kernels::apply_matrix(&mut work, 2 * n, targets, k);
            kernels::apply_matrix(&mut work, 2 * n, &cols, &k.map(|z| z.conj()));
            for (a, w) in acc.iter_mut().zip(&work) {
                *a += w;
            }
        }
        rho.data_mut().copy_from_slice(&acc);
        Ok(())
    }

    /// `other ∘ self` (apply self first).
    pub fn then(&self, other: &QuantumChannel) -> Result<QuantumChannel> {
        if self.n_qubits != other.n_qubits {
            return Err(NoiseError::UnsupportedArity(other.n_qubits));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for b in &other.kraus {
            for a in &self.kraus {
                kraus.push(b * a);
            }
        }
        let label = format!("{}∘{}", other.label, self.label);
        if self.trace_preserving && other.trace_preserving {
            QuantumChannel::new(&label, kraus)
        } else {
            QuantumChannel::operation(&label, kraus)
        }
    }

    /// self ⊗ other (self on the more significant qubits).
    pub fn tensor(&self, other: &QuantumChannel) -> Result<QuantumChannel> {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(a.kronecker(b));
            }
        }
        let label = format!("{}⊗{}", self.label, other.label);
        if self.trace_preserving && other.trace_preserving {
            QuantumChannel::new(&label, kraus)
        } else {
            QuantumChannel::operation(&label, kraus)
        }
    }

    /// (1 − w)·identity + w·self, the channel with its error weight scaled by w.
    pub fn scaled(&self, w: f64) -> Result<QuantumChannel> {
        check_probability(w, 1.0)?;
        if w == 1.0 {
            return Ok(self.clone());
        }
        let dim = self.dim();
        let mut kraus = vec![DMatrix::identity(dim, dim) * c((1.0 - w).sqrt())];
        kraus.extend(self.kraus.iter().map(|k| k * c(w.sqrt())));
        QuantumChannel::new(&self.label, kraus)
    }

    /// Row-major superoperator S with vec(E(ρ)) = S vec(ρ), S = Σ K ⊗ K*.
    pub fn superoperator(&self) -> DMatrix<C64> {
        let d = self.dim();
        self.kraus
            .iter()
            .fold(DMatrix::zeros(d * d, d * d), |acc, k| {
                acc + k.kronecker(&k.map(|z| z.conj()))
            })
    }

    /// Recover a Kraus form from a row-major superoperator via the Choi matrix.
    pub fn from_superoperator(label: &str, s: &DMatrix<C64>) -> Result<QuantumChannel> {
        let d2 = s.nrows();
        let d = (d2 as f64).sqrt().round() as usize;
        if d * d != d2 || !d.is_power_of_two() {
            return Err(NoiseError::UnsupportedArity(0));
        }
        // C[(i,a),(j,b)] = E(|i⟩⟨j|)[a,b] = S[(a,b),(i,j)]
        let mut choi = DMatrix::<C64>::zeros(d2, d2);
        for i in 0..d {
            for j in 0..d {
                for a in 0..d {
                    for b in 0..d {
                        choi[(i * d + a, j * d + b)] = s[(a * d + b, i * d + j)];
                    }
                }
            }
        }
        let (vals, vecs) = linalg::eigh(&choi);
        let mut kraus = Vec::new();
        for (k, &lam) in vals.iter().enumerate() {
            if lam <= 1e-14 {
                continue;
            }
            let mut m = DMatrix::<C64>::zeros(d, d);
            for i in 0..d {
                for a in 0..d {
                    m[(a, i)] = vecs[(i * d + a, k)] * lam.sqrt();
                }
            }
            kraus.push(m);
        }
        QuantumChannel::operation(label, kraus).and_then(|ch| {
            if ch.trace_preserving {
                Ok(ch)
            } else {
                Err(NoiseError::NotTracePreserving {
                    deviation: ch.trace_preservation_error(),
                })
            }
        })
    }

    /// Pauli-transfer matrix R_ij = Tr[P_i E(P_j)] / 2^k (real, 4^k × 4^k).
    pub fn ptm(&self) -> DMatrix<f64> {
        ptm_of(|m| self.apply_matrix(m), self.n_qubits)
    }
}

/// Pauli-transfer matrix of a linear map on k-qubit operators.
pub fn ptm_of(map: impl Fn(&DMatrix<C64>) -> DMatrix<C64>, n_qubits: usize) -> DMatrix<f64> {
    let basis: Vec<DMatrix<C64>> = PauliString::all(n_qubits).iter().map(|p| p.to_dense()).collect();
    let d = (1usize << n_qubits) as f64;
    let m = basis.len();
    let mut r = DMatrix::zeros(m, m);
    for (j, pj) in basis.iter().enumerate() {
        let out = map(pj);
        for (i, pi) in basis.iter().enumerate() {
            r[(i, j)] = (pi * &out).trace().re / d;
        }
    }
    r
}

/// PTM of a unitary channel.
pub fn unitary_ptm(u: &DMatrix<C64>) -> DMatrix<f64> {
    let n = u.nrows().trailing_zeros() as usize;
    ptm_of(|m| u * m * u.adjoint(), n)
}

/// Single-qubit Pauli matrix helper.
pub fn pauli_matrix(p: Pauli) -> DMatrix<C64> {
    p.matrix()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depolarizing_range() {
        assert!(QuantumChannel::depolarizing(-0.1).is_err());
        assert!(QuantumChannel::depolarizing(1.4).is_err());
        assert!(QuantumChannel::depolarizing(4.0 / 3.0).is_ok());
    }

    #[test]
    fn superoperator_round_trip() {
        let ch = QuantumChannel::amplitude_damping(0.3)
            .unwrap()
            .then(&QuantumChannel::depolarizing(0.2).unwrap())
            .unwrap();
        let back = QuantumChannel::from_superoperator("x", &ch.superoperator()).unwrap();
        assert!((back.superoperator() - ch.superoperator()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn non_tp_kraus_rejected() {
        let k = DMatrix::identity(2, 2) * c(0.5);
        assert!(matches!(
            QuantumChannel::new("half", vec![k.clone()]),
            Err(NoiseError::NotTracePreserving { .. })
        ));
        assert!(QuantumChannel::operation("half", vec![k]).is_ok());
    }

    #[test]
    fn ptm_of_depolarizing_is_diagonal() {
        let r = QuantumChannel::depolarizing(0.1).unwrap().ptm();
        assert!((r[(0, 0)] - 1.0).abs() < 1e-14);
        for k in 1..4 {
            assert!((r[(k, k)] - 0.9).abs() < 1e-14);
        }
    }
}
