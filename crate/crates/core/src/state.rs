//! Statevectors and density matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{QuantumError, Result};
use crate::{C64, MAX_DENSITY_QUBITS, MAX_STATEVECTOR_QUBITS};

fn check_cap(kind: &'static str, cap: usize, n: usize) -> Result<()> {
    if n > cap {
        Err(QuantumError::QubitCapExceeded {
            kind,
            cap,
            requested: n,
        })
    } else {
        Ok(())
    }
}

/// A normalised pure state of `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl Statevector {
    /// |0…0⟩.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_cap("statevector", MAX_STATEVECTOR_QUBITS, n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(QuantumError::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wrap amplitudes, checking the length and normalisation (1e-10).
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let s = Self::from_amplitudes_unchecked(amps)?;
        let norm = s.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(QuantumError::NotNormalised { norm });
        }
        Ok(s)
    }

    /// Wrap and rescale to unit norm.
    pub fn normalised(amps: Vec<C64>) -> Result<Self> {
        let mut s = Self::from_amplitudes_unchecked(amps)?;
        let norm = s.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QuantumError::NotNormalised { norm });
        }
        s.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(s)
    }

    /// Wrap without the normalisation check (used for derivative states and
    /// other intermediate vectors).
    pub fn from_amplitudes_unchecked(amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() {
            return Err(QuantumError::DimensionMismatch {
                expected: dim.next_power_of_two(),
                found: dim,
            });
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_cap("statevector", MAX_STATEVECTOR_QUBITS, n_qubits)?;
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Statevector) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &Statevector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn to_dvector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.amps)
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        check_cap("density-matrix", MAX_DENSITY_QUBITS, self.n_qubits)?;
        let dim = self.dim();
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = self.amps[r] * self.amps[c].conj();
            }
        }
        Ok(DensityMatrix {
            n_qubits: self.n_qubits,
            data,
        })
    }

    /// self ⊗ other.
    pub fn tensor(&self, other: &Statevector) -> Result<Statevector> {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self::from_amplitudes_unchecked(amps)
    }
}

/// A density matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        Statevector::zero(n_qubits)?.to_density()
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_cap("density-matrix", MAX_DENSITY_QUBITS, n_qubits)?;
        let dim = 1usize << n_qubits;
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for k in 0..dim {
            data[k * dim + k] = C64::new(1.0 / dim as f64, 0.0);
        }
        Ok(Self { n_qubits, data })
    }

    /// Validate Hermiticity, unit trace and eigenvalue floor (all 1e-10).
    pub fn from_matrix(m: &DMatrix<C64>) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(m)?;
        rho.validate(1e-10)?;
        Ok(rho)
    }

    pub fn from_matrix_unchecked(m: &DMatrix<C64>) -> Result<Self> {
        let dim = m.nrows();
        if dim != m.ncols() || !dim.is_power_of_two() {
            return Err(QuantumError::DimensionMismatch {
                expected: dim.next_power_of_two(),
                found: m.ncols(),
            });
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_cap("density-matrix", MAX_DENSITY_QUBITS, n_qubits)?;
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(m[(r, c)]);
            }
        }
        Ok(Self { n_qubits, data })
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let m = self.to_matrix();
        let herm = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > tol {
            return Err(QuantumError::InvalidDensityMatrix(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(QuantumError::InvalidDensityMatrix(format!(
                "trace is {tr}, expected 1"
            )));
        }
        let (vals, _) = crate::linalg::eigh(&m);
        if let Some(&min) = vals.first() {
            if min < -tol {
                return Err(QuantumError::InvalidDensityMatrix(format!(
                    "negative eigenvalue {min:e}"
                )));
            }
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    /// Row-major entries; also the amplitudes of the vectorised `2n`-qubit form.
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim() + c]
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        let dim = self.dim();
        DMatrix::from_row_slice(dim, dim, &self.data)
    }

    pub fn trace(&self) -> C64 {
        let dim = self.dim();
        (0..dim).map(|k| self.data[k * dim + k]).sum()
    }

    pub fn purity(&self) -> f64 {
        // Tr[ρ²] = Σ |ρ_rc|² for Hermitian ρ
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let dim = self.dim();
        (0..dim).map(|k| self.data[k * dim + k].re).collect()
    }

    /// Tr[self · other].
    pub fn overlap(&self, other: &DensityMatrix) -> f64 {
        let dim = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..dim {
            for c in 0..dim {
                acc += self.data[r * dim + c] * other.data[c * dim + r];
            }
        }
        acc.re
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|z| *z *= s);
    }

    /// self·(1−w) + other·w.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> DensityMatrix {
        DensityMatrix {
            n_qubits: self.n_qubits,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a * (1.0 - w) + b * w)
                .collect(),
        }
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::from_matrix_unchecked(&self.to_matrix().kronecker(&other.to_matrix()))
    }

    /// Trace out the listed qubits, keeping the rest in their original order.
    pub fn partial_trace(&self, traced: &[usize]) -> Result<DensityMatrix> {
        let n = self.n_qubits;
        for &q in traced {
            if q >= n {
                return Err(QuantumError::QubitOutOfRange {
                    index: q,
                    n_qubits: n,
                });
            }
        }
        let kept: Vec<usize> = (0..n).filter(|q| !traced.contains(q)).collect();
        let nk = kept.len();
        let nt = n - nk;
        let traced_sorted: Vec<usize> = (0..n).filter(|q| traced.contains(q)).collect();
        let compose = |k: usize, t: usize| -> usize {
            let mut idx = 0usize;
            for (j, &q) in kept.iter().enumerate() {
                if (k >> (nk - 1 - j)) & 1 == 1 {
                    idx |= 1 << (n - 1 - q);
                }
            }
            for (j, &q) in traced_sorted.iter().enumerate() {
                if (t >> (nt - 1 - j)) & 1 == 1 {
                    idx |= 1 << (n - 1 - q);
                }
            }
            idx
        };
        let dk = 1usize << nk;
        let dim = self.dim();
        let mut data = vec![C64::new(0.0, 0.0); dk * dk];
        for r in 0..dk {
            for c in 0..dk {
                let mut acc = C64::new(0.0, 0.0);
                for t in 0..(1usize << nt) {
                    acc += self.data[compose(r, t) * dim + compose(c, t)];
                }
                data[r * dk + c] = acc;
            }
        }
        Ok(DensityMatrix { n_qubits: nk, data })
    }

    /// Trace distance ½‖ρ − σ‖₁.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let diff = self.to_matrix() - other.to_matrix();
        let (vals, _) = crate::linalg::eigh(&diff);
        0.5 * vals.iter().map(|v| v.abs()).sum::<f64>()
    }
}

/// Either representation of a register.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(Statevector),
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn n_qubits(&self) -> usize {
        match self {
            QuantumState::Pure(s) => s.n_qubits(),
            QuantumState::Mixed(r) => r.n_qubits(),
        }
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        match self {
            QuantumState::Pure(s) => s.to_density(),
            QuantumState::Mixed(r) => Ok(r.clone()),
        }
    }
}

impl From<Statevector> for QuantumState {
    fn from(s: Statevector) -> Self {
        QuantumState::Pure(s)
    }
}

impl From<DensityMatrix> for QuantumState {
    fn from(r: DensityMatrix) -> Self {
        QuantumState::Mixed(r)
    }
}
