//! Readout confusion matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{NoiseError, Result};

/// Column-stochastic matrix N with p_noisy = N · p_ideal. Entry (i, j) is the
/// probability of reading outcome i when the true outcome is j.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    n_qubits: usize,
    matrix: DMatrix<f64>,
}

impl ConfusionMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim != matrix.ncols() || !dim.is_power_of_two() || dim < 2 {
            return Err(NoiseError::InvalidConfusion(format!(
                "expected a 2^n square matrix, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        for j in 0..dim {
            let col = matrix.column(j);
            if col.iter().any(|&v| !(0.0..=1.0).contains(&v) || !v.is_finite()) {
                return Err(NoiseError::InvalidConfusion(format!(
                    "column {j} has an entry outside [0, 1]"
                )));
            }
            let s: f64 = col.sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(NoiseError::InvalidConfusion(format!(
                    "column {j} sums to {s}"
                )));
            }
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            matrix,
        })
    }

    /// Build from row-major entries.
    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(NoiseError::InvalidConfusion(format!(
                "expected {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn identity(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        Self {
            n_qubits,
            matrix: DMatrix::identity(dim, dim),
        }
    }

    /// Per-qubit flips: `p01[q]` = P(read 0 | true 1), `p10[q]` = P(read 1 | true 0).
    /// The full matrix is the Kronecker product with qubit 0 most significant.
    pub fn from_flip_rates(p10: &[f64], p01: &[f64]) -> Result<Self> {
        if p10.len() != p01.len() || p10.is_empty() {
            return Err(NoiseError::InvalidConfusion(
                "flip-rate lists must be non-empty and of equal length".into(),
            ));
        }
        let mut m = DMatrix::from_element(1, 1, 1.0);
        for (&a, &b) in p10.iter().zip(p01) {
            let block = DMatrix::from_row_slice(2, 2, &[1.0 - a, b, a, 1.0 - b]);
            m = m.kronecker(&block);
        }
        Self::new(m)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// N · p.
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        (&self.matrix * DVector::from_column_slice(p)).iter().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_stochastic() {
        assert!(ConfusionMatrix::from_row_major(2, &[0.9, 0.2, 0.2, 0.8]).is_err());
        assert!(ConfusionMatrix::from_row_major(2, &[0.9, 0.2, 0.1, 0.8]).is_ok());
    }

    #[test]
    fn flip_rates_build_kronecker() {
        let n = ConfusionMatrix::from_flip_rates(&[0.1, 0.0], &[0.2, 0.0]).unwrap();
        let out = n.apply(&[0.0, 0.0, 1.0, 0.0]);
        assert!((out[0] - 0.2).abs() < 1e-15);
        assert!((out[2] - 0.8).abs() < 1e-15);
    }
}
