//! Gate operations with derivative generators.
//!
//! A rotation gate is U(θ) = exp(−iθ Σ_j c_j P_j) over pairwise commuting
//! Pauli strings, so ∂U/∂θ = Σ_j g_j U σ_j with g_j = −i c_j and σ_j = P_j.
//! The conventional Rx(θ) = exp(−iθX/2) uses c = ½; the bare form
//! exp(−iθX) uses c = 1. Both are the same type.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;

use crate::error::{QuantumError, Result};
use crate::kernels;
use crate::linalg;
use crate::pauli::{Pauli, PauliString};
use crate::state::{DensityMatrix, Statevector};
use crate::C64;

/// Rotation angle: a fixed number or a slot in the parameter vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Fixed(f64),
    Param(usize),
}

impl Angle {
    pub fn value(&self, params: &[f64]) -> f64 {
        match *self {
            Angle::Fixed(v) => v,
            Angle::Param(slot) => params[slot],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateOp {
    /// A fixed unitary on `targets` (`targets[0]` is the most significant
    /// qubit of the local matrix).
    Fixed {
        name: String,
        targets: Vec<usize>,
        matrix: DMatrix<C64>,
    },
    /// exp(−i·angle·Σ c_j P_j) with pairwise commuting full-width strings.
    Rotation {
        name: String,
        terms: Vec<(f64, PauliString)>,
        angle: Angle,
    },
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

impl GateOp {
    pub fn fixed(name: &str, targets: Vec<usize>, matrix: DMatrix<C64>) -> Result<GateOp> {
        let local = 1usize << targets.len();
        if matrix.nrows() != local || matrix.ncols() != local {
            return Err(QuantumError::DimensionMismatch {
                expected: local,
                found: matrix.nrows(),
            });
        }
        let dev = linalg::unitarity_deviation(&matrix);
        if dev > 1e-12 {
            return Err(QuantumError::NotUnitary { deviation: dev });
        }
        Ok(GateOp::Fixed {
            name: name.to_string(),
            targets,
            matrix,
        })
    }

    pub fn rotation(name: &str, terms: Vec<(f64, PauliString)>, angle: Angle) -> Result<GateOp> {
        for (k, (ck, pk)) in terms.iter().enumerate() {
            if !ck.is_finite() {
                return Err(QuantumError::NonFiniteParameter {
                    index: k,
                    value: *ck,
                });
            }
            if !pk.is_hermitian() {
                return Err(QuantumError::NonHermitian { weight: ck.abs() });
            }
            for (_, pj) in &terms[..k] {
                if pk.n_qubits() != pj.n_qubits() {
                    return Err(QuantumError::QubitMismatch {
                        left: pj.n_qubits(),
                        right: pk.n_qubits(),
                    });
                }
                if !pk.commutes_with(pj) {
                    return Err(QuantumError::NonCommutingGenerators);
                }
            }
        }
        Ok(GateOp::Rotation {
            name: name.to_string(),
            terms,
            angle,
        })
    }

    pub fn h(q: usize) -> GateOp {
        let s = c(FRAC_1_SQRT_2, 0.0);
        GateOp::Fixed {
            name: "h".into(),
            targets: vec![q],
            matrix: DMatrix::from_row_slice(2, 2, &[s, s, s, -s]),
        }
    }

    pub fn pauli(q: usize, p: Pauli) -> GateOp {
        GateOp::Fixed {
            name: p.symbol().to_ascii_lowercase().to_string(),
            targets: vec![q],
            matrix: p.matrix(),
        }
    }

    pub fn x(q: usize) -> GateOp {
        Self::pauli(q, Pauli::X)
    }

    pub fn s(q: usize) -> GateOp {
        GateOp::Fixed {
            name: "s".into(),
            targets: vec![q],
            matrix: DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]),
        }
    }

    pub fn sdg(q: usize) -> GateOp {
        GateOp::Fixed {
            name: "sdg".into(),
            targets: vec![q],
            matrix: DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)]),
        }
    }

    pub fn cnot(control: usize, target: usize) -> GateOp {
        let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
        GateOp::Fixed {
            name: "cx".into(),
            targets: vec![control, target],
            matrix: DMatrix::from_row_slice(
                4,
                4,
                &[o, z, z, z, z, o, z, z, z, z, z, o, z, z, o, z],
            ),
        }
    }

    pub fn cz(a: usize, b: usize) -> GateOp {
        let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
        GateOp::Fixed {
            name: "cz".into(),
            targets: vec![a, b],
            matrix: DMatrix::from_row_slice(
                4,
                4,
                &[o, z, z, z, z, o, z, z, z, z, o, z, z, z, z, -o],
            ),
        }
    }

    pub fn swap(a: usize, b: usize) -> GateOp {
        let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
        GateOp::Fixed {
            name: "swap".into(),
            targets: vec![a, b],
            matrix: DMatrix::from_row_slice(
                4,
                4,
                &[o, z, z, z, z, z, o, z, z, o, z, z, z, z, z, o],
            ),
        }
    }

    /// exp(−iθP/2) on one qubit of an `n`-qubit register.
    pub fn single_rotation(n: usize, q: usize, p: Pauli, angle: Angle) -> GateOp {
        let name = format!("r{}", p.symbol().to_ascii_lowercase());
        GateOp::Rotation {
            name,
            terms: vec![(0.5, PauliString::single(n, q, p))],
            angle,
        }
    }

    pub fn rx(n: usize, q: usize, angle: Angle) -> GateOp {
        Self::single_rotation(n, q, Pauli::X, angle)
    }

    pub fn ry(n: usize, q: usize, angle: Angle) -> GateOp {
        Self::single_rotation(n, q, Pauli::Y, angle)
    }

    pub fn rz(n: usize, q: usize, angle: Angle) -> GateOp {
        Self::single_rotation(n, q, Pauli::Z, angle)
    }

    pub fn name(&self) -> &str {
        match self {
            GateOp::Fixed { name, .. } | GateOp::Rotation { name, .. } => name,
        }
    }

    /// Qubits touched by the gate, ascending for rotations.
    pub fn targets(&self) -> Vec<usize> {
        match self {
            GateOp::Fixed { targets, .. } => targets.clone(),
            GateOp::Rotation { terms, .. } => {
                let mut qs: Vec<usize> = terms.iter().flat_map(|(_, p)| p.support()).collect();
                qs.sort_unstable();
                qs.dedup();
                qs
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.targets().len()
    }

    pub fn slot(&self) -> Option<usize> {
        match self {
            GateOp::Rotation {
                angle: Angle::Param(s),
                ..
            } => Some(*s),
            _ => None,
        }
    }

    /// Derivative generators (g, σ) with ∂U/∂θ = Σ g U σ; empty for fixed gates.
    pub fn generators(&self) -> Vec<(C64, PauliString)> {
        match self {
            GateOp::Rotation { terms, .. } => terms
                .iter()
                .map(|(ck, p)| (c(0.0, -ck), p.clone()))
                .collect(),
            GateOp::Fixed { .. } => Vec::new(),
        }
    }

    /// True when the gate is exp(−iθP/2) for a single Pauli string, the
    /// case where the two-point parameter-shift rule is exact.
    pub fn is_shift_rule_compatible(&self) -> bool {
        match self {
            GateOp::Rotation { terms, .. } => {
                terms.len() == 1 && (terms[0].0 - 0.5).abs() < 1e-15 && !terms[0].1.is_identity()
            }
            GateOp::Fixed { .. } => false,
        }
    }

    pub fn apply_pure(&self, state: &mut Statevector, params: &[f64]) {
        let n = state.n_qubits();
        match self {
            GateOp::Fixed {
                targets, matrix, ..
            } => {
                if targets.len() == 1 {
                    let m = [[matrix[(0, 0)], matrix[(0, 1)]], [matrix[(1, 0)], matrix[(1, 1)]]];
                    kernels::apply_single(state.amplitudes_mut(), n, targets[0], m);
                } else {
                    kernels::apply_matrix(state.amplitudes_mut(), n, targets, matrix);
                }
            }
            GateOp::Rotation { terms, angle, .. } => {
                let theta = angle.value(params);
                for (ck, p) in terms {
                    kernels::apply_pauli_exponential(state.amplitudes_mut(), p, theta * ck);
                }
            }
        }
    }

    /// U† on a pure state.
    pub fn apply_adjoint_pure(&self, state: &mut Statevector, params: &[f64]) {
        let n = state.n_qubits();
        match self {
            GateOp::Fixed {
                targets, matrix, ..
            } => kernels::apply_matrix(state.amplitudes_mut(), n, targets, &matrix.adjoint()),
            GateOp::Rotation { terms, angle, .. } => {
                let theta = angle.value(params);
                for (ck, p) in terms.iter().rev() {
                    kernels::apply_pauli_exponential(state.amplitudes_mut(), p, -theta * ck);
                }
            }
        }
    }

    /// ρ ← U ρ U†.
    pub fn apply_mixed(&self, rho: &mut DensityMatrix, params: &[f64]) {
        let n = rho.n_qubits();
        match self {
            GateOp::Fixed {
                targets, matrix, ..
            } => {
                let cols: Vec<usize> = targets.iter().map(|&q| q + n).collect();
                let conj = matrix.map(|z| z.conj());
                kernels::apply_matrix(rho.data_mut(), 2 * n, targets, matrix);
                kernels::apply_matrix(rho.data_mut(), 2 * n, &cols, &conj);
            }
            GateOp::Rotation { terms, angle, .. } => {
                let theta = angle.value(params);
                for (ck, p) in terms {
                    if p.is_identity() {
                        continue;
                    }
                    let row = kernels::row_lift(p);
                    let col = kernels::column_lift(p);
                    kernels::apply_pauli_exponential(rho.data_mut(), &row, theta * ck);
                    kernels::apply_pauli_exponential(rho.data_mut(), &col, -theta * ck);
                }
            }
        }
    }

    /// Dense 2^n × 2^n unitary of the gate on an `n`-qubit register.
    pub fn dense(&self, n: usize, params: &[f64]) -> DMatrix<C64> {
        let dim = 1usize << n;
        let mut out = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut s = Statevector::basis(n, col).expect("within cap");
            self.apply_pure(&mut s, params);
            out.set_column(col, &s.to_dvector());
        }
        out
    }

    /// The same gate with every qubit index shifted by `offset` inside a
    /// register of `width` qubits.
    pub fn embed(&self, offset: usize, width: usize) -> GateOp {
        match self {
            GateOp::Fixed {
                name,
                targets,
                matrix,
            } => GateOp::Fixed {
                name: name.clone(),
                targets: targets.iter().map(|q| q + offset).collect(),
                matrix: matrix.clone(),
            },
            GateOp::Rotation { name, terms, angle } => GateOp::Rotation {
                name: name.clone(),
                terms: terms
                    .iter()
                    .map(|(ck, p)| {
                        let mut letters = vec![Pauli::I; width];
                        for (q, &l) in p.letters().iter().enumerate() {
                            letters[q + offset] = l;
                        }
                        (*ck, PauliString::with_phase(letters, p.phase_power()))
                    })
                    .collect(),
                angle: *angle,
            },
        }
    }

    /// Controlled version on a register of `width` qubits: qubit 0 is the
    /// control and the gate's own qubits are shifted up by one.
    pub fn controlled(&self, width: usize) -> GateOp {
        match self {
            GateOp::Fixed {
                name,
                targets,
                matrix,
            } => {
                let local = matrix.nrows();
                let mut m = DMatrix::identity(2 * local, 2 * local);
                m.view_mut((local, local), (local, local)).copy_from(matrix);
                let mut t = vec![0];
                t.extend(targets.iter().map(|q| q + 1));
                GateOp::Fixed {
                    name: format!("c{name}"),
                    targets: t,
                    matrix: m,
                }
            }
            GateOp::Rotation { name, terms, angle } => {
                // |1><1| ⊗ P = (I⊗P − Z⊗P)/2
                let z0 = PauliString::single(width, 0, Pauli::Z);
                let mut out = Vec::with_capacity(2 * terms.len());
                for (ck, p) in terms {
                    let lifted = self.embed_string(p, 1, width);
                    out.push((0.5 * ck, lifted.clone()));
                    out.push((-0.5 * ck, z0.mul(&lifted)));
                }
                GateOp::Rotation {
                    name: format!("c{name}"),
                    terms: out,
                    angle: *angle,
                }
            }
        }
    }

    fn embed_string(&self, p: &PauliString, offset: usize, width: usize) -> PauliString {
        let mut letters = vec![Pauli::I; width];
        for (q, &l) in p.letters().iter().enumerate() {
            letters[q + offset] = l;
        }
        PauliString::with_phase(letters, p.phase_power())
    }

    /// True when every letter of this gate is supported on qubits < n.
    pub(crate) fn check_width(&self, n: usize) -> Result<()> {
        match self {
            GateOp::Fixed { targets, .. } => {
                for &q in targets {
                    if q >= n {
                        return Err(QuantumError::QubitOutOfRange {
                            index: q,
                            n_qubits: n,
                        });
                    }
                }
                let mut t = targets.clone();
                t.sort_unstable();
                t.dedup();
                if t.len() != targets.len() {
                    return Err(QuantumError::DimensionMismatch {
                        expected: targets.len(),
                        found: t.len(),
                    });
                }
                Ok(())
            }
            GateOp::Rotation { terms, .. } => {
                for (_, p) in terms {
                    if p.n_qubits() != n {
                        return Err(QuantumError::QubitMismatch {
                            left: n,
                            right: p.n_qubits(),
                        });
                    }
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_generators_follow_half_angle() {
        let g = GateOp::rx(1, 0, Angle::Param(0));
        let gens = g.generators();
        assert_eq!(gens.len(), 1);
        assert_eq!(gens[0].0, c(0.0, -0.5));
        assert!(g.is_shift_rule_compatible());
    }

    #[test]
    fn non_commuting_terms_rejected() {
        let x = PauliString::single(1, 0, Pauli::X);
        let z = PauliString::single(1, 0, Pauli::Z);
        assert_eq!(
            GateOp::rotation("bad", vec![(1.0, x), (1.0, z)], Angle::Fixed(0.1)),
            Err(QuantumError::NonCommutingGenerators)
        );
    }

    #[test]
    fn non_unitary_rejected() {
        let m = DMatrix::from_element(2, 2, c(1.0, 0.0));
        assert!(matches!(
            GateOp::fixed("m", vec![0], m),
            Err(QuantumError::NotUnitary { .. })
        ));
    }

    #[test]
    fn rotation_dense_matches_exponential() {
        let p: PauliString = "XY".parse().unwrap();
        let g = GateOp::rotation("r", vec![(0.8, p.clone())], Angle::Param(0)).unwrap();
        let u = g.dense(2, &[0.4]);
        let want = linalg::expm(&(p.to_dense() * c(0.0, -0.32)));
        assert!((u - want).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn mixed_application_matches_conjugation() {
        let g = GateOp::rotation(
            "r",
            vec![(0.3, "YZ".parse().unwrap()), (0.2, "XX".parse().unwrap())],
            Angle::Fixed(1.1),
        )
        .unwrap();
        let mut psi = Statevector::basis(2, 1).unwrap();
        GateOp::h(0).apply_pure(&mut psi, &[]);
        let mut rho = psi.to_density().unwrap();
        g.apply_mixed(&mut rho, &[]);
        GateOp::cnot(0, 1).apply_mixed(&mut rho, &[]);
        g.apply_pure(&mut psi, &[]);
        GateOp::cnot(0, 1).apply_pure(&mut psi, &[]);
        let want = psi.to_density().unwrap();
        assert!(rho
            .data()
            .iter()
            .zip(want.data())
            .all(|(a, b)| (a - b).norm() < 1e-12));
    }
}
