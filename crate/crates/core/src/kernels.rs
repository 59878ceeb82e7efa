//! Low-level amplitude kernels.
//!
//! All kernels act in place on a flat amplitude slice of `2^n` entries where
//! qubit `q` sits at bit `n - 1 - q`. A density matrix of `n` qubits stored
//! row-major is the same thing as a `2n`-qubit vector whose first `n` qubits
//! index rows and last `n` index columns.

use nalgebra::DMatrix;

use crate::pauli::{i_pow, PauliString};
use crate::C64;

#[inline]
fn bit(n: usize, q: usize) -> usize {
    1usize << (n - 1 - q)
}

/// Apply a `2^k × 2^k` matrix to the listed targets; `targets[0]` is the most
/// significant qubit of the local matrix index.
pub fn apply_matrix(amps: &mut [C64], n: usize, targets: &[usize], m: &DMatrix<C64>) {
    let k = targets.len();
    let local = 1usize << k;
    debug_assert_eq!(m.nrows(), local);
    let masks: Vec<usize> = targets.iter().map(|&q| bit(n, q)).collect();
    let all: usize = masks.iter().fold(0, |a, b| a | b);
    let offsets: Vec<usize> = (0..local)
        .map(|l| {
            (0..k)
                .filter(|&j| (l >> (k - 1 - j)) & 1 == 1)
                .fold(0, |acc, j| acc | masks[j])
        })
        .collect();
    let mut buf = vec![C64::new(0.0, 0.0); local];
    for base in 0..amps.len() {
        if base & all != 0 {
            continue;
        }
        for (l, off) in offsets.iter().enumerate() {
            buf[l] = amps[base | off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (c, b) in buf.iter().enumerate() {
                acc += m[(r, c)] * b;
            }
            amps[base | off] = acc;
        }
    }
}

/// 1-qubit fast path.
pub fn apply_single(amps: &mut [C64], n: usize, q: usize, m: [[C64; 2]; 2]) {
    let b = bit(n, q);
    for i in 0..amps.len() {
        if i & b == 0 {
            let a0 = amps[i];
            let a1 = amps[i | b];
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[i | b] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

/// amps ← (cos φ · I − i sin φ · P) amps, i.e. e^{−iφP} for a Hermitian P.
pub fn apply_pauli_exponential(amps: &mut [C64], p: &PauliString, phi: f64) {
    let (flip, sign, k) = p.masks();
    let ph = i_pow(k);
    let (c, s) = (phi.cos(), phi.sin());
    let mis = C64::new(0.0, -s);
    if flip == 0 {
        for (b, a) in amps.iter_mut().enumerate() {
            let v = if (b & sign).count_ones() % 2 == 1 { -ph } else { ph };
            *a *= c + mis * v;
        }
        return;
    }
    let hi = 1usize << (usize::BITS - 1 - flip.leading_zeros());
    for b in 0..amps.len() {
        if b & hi != 0 {
            continue;
        }
        let b2 = b ^ flip;
        let s1 = if (b & sign).count_ones() % 2 == 1 { -ph } else { ph };
        let s2 = if (b2 & sign).count_ones() % 2 == 1 { -ph } else { ph };
        let (a1, a2) = (amps[b], amps[b2]);
        // (P a)[b2] = s1 a[b], (P a)[b] = s2 a[b2]
        amps[b] = c * a1 + mis * s2 * a2;
        amps[b2] = c * a2 + mis * s1 * a1;
    }
}

/// Pauli string lifted to the column half of a vectorised density matrix:
/// returns the string P* acting on qubits `n..2n` of a `2n`-qubit register.
pub fn column_lift(p: &PauliString) -> PauliString {
    let n = p.n_qubits();
    let mut letters = vec![crate::pauli::Pauli::I; n];
    letters.extend_from_slice(p.letters());
    // P* flips the sign of Y letters and conjugates the phase
    let ny = p
        .letters()
        .iter()
        .filter(|&&l| l == crate::pauli::Pauli::Y)
        .count() as u8;
    let phase = (4 - p.phase_power()) % 4 + 2 * ny;
    PauliString::with_phase(letters, phase)
}

/// Row-half lift: P acting on qubits `0..n` of a `2n`-qubit register.
pub fn row_lift(p: &PauliString) -> PauliString {
    let mut letters = p.letters().to_vec();
    letters.extend(std::iter::repeat_n(crate::pauli::Pauli::I, p.n_qubits()));
    PauliString::with_phase(letters, p.phase_power())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Pauli;

    #[test]
    fn exponential_matches_dense() {
        let p: PauliString = "XYZ".parse().unwrap();
        let mut amps: Vec<C64> = (0..8).map(|k| C64::new(k as f64, 1.0 - k as f64)).collect();
        let dense = crate::linalg::expm(&(p.to_dense() * C64::new(0.0, -0.37)));
        let want = &dense * nalgebra::DVector::from_vec(amps.clone());
        apply_pauli_exponential(&mut amps, &p, 0.37);
        for (a, b) in amps.iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn column_lift_conjugates() {
        let p = PauliString::single(1, 0, Pauli::Y);
        let lifted = column_lift(&p);
        let dense = lifted.to_dense();
        let want = Pauli::I.matrix().kronecker(&Pauli::Y.matrix().map(|z| z.conj()));
        assert!((dense - want).iter().all(|z| z.norm() < 1e-15));
    }
}
