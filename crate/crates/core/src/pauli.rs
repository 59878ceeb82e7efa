//! Pauli strings and weighted sums of Pauli strings.
//!
//! A Hamiltonian is stored as H = Σ_α f_α P_α where every P_α is a tensor
//! product of single-qubit Paulis carrying a unit phase in {1, i, -1, -i}.
//!
//! Qubit 0 is the most significant bit of a basis index: on an `n`-qubit
//! register, qubit `q` lives at bit `n - 1 - q`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QuantumError, Result};
use crate::C64;

/// A single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Pauli> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// Product of two letters as (power of i, letter).
    pub fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (X, X) | (Y, Y) | (Z, Z) => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
        }
    }

    pub fn matrix(self) -> DMatrix<C64> {
        let (z, o, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
        match self {
            Pauli::I => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
            Pauli::X => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
            Pauli::Y => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
            Pauli::Z => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        }
    }
}

pub(crate) fn i_pow(k: u8) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// A tensor product of Pauli letters with a phase i^k.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
    phase: u8,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters, phase: 0 }
    }

    pub fn with_phase(letters: Vec<Pauli>, phase: u8) -> Self {
        Self {
            letters,
            phase: phase % 4,
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::new(vec![Pauli::I; n_qubits])
    }

    /// `letter` on `qubit`, identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, letter: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n_qubits];
        letters[qubit] = letter;
        Self::new(letters)
    }

    /// Build from (qubit, letter) pairs.
    pub fn from_sparse(n_qubits: usize, ops: &[(usize, Pauli)]) -> Self {
        let mut letters = vec![Pauli::I; n_qubits];
        for &(q, p) in ops {
            letters[q] = p;
        }
        Self::new(letters)
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    /// Phase as a power of i.
    pub fn phase_power(&self) -> u8 {
        self.phase
    }

    pub fn phase(&self) -> C64 {
        i_pow(self.phase)
    }

    /// Same letters with the phase reset to +1.
    pub fn unphased(&self) -> Self {
        Self::new(self.letters.clone())
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Qubits carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.n_qubits(), other.n_qubits(), "Pauli width mismatch");
        let mut phase = self.phase + other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (k, p) = a.mul(b);
                phase += k;
                p
            })
            .collect();
        PauliString::with_phase(letters, phase)
    }

    pub fn adjoint(&self) -> PauliString {
        PauliString::with_phase(self.letters.clone(), (4 - self.phase) % 4)
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// Hermitian iff the phase is real.
    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    /// Bit masks (flip, sign) and the constant phase power such that
    /// P|b> = i^k (-1)^{popcount(b & sign)} |b ^ flip>.
    pub(crate) fn masks(&self) -> (usize, usize, u8) {
        let n = self.n_qubits();
        let (mut flip, mut sign, mut k) = (0usize, 0usize, self.phase);
        for (q, &p) in self.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Z => sign |= bit,
                Pauli::Y => {
                    flip |= bit;
                    sign |= bit;
                    k += 1;
                }
            }
        }
        (flip, sign, k % 4)
    }

    /// out = P · amps.
    pub fn apply_into(&self, amps: &[C64], out: &mut [C64]) {
        debug_assert_eq!(amps.len(), 1usize << self.n_qubits());
        let (flip, sign, k) = self.masks();
        let c = i_pow(k);
        for (b, &a) in amps.iter().enumerate() {
            let s = if (b & sign).count_ones() % 2 == 1 { -c } else { c };
            out[b ^ flip] = s * a;
        }
    }

    pub fn apply(&self, amps: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); amps.len()];
        self.apply_into(amps, &mut out);
        out
    }

    /// ⟨ψ|P|ψ⟩ (complex in general).
    pub fn expectation(&self, amps: &[C64]) -> C64 {
        let (flip, sign, k) = self.masks();
        let mut acc = C64::new(0.0, 0.0);
        for (b, &a) in amps.iter().enumerate() {
            let v = if (b & sign).count_ones() % 2 == 1 { -a } else { a };
            acc += amps[b ^ flip].conj() * v;
        }
        acc * i_pow(k)
    }

    /// Tr[P ρ] for a row-major density matrix.
    pub fn trace_with(&self, rho: &[C64]) -> C64 {
        let dim = 1usize << self.n_qubits();
        let (flip, sign, k) = self.masks();
        let mut acc = C64::new(0.0, 0.0);
        for c in 0..dim {
            let v = rho[c * dim + (c ^ flip)];
            if (c & sign).count_ones() % 2 == 1 {
                acc -= v;
            } else {
                acc += v;
            }
        }
        acc * i_pow(k)
    }

    /// Dense 2^n × 2^n matrix.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let dim = 1usize << self.n_qubits();
        let (flip, sign, k) = self.masks();
        let c = i_pow(k);
        let mut m = DMatrix::zeros(dim, dim);
        for b in 0..dim {
            let s = if (b & sign).count_ones() % 2 == 1 { -c } else { c };
            m[(b ^ flip, b)] = s;
        }
        m
    }

    /// Restriction to the listed qubits, as a local string.
    pub fn restrict(&self, qubits: &[usize]) -> PauliString {
        PauliString::with_phase(qubits.iter().map(|&q| self.letters[q]).collect(), self.phase)
    }

    /// All 4^n unphased strings on n qubits, in lexicographic I<X<Y<Z order.
    pub fn all(n_qubits: usize) -> Vec<PauliString> {
        let mut out = Vec::with_capacity(1 << (2 * n_qubits));
        for idx in 0..(1usize << (2 * n_qubits)) {
            let letters = (0..n_qubits)
                .map(|q| Pauli::ALL[(idx >> (2 * (n_qubits - 1 - q))) & 3])
                .collect();
            out.push(PauliString::new(letters));
        }
        out
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.phase {
            0 => {}
            1 => write!(f, "i")?,
            2 => write!(f, "-")?,
            _ => write!(f, "-i")?,
        }
        for p in &self.letters {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = QuantumError;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| {
                Pauli::from_symbol(c).ok_or_else(|| QuantumError::Parse {
                    line: 0,
                    message: format!("invalid Pauli letter {c:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PauliString::new(letters))
    }
}

/// Σ_α f_α P_α over a fixed register width.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(C64, PauliString)>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::from_term(C64::new(1.0, 0.0), PauliString::identity(n_qubits))
    }

    pub fn from_term(coeff: C64, pauli: PauliString) -> Self {
        Self {
            n_qubits: pauli.n_qubits(),
            terms: vec![(coeff, pauli)],
        }
    }

    pub fn new(n_qubits: usize, terms: Vec<(C64, PauliString)>) -> Result<Self> {
        for (_, p) in &terms {
            if p.n_qubits() != n_qubits {
                return Err(QuantumError::QubitMismatch {
                    left: n_qubits,
                    right: p.n_qubits(),
                });
            }
        }
        Ok(Self { n_qubits, terms })
    }

    /// Real-weighted terms given as (coefficient, letters) e.g. `(0.5, "XZ")`.
    pub fn from_real_terms(terms: &[(f64, &str)]) -> Result<Self> {
        let parsed = terms
            .iter()
            .map(|&(c, s)| Ok((C64::new(c, 0.0), s.parse::<PauliString>()?)))
            .collect::<Result<Vec<_>>>()?;
        let n = parsed.first().map(|(_, p)| p.n_qubits()).unwrap_or(0);
        Self::new(n, parsed)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(C64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, coeff: C64, pauli: PauliString) {
        assert_eq!(pauli.n_qubits(), self.n_qubits, "Pauli width mismatch");
        self.terms.push((coeff, pauli));
    }

    pub fn scale(&self, s: C64) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(c, p)| (c * s, p.clone())).collect(),
        }
    }

    pub fn add(&self, other: &PauliSum) -> PauliSum {
        assert_eq!(self.n_qubits, other.n_qubits, "Pauli width mismatch");
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        PauliSum {
            n_qubits: self.n_qubits,
            terms,
        }
    }

    pub fn mul(&self, other: &PauliSum) -> PauliSum {
        assert_eq!(self.n_qubits, other.n_qubits, "Pauli width mismatch");
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, p) in &self.terms {
            for (b, q) in &other.terms {
                terms.push((a * b, p.mul(q)));
            }
        }
        PauliSum {
            n_qubits: self.n_qubits,
            terms,
        }
        .simplify(0.0)
    }

    pub fn adjoint(&self) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|(c, p)| (c.conj(), p.adjoint()))
                .collect(),
        }
    }

    /// Fold phases into coefficients, merge equal strings and drop terms with
    /// |f| <= `tol`. Output order is lexicographic in the letters.
    pub fn simplify(&self, tol: f64) -> PauliSum {
        let mut acc: BTreeMap<Vec<Pauli>, C64> = BTreeMap::new();
        for (c, p) in &self.terms {
            *acc.entry(p.letters.clone()).or_insert(C64::new(0.0, 0.0)) += c * p.phase();
        }
        PauliSum {
            n_qubits: self.n_qubits,
            terms: acc
                .into_iter()
                .filter(|(_, c)| c.norm() > tol)
                .map(|(l, c)| (c, PauliString::new(l)))
                .collect(),
        }
    }

    /// Largest imaginary part among the folded, merged weights.
    pub fn anti_hermitian_weight(&self) -> f64 {
        self.simplify(0.0)
            .terms
            .iter()
            .map(|(c, _)| c.im.abs())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.anti_hermitian_weight() <= tol
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        let w = self.anti_hermitian_weight();
        let scale = self.one_norm().max(1.0);
        if w > 1e-12 * scale {
            Err(QuantumError::NonHermitian { weight: w })
        } else {
            Ok(())
        }
    }

    /// Σ |f_α| after folding phases.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.norm()).sum()
    }

    /// Real weights f_α for a Hermitian sum (imaginary residue discarded).
    pub fn real_terms(&self) -> Vec<(f64, PauliString)> {
        self.simplify(0.0)
            .terms
            .into_iter()
            .map(|(c, p)| (c.re, p))
            .collect()
    }

    pub fn apply(&self, amps: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); amps.len()];
        let mut buf = vec![C64::new(0.0, 0.0); amps.len()];
        for (c, p) in &self.terms {
            p.apply_into(amps, &mut buf);
            for (o, b) in out.iter_mut().zip(&buf) {
                *o += c * b;
            }
        }
        out
    }

    /// ⟨ψ|H|ψ⟩ as a complex number.
    pub fn expectation_complex(&self, amps: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|(c, p)| c * p.expectation(amps))
            .sum()
    }

    /// Tr[H ρ] for a row-major density matrix.
    pub fn trace_with(&self, rho: &[C64]) -> C64 {
        self.terms.iter().map(|(c, p)| c * p.trace_with(rho)).sum()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (c, p) in &self.terms {
            m += p.to_dense() * *c;
        }
        m
    }

    /// Pauli decomposition f_P = Tr[P M] / 2^n of a dense operator.
    pub fn from_dense(matrix: &DMatrix<C64>, tol: f64) -> Result<PauliSum> {
        let dim = matrix.nrows();
        if dim != matrix.ncols() || !dim.is_power_of_two() {
            return Err(QuantumError::DimensionMismatch {
                expected: dim.next_power_of_two(),
                found: matrix.ncols(),
            });
        }
        let n = dim.trailing_zeros() as usize;
        let mut terms = Vec::new();
        for p in PauliString::all(n) {
            // Tr[P M] = Σ_c P[c^f, c] M[c, c^f]
            let (flip, sign, k) = p.masks();
            let ph = i_pow(k);
            let mut tr = C64::new(0.0, 0.0);
            for c in 0..dim {
                let s = if (c & sign).count_ones() % 2 == 1 { -ph } else { ph };
                tr += s * matrix[(c, c ^ flip)];
            }
            let f = tr / dim as f64;
            if f.norm() > tol {
                terms.push((f, p));
            }
        }
        PauliSum::new(n, terms)
    }

    /// Parse the line format `<re> <im> <letters>`; `#` starts a comment.
    pub fn parse_text(text: &str) -> Result<PauliSum> {
        let mut terms = Vec::new();
        let mut width = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| QuantumError::Parse {
                line: lineno + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(err(format!("expected 3 fields, found {}", fields.len())));
            }
            let re: f64 = fields[0]
                .parse()
                .map_err(|_| err(format!("bad real part {:?}", fields[0])))?;
            let im: f64 = fields[1]
                .parse()
                .map_err(|_| err(format!("bad imaginary part {:?}", fields[1])))?;
            if !re.is_finite() || !im.is_finite() {
                return Err(err("coefficient is not finite".into()));
            }
            let pauli: PauliString = fields[2].parse().map_err(|e: QuantumError| match e {
                QuantumError::Parse { message, .. } => err(message),
                other => other,
            })?;
            match width {
                None => width = Some(pauli.n_qubits()),
                Some(w) if w != pauli.n_qubits() => {
                    return Err(err(format!(
                        "term has {} qubits, earlier terms have {w}",
                        pauli.n_qubits()
                    )))
                }
                _ => {}
            }
            terms.push((C64::new(re, im), pauli));
        }
        PauliSum::new(width.unwrap_or(0), terms)
    }

    /// Inverse of [`PauliSum::parse_text`]; phases are folded into the weights.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (c, p) in &self.terms {
            let w: Complex64 = c * p.phase();
            let letters: String = p.letters.iter().map(|l| l.symbol()).collect();
            out.push_str(&format!("{} {} {}\n", w.re, w.im, letters));
        }
        out
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (c, p)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}{:+}i)·{}", c.re, c.im, p)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DMatrix<C64>, b: &DMatrix<C64>, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() < tol)
    }

    #[test]
    fn letter_products_match_matrices() {
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let (k, c) = a.mul(b);
                let lhs = a.matrix() * b.matrix();
                let rhs = c.matrix() * i_pow(k);
                assert!(close(&lhs, &rhs, 1e-15), "{a:?}{b:?}");
            }
        }
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        let x0 = PauliString::single(2, 0, Pauli::X);
        let mut psi = vec![C64::new(0.0, 0.0); 4];
        psi[0] = C64::new(1.0, 0.0);
        let out = x0.apply(&psi);
        assert_eq!(out[2], C64::new(1.0, 0.0));
    }

    #[test]
    fn string_dense_matches_kronecker() {
        let p: PauliString = "XYZ".parse().unwrap();
        let k = Pauli::X
            .matrix()
            .kronecker(&Pauli::Y.matrix())
            .kronecker(&Pauli::Z.matrix());
        assert!(close(&p.to_dense(), &k, 1e-15));
    }

    #[test]
    fn commutation_rule() {
        let a: PauliString = "XX".parse().unwrap();
        let b: PauliString = "ZZ".parse().unwrap();
        let c: PauliString = "ZI".parse().unwrap();
        assert!(a.commutes_with(&b));
        assert!(!a.commutes_with(&c));
    }

    #[test]
    fn hermiticity_check() {
        let h = PauliSum::new(
            1,
            vec![(C64::new(0.0, 1.0), PauliString::with_phase(vec![Pauli::Z], 1))],
        )
        .unwrap();
        // i · (iZ) = -Z is Hermitian
        assert!(h.ensure_hermitian().is_ok());
        let bad = PauliSum::from_term(C64::new(0.0, 1.0), "X".parse().unwrap());
        assert!(matches!(
            bad.ensure_hermitian(),
            Err(QuantumError::NonHermitian { .. })
        ));
    }

    #[test]
    fn text_parse_rejects_garbage() {
        assert!(PauliSum::parse_text("0.5 0.0 XQ").is_err());
        assert!(PauliSum::parse_text("0.5 XZ").is_err());
        assert!(PauliSum::parse_text("0.5 0 XZ\n1 0 X").is_err());
        let ok = PauliSum::parse_text("# comment\n0.5 0.0 XZI\n\n-1 2 ZZZ # trailing\n").unwrap();
        assert_eq!(ok.len(), 2);
        assert_eq!(ok.n_qubits(), 3);
    }

    #[test]
    fn dense_decomposition_recovers_terms() {
        let h = PauliSum::from_real_terms(&[(0.3, "XZ"), (-1.25, "YY"), (0.5, "II")]).unwrap();
        let back = PauliSum::from_dense(&h.to_dense(), 1e-14).unwrap();
        assert!(close(&back.to_dense(), &h.to_dense(), 1e-14));
        assert_eq!(back.len(), 3);
    }
}
