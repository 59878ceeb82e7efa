//! Boolean satisfiability as a diagonal Hamiltonian.
//!
//! Encoding: a variable is TRUE when its qubit has Z = +1 (bit value 0).

use vqlab_core::{Pauli, PauliString, PauliSum, C64};

use crate::error::{Result, SolverError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Literal {
    /// 1-based variable index.
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    /// DIMACS-style signed index: `3` is x₃, `-3` is ¬x₃.
    pub fn from_signed(v: i64) -> Self {
        Self {
            var: v.unsigned_abs() as usize,
            negated: v < 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    n_vars: usize,
    clauses: Vec<Vec<Literal>>,
}

impl Cnf {
    pub fn new(n_vars: usize, clauses: Vec<Vec<Literal>>) -> Result<Self> {
        for (index, clause) in clauses.iter().enumerate() {
            if clause.is_empty() {
                return Err(SolverError::EmptyClause { index });
            }
            for lit in clause {
                if lit.var == 0 || lit.var > n_vars {
                    return Err(SolverError::VariableOutOfRange { var: lit.var, n_vars });
                }
            }
        }
        Ok(Self { n_vars, clauses })
    }

    pub fn from_signed(n_vars: usize, clauses: &[&[i64]]) -> Result<Self> {
        Self::new(
            n_vars,
            clauses
                .iter()
                .map(|c| c.iter().map(|&v| Literal::from_signed(v)).collect())
                .collect(),
        )
    }

    /// Parse DIMACS CNF (`c` comments, one `p cnf V C` header, 0-terminated clauses).
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut n_vars = None;
        let mut clauses = Vec::new();
        let mut current = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let f: Vec<&str> = rest.split_whitespace().collect();
                if f.len() != 3 || f[0] != "cnf" {
                    return Err(SolverError::Dimacs {
                        line: k + 1,
                        message: "expected `p cnf <vars> <clauses>`".into(),
                    });
                }
                n_vars = Some(f[1].parse::<usize>().map_err(|e| SolverError::Dimacs {
                    line: k + 1,
                    message: e.to_string(),
                })?);
                continue;
            }
            if n_vars.is_none() {
                return Err(SolverError::Dimacs {
                    line: k + 1,
                    message: "clause before header".into(),
                });
            }
            for tok in line.split_whitespace() {
                let v: i64 = tok.parse().map_err(|_| SolverError::Dimacs {
                    line: k + 1,
                    message: format!("bad literal `{tok}`"),
                })?;
                if v == 0 {
                    clauses.push(std::mem::take(&mut current));
                } else {
                    current.push(Literal::from_signed(v));
                }
            }
        }
        if !current.is_empty() {
            clauses.push(current);
        }
        let n_vars = n_vars.ok_or(SolverError::Dimacs {
            line: 0,
            message: "missing header".into(),
        })?;
        Self::new(n_vars, clauses)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    pub fn violated(&self, assignment: &[bool]) -> usize {
        self.clauses
            .iter()
            .filter(|c| {
                c.iter()
                    .all(|l| assignment[l.var - 1] == l.negated)
            })
            .count()
    }
}

/// Truth assignment encoded by basis index `index` (qubit 0 is x₁).
pub fn assignment_of(index: usize, n_vars: usize) -> Vec<bool> {
    (0..n_vars)
        .map(|q| (index >> (n_vars - 1 - q)) & 1 == 0)
        .collect()
}

pub fn index_of(assignment: &[bool]) -> usize {
    assignment
        .iter()
        .fold(0, |acc, &t| (acc << 1) | usize::from(!t))
}

/// H_P = Σ_k Π_{l ∈ clause k} Π_false(l), where Π_false projects onto the
/// literal being false. Each basis state's energy is its violated-clause count.
pub fn sat_to_hamiltonian(cnf: &Cnf) -> Result<PauliSum> {
    let n = cnf.n_vars;
    let half = C64::new(0.5, 0.0);
    let mut total = PauliSum::zero(n);
    for clause in &cnf.clauses {
        let mut term = PauliSum::identity(n);
        for lit in clause {
            // x false ⇔ Z = −1 ⇒ (I − Z)/2; ¬x false ⇔ Z = +1 ⇒ (I + Z)/2
            let sign = if lit.negated { 1.0 } else { -1.0 };
            let mut proj = PauliSum::identity(n).scale(half);
            proj.push(
                C64::new(0.5 * sign, 0.0),
                PauliString::single(n, lit.var - 1, Pauli::Z),
            );
            term = term.mul(&proj);
        }
        total = total.add(&term);
    }
    Ok(total.simplify(1e-14))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimacs_roundtrip() {
        let cnf = Cnf::parse_dimacs("c example\np cnf 2 3\n1 2 0\n-1 2 0\n-1 -2 0\n").unwrap();
        assert_eq!(cnf, Cnf::from_signed(2, &[&[1, 2], &[-1, 2], &[-1, -2]]).unwrap());
        assert!(Cnf::parse_dimacs("1 2 0\n").is_err());
        assert!(Cnf::parse_dimacs("p cnf 2 1\n1 3 0\n").is_err());
    }

    #[test]
    fn empty_clause_rejected() {
        assert_eq!(
            Cnf::from_signed(1, &[&[1], &[]]).unwrap_err(),
            SolverError::EmptyClause { index: 1 }
        );
    }

    #[test]
    fn index_assignment_inverse() {
        for i in 0..8 {
            assert_eq!(index_of(&assignment_of(i, 3)), i);
        }
        assert_eq!(assignment_of(0, 2), vec![true, true]);
    }
}
