//! Symmetry verification by post-selection or post-processing.

use nalgebra::DMatrix;
use vqlab_core::{DensityMatrix, PauliString, PauliSum, QuantumError, C64};

use crate::error::{QemError, Result};
use crate::estimate::MitigatedEstimate;

/// A Pauli symmetry P (P² = I) and the sector m ∈ {+1, −1} the ideal state
/// lives in.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryOperator {
    pauli: PauliString,
    sector: f64,
}

impl SymmetryOperator {
    pub fn new(pauli: PauliString, sector: i8) -> Result<Self> {
        if !pauli.is_hermitian() {
            return Err(QemError::InvalidSymmetry(format!("{pauli} is not Hermitian")));
        }
        if pauli.is_identity() {
            return Err(QemError::InvalidSymmetry("identity is not a useful symmetry".into()));
        }
        if sector != 1 && sector != -1 {
            return Err(QemError::InvalidSymmetry(format!("sector must be ±1, got {sector}")));
        }
        Ok(Self {
            pauli,
            sector: sector as f64,
        })
    }

    pub fn pauli(&self) -> &PauliString {
        &self.pauli
    }

    pub fn sector(&self) -> f64 {
        self.sector
    }

    pub fn n_qubits(&self) -> usize {
        self.pauli.n_qubits()
    }

    /// Fails on the first Hamiltonian term that anticommutes with P.
    pub fn check_commutes(&self, h: &PauliSum) -> Result<()> {
        if h.n_qubits() != self.n_qubits() {
            return Err(QuantumError::QubitMismatch {
                left: self.n_qubits(),
                right: h.n_qubits(),
            }
            .into());
        }
        for (c, p) in h.terms() {
            if c.norm() > 0.0 && !p.commutes_with(&self.pauli) {
                return Err(QemError::NonCommuting(p.to_string()));
            }
        }
        Ok(())
    }

    /// (I + mP)/2.
    pub fn projector(&self) -> DMatrix<C64> {
        let d = 1usize << self.n_qubits();
        (DMatrix::identity(d, d) + self.pauli.to_dense() * C64::new(self.sector, 0.0))
            * C64::new(0.5, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    /// Project onto the sector and renormalise.
    Postselect,
    /// Combine Tr[Hρ], Tr[HPρ] and Tr[Pρ] without discarding shots.
    Postprocess,
}

/// Energy in the expected and in the opposite sector, with the probability
/// of landing in the expected one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorValues {
    pub expected: f64,
    pub opposite: f64,
    pub acceptance: f64,
}

struct Traces {
    rho: f64,
    h: f64,
    hp: f64,
    p: f64,
}

fn traces(rho: &DensityMatrix, sym: &SymmetryOperator, h: &PauliSum) -> Result<Traces> {
    sym.check_commutes(h)?;
    if rho.n_qubits() != sym.n_qubits() {
        return Err(QuantumError::QubitMismatch {
            left: sym.n_qubits(),
            right: rho.n_qubits(),
        }
        .into());
    }
    let p = PauliSum::from_term(C64::new(1.0, 0.0), sym.pauli.clone());
    Ok(Traces {
        rho: rho.trace().re,
        h: h.trace_with(rho.data()).re,
        hp: h.mul(&p).trace_with(rho.data()).re,
        p: sym.pauli.trace_with(rho.data()).re,
    })
}

/// Sector-resolved energies from Tr[Hρ], Tr[HPρ] and Tr[Pρ].
pub fn sector_values(rho: &DensityMatrix, sym: &SymmetryOperator, h: &PauliSum) -> Result<SectorValues> {
    let t = traces(rho, sym, h)?;
    let m = sym.sector;
    let good = t.rho + m * t.p;
    let bad = t.rho - m * t.p;
    let ratio = |num: f64, den: f64| if den.abs() > 1e-300 { num / den } else { f64::NAN };
    Ok(SectorValues {
        expected: ratio(t.h + m * t.hp, good),
        opposite: ratio(t.h - m * t.hp, bad),
        acceptance: 0.5 * good / t.rho,
    })
}

/// Tr[Hρ_m] for the state projected onto the expected sector. γ is 1/p for
/// post-selection (only a fraction p of shots survive) and 1/p² for
/// post-processing (the ratio estimator's variance).
pub fn symmetry_verify(
    rho: &DensityMatrix,
    sym: &SymmetryOperator,
    h: &PauliSum,
    mode: VerifyMode,
) -> Result<MitigatedEstimate> {
    let t = traces(rho, sym, h)?;
    let m = sym.sector;
    let acceptance = 0.5 * (t.rho + m * t.p) / t.rho;
    if !(acceptance >= 1e-12) {
        return Err(QemError::LowAcceptance(acceptance));
    }
    let raw = t.h / t.rho;
    let out = match mode {
        VerifyMode::Postprocess => {
            let value = (t.h + m * t.hp) / (t.rho + m * t.p);
            MitigatedEstimate::new("symmetry_postprocess", value, 0.0, 1.0 / (acceptance * acceptance), vec![raw])
        }
        VerifyMode::Postselect => {
            let proj = sym.projector();
            let projected = &proj * rho.to_matrix() * &proj;
            let kept = projected.trace().re;
            let value = (h.to_dense() * &projected).trace().re / kept;
            MitigatedEstimate::new("symmetry_postselect", value, 0.0, 1.0 / acceptance, vec![raw])
        }
    };
    Ok(out.with_detail("acceptance", acceptance))
}
