//! Assembly of the McLachlan linear systems M θ̇ = V (real time) and
//! M θ̇ = C (imaginary time).

use nalgebra::{DMatrix, DVector};
use vqlab_core::linalg::{eigh_real, pinv_real};
use vqlab_core::{
    ancilla_interference, Circuit, Insertion, PauliString, PauliSum, Statevector, C64,
};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Real,
    Imaginary,
}

/// M and the right-hand side (V or C) at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct McLachlanSystem {
    pub m: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub mode: Mode,
    /// ⟨H²⟩ in real mode, ⟨H²⟩ − ⟨H⟩² in imaginary mode.
    pub offset: f64,
    pub energy: f64,
}

impl McLachlanSystem {
    /// θ̇ = M⁺ rhs, singular values below `cutoff · σ_max` discarded.
    pub fn solve(&self, cutoff: f64) -> DVector<f64> {
        pinv_real(&self.m, cutoff) * &self.rhs
    }

    /// ‖(∂_t + iH)|φ⟩‖² (real) or ‖(∂_τ + H − ⟨H⟩)|φ⟩‖² (imaginary) for a
    /// given parameter velocity: θ̇ᵀMθ̇ − 2 rhs·θ̇ + offset.
    pub fn residual(&self, theta_dot: &DVector<f64>) -> f64 {
        (theta_dot.transpose() * &self.m * theta_dot)[(0, 0)] - 2.0 * self.rhs.dot(theta_dot)
            + self.offset
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigh_real(&self.m).0.first().copied().unwrap_or(0.0)
    }
}

/// Re⟨a_k|a_j⟩ for a set of vectors.
pub(crate) fn gram(vectors: &[Vec<C64>]) -> DMatrix<f64> {
    let n = vectors.len();
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        for j in k..n {
            let v = re_inner(&vectors[k], &vectors[j]);
            m[(k, j)] = v;
            m[(j, k)] = v;
        }
    }
    m
}

pub(crate) fn re_inner(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>().re
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Dense assembly from derivative states:
/// M_kj = Re⟨∂_kφ|∂_jφ⟩, V_k = Im⟨∂_kφ|H|φ⟩, C_k = −Re⟨∂_kφ|H|φ⟩.
pub fn assemble_mclachlan(
    circuit: &Circuit,
    params: &[f64],
    hamiltonian: &PauliSum,
    mode: Mode,
) -> Result<McLachlanSystem> {
    hamiltonian.ensure_hermitian()?;
    let phi = circuit.prepare(params)?;
    let derivs: Vec<Vec<C64>> = circuit
        .derivative_states(params)?
        .into_iter()
        .map(Statevector::into_amplitudes)
        .collect();
    let h_phi = hamiltonian.apply(phi.amplitudes());
    let energy = inner(phi.amplitudes(), &h_phi).re;
    let h2 = inner(&h_phi, &h_phi).re;
    let rhs = DVector::from_iterator(
        derivs.len(),
        derivs.iter().map(|d| {
            let z = inner(d, &h_phi);
            match mode {
                Mode::Real => z.im,
                Mode::Imaginary => -z.re,
            }
        }),
    );
    Ok(McLachlanSystem {
        m: gram(&derivs),
        rhs,
        mode,
        offset: match mode {
            Mode::Real => h2,
            Mode::Imaginary => h2 - energy * energy,
        },
        energy,
    })
}

/// The same system with every entry read from a simulated single-ancilla
/// interference circuit. Each term a·Re(e^{iθ}⟨φ_ref|𝒱|φ_ref⟩) becomes one
/// circuit with the ancilla phase set to θ = arg(a).
pub fn assemble_mclachlan_circuits(
    circuit: &Circuit,
    params: &[f64],
    hamiltonian: &PauliSum,
    mode: Mode,
) -> Result<McLachlanSystem> {
    hamiltonian.ensure_hermitian()?;
    let n = circuit.n_params();
    // (coefficient g, insertion) for every generator of every slot
    let mut branches: Vec<Vec<(C64, Insertion)>> = vec![Vec::new(); n];
    for (k, g) in circuit.gates().iter().enumerate() {
        if let Some(slot) = g.slot() {
            for (gk, sigma) in g.generators() {
                branches[slot].push((gk, Insertion { after_gate: k, sigma }));
            }
        }
    }
    let term = |w: C64,
                b0: Option<&Insertion>,
                b1: Option<&Insertion>,
                tail: Option<&PauliString>|
     -> Result<f64> {
        if w.norm() == 0.0 {
            return Ok(0.0);
        }
        Ok(w.norm() * ancilla_interference(circuit, params, b0, b1, tail, w.arg())?)
    };
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        for j in k..n {
            let mut acc = 0.0;
            for (ga, ia) in &branches[k] {
                for (gb, ib) in &branches[j] {
                    acc += term(ga.conj() * gb, Some(ia), Some(ib), None)?;
                }
            }
            m[(k, j)] = acc;
            m[(j, k)] = acc;
        }
    }
    let terms = hamiltonian.simplify(0.0).real_terms();
    let mut rhs = DVector::zeros(n);
    for k in 0..n {
        let mut acc = 0.0;
        for (ga, ia) in &branches[k] {
            for (f, p) in &terms {
                // V: Im(ḡ f z) = Re(−i ḡ f z); C: −Re(ḡ f z)
                let w = match mode {
                    Mode::Real => C64::new(0.0, -1.0) * ga.conj() * f,
                    Mode::Imaginary => -ga.conj() * f,
                };
                acc += term(w, Some(ia), None, Some(p))?;
            }
        }
        rhs[k] = acc;
    }
    // ⟨H⟩ and ⟨H²⟩ from plain interference terms (θ = 0, no insertions)
    let mut energy = 0.0;
    for (f, p) in &terms {
        energy += f * ancilla_interference(circuit, params, None, None, Some(p), 0.0)?;
    }
    let h2_terms = hamiltonian.mul(hamiltonian).simplify(1e-15);
    let mut h2 = 0.0;
    for (f, p) in h2_terms.terms() {
        let w = f * p.phase();
        h2 += term(w, None, None, Some(&p.unphased()))?;
    }
    Ok(McLachlanSystem {
        m,
        rhs,
        mode,
        offset: match mode {
            Mode::Real => h2,
            Mode::Imaginary => h2 - energy * energy,
        },
        energy,
    })
}
