//! Excited-state methods: overlap penalties, subspace expansion, SSVQE and MC-VQE.

use nalgebra::{DMatrix, DVector};
use vqlab_core::linalg::eigh;
use vqlab_core::{Circuit, PauliString, PauliSum, QuantumError, Statevector, C64};

use crate::cost::{residual, CostFunction, GradientMode, Observable};
use crate::error::{Result, SolverError};
use crate::optimize::{minimize, OptimizerConfig};
use crate::vqe::minimize_cost;

/// Eigenvalue cutoff applied to the overlap matrix S̃.
pub const OVERLAP_CUTOFF: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMethod {
    Overlap,
    SubspaceExpansion,
    Ssvqe,
    McVqe,
}

impl SpectrumMethod {
    pub fn tag(self) -> &'static str {
        match self {
            SpectrumMethod::Overlap => "overlap",
            SpectrumMethod::SubspaceExpansion => "subspace-expansion",
            SpectrumMethod::Ssvqe => "ssvqe",
            SpectrumMethod::McVqe => "mc-vqe",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumState {
    Params(Vec<f64>),
    Coefficients(Vec<C64>),
    /// Ansatz parameters plus the coefficients of V|φ_s⟩ in the input basis.
    Contracted { params: Vec<f64>, coefficients: Vec<C64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub method: SpectrumMethod,
    /// Ascending.
    pub energies: Vec<f64>,
    pub states: Vec<SpectrumState>,
    /// ‖(H − E)|ψ⟩‖ per level.
    pub residuals: Vec<f64>,
    /// Human-readable warnings (non-convergence, overlapping levels).
    pub flags: Vec<String>,
    /// Stage-1 subspace cost of the last SSVQE level.
    pub stage_one: Option<f64>,
}

impl SpectrumResult {
    fn sort(&mut self) {
        let mut idx: Vec<usize> = (0..self.energies.len()).collect();
        idx.sort_by(|&a, &b| self.energies[a].total_cmp(&self.energies[b]));
        self.energies = idx.iter().map(|&i| self.energies[i]).collect();
        self.states = idx.iter().map(|&i| self.states[i].clone()).collect();
        self.residuals = idx.iter().map(|&i| self.residuals[i]).collect();
    }

    /// `method,level,energy,residual` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,level,energy,residual\n");
        for (k, (e, r)) in self.energies.iter().zip(&self.residuals).enumerate() {
            out.push_str(&format!("{},{},{:.12e},{:.6e}\n", self.method.tag(), k, e, r));
        }
        out
    }
}

/// Default penalty weight 2Σ|f_α|, an upper bound on the spectral spread.
pub fn default_penalty(hamiltonian: &PauliSum) -> f64 {
    2.0 * hamiltonian.one_norm()
}

/// Sequential VQE on H + αΣ_j|Ẽ_j⟩⟨Ẽ_j|, returning k+1 levels.
pub fn excited_by_overlap(
    hamiltonian: &PauliSum,
    ansatz: &Circuit,
    alpha: Option<f64>,
    k: usize,
    x0: &[f64],
    config: &OptimizerConfig,
) -> Result<SpectrumResult> {
    let alpha = alpha.unwrap_or_else(|| default_penalty(hamiltonian));
    let obs = Observable::Pauli(hamiltonian.clone());
    let mut found: Vec<Statevector> = Vec::new();
    let mut out = SpectrumResult {
        method: SpectrumMethod::Overlap,
        energies: Vec::new(),
        states: Vec::new(),
        residuals: Vec::new(),
        flags: Vec::new(),
        stage_one: None,
    };
    for level in 0..=k {
        let penalties = found.iter().map(|s| (s.clone(), alpha)).collect();
        let cost = CostFunction::overlap_penalised(hamiltonian, penalties)?;
        let r = minimize_cost(&cost, ansatz, x0, config)?;
        let state = ansatz.prepare(&r.params)?;
        if !r.converged {
            out.flags.push(format!("level {level}: optimizer did not converge"));
        }
        for (j, prev) in found.iter().enumerate() {
            let ov = prev.inner(&state).norm_sqr();
            if ov > 0.5 {
                out.flags.push(format!(
                    "level {level} overlaps level {j} by {ov:.3}; penalty weight too small"
                ));
            }
        }
        out.energies.push(cost.unpenalised(&state));
        out.residuals.push(residual(&obs, &state));
        out.states.push(SpectrumState::Params(r.params));
        found.push(state);
    }
    out.sort();
    Ok(out)
}

/// Eigenpairs of the pencil H̃c = ES̃c, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilSolution {
    pub energies: Vec<f64>,
    /// Column j holds c_j, normalised so that c_j†S̃c_j = 1.
    pub coefficients: DMatrix<C64>,
    /// Directions of S̃ dropped below the overlap cutoff.
    pub removed: usize,
}

/// Generalised Hermitian eigenproblem. Eigen-directions of S̃ at or below
/// [`OVERLAP_CUTOFF`] are projected out, then S̃ is whitened on the rest.
pub fn solve_pencil(h: &DMatrix<C64>, s: &DMatrix<C64>) -> Result<PencilSolution> {
    let m = s.nrows();
    let (svals, svecs) = eigh(s);
    let keep: Vec<usize> = (0..m).filter(|&i| svals[i] > OVERLAP_CUTOFF).collect();
    if keep.is_empty() {
        return Err(SolverError::SingularOverlap {
            threshold: OVERLAP_CUTOFF,
        });
    }
    // T = V_keep Λ^{-1/2} whitens S̃ on the retained subspace
    let mut t = DMatrix::<C64>::zeros(m, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        let col = svecs.column(i) * C64::new(1.0 / svals[i].sqrt(), 0.0);
        t.set_column(j, &col);
    }
    let reduced = t.adjoint() * h * &t;
    let reduced = (&reduced + reduced.adjoint()) * C64::new(0.5, 0.0);
    let (energies, y) = eigh(&reduced);
    Ok(PencilSolution {
        energies,
        coefficients: t * y,
        removed: m - keep.len(),
    })
}

/// Solve H̃c = ES̃c with H̃_{αβ} = ⟨G|P_α†HP_β|G⟩, S̃_{αβ} = ⟨G|P_α†P_β|G⟩.
/// Directions of S̃ with eigenvalue at or below the cutoff are projected out.
pub fn subspace_expansion(
    ground: &Statevector,
    hamiltonian: &PauliSum,
    expansion: &[PauliString],
) -> Result<SpectrumResult> {
    hamiltonian.ensure_hermitian()?;
    if ground.n_qubits() != hamiltonian.n_qubits() {
        return Err(QuantumError::QubitMismatch {
            left: ground.n_qubits(),
            right: hamiltonian.n_qubits(),
        }
        .into());
    }
    if !expansion.iter().any(|p| p.is_identity()) {
        return Err(SolverError::MissingIdentity);
    }
    let dim = ground.dim();
    let m = expansion.len();
    let mut basis = DMatrix::<C64>::zeros(dim, m);
    let mut hbasis = DMatrix::<C64>::zeros(dim, m);
    for (b, p) in expansion.iter().enumerate() {
        if p.n_qubits() != ground.n_qubits() {
            return Err(QuantumError::QubitMismatch {
                left: ground.n_qubits(),
                right: p.n_qubits(),
            }
            .into());
        }
        let v = p.apply(ground.amplitudes());
        let hv = hamiltonian.apply(&v);
        basis.set_column(b, &DVector::from_vec(v));
        hbasis.set_column(b, &DVector::from_vec(hv));
    }
    let s = basis.adjoint() * &basis;
    let h = basis.adjoint() * &hbasis;
    let pencil = solve_pencil(&h, &s)?;
    let obs = Observable::Pauli(hamiltonian.clone());
    let mut out = SpectrumResult {
        method: SpectrumMethod::SubspaceExpansion,
        energies: Vec::new(),
        states: Vec::new(),
        residuals: Vec::new(),
        flags: Vec::new(),
        stage_one: None,
    };
    if pencil.removed > 0 {
        out.flags.push(format!("{} dependent directions removed", pencil.removed));
    }
    for (j, e) in pencil.energies.iter().enumerate() {
        let c = pencil.coefficients.column(j);
        let psi = Statevector::normalised((&basis * c).iter().copied().collect())?;
        out.energies.push(*e);
        out.residuals.push(residual(&obs, &psi));
        out.states.push(SpectrumState::Coefficients(c.iter().copied().collect()));
    }
    Ok(out)
}

/// Complex vector from interleaved (re, im) pairs.
fn unpack(x: &[f64]) -> Vec<C64> {
    x.chunks(2).map(|p| C64::new(p[0], p[1])).collect()
}

/// Subspace-search VQE. Level j minimises Σ_{i≤j} ⟨i|U†HU|i⟩ over the first
/// j+1 computational basis inputs, then maximises the energy of
/// U(θ*)V|φ⟩ with V acting inside that span, isolating E_j.
pub fn ssvqe(
    hamiltonian: &PauliSum,
    ansatz: &Circuit,
    k: usize,
    x0: &[f64],
    config: &OptimizerConfig,
) -> Result<SpectrumResult> {
    let n = ansatz.n_qubits();
    let dim = 1usize << n;
    if k + 1 > dim {
        return Err(SolverError::TooManyLevels {
            requested: k + 1,
            dim,
        });
    }
    let obs = Observable::Pauli(hamiltonian.clone());
    let mut out = SpectrumResult {
        method: SpectrumMethod::Ssvqe,
        energies: Vec::new(),
        states: Vec::new(),
        residuals: Vec::new(),
        flags: Vec::new(),
        stage_one: None,
    };
    let mut warm = x0.to_vec();
    for level in 0..=k {
        let inputs = (0..=level)
            .map(|i| Statevector::basis(n, i))
            .collect::<vqlab_core::Result<Vec<_>>>()?;
        let stage1 = CostFunction::subspace_sum(hamiltonian, inputs.clone())?;
        let r1 = minimize_cost(&stage1, ansatz, &warm, config)?;
        if !r1.converged {
            out.flags.push(format!("level {level}: stage 1 did not converge"));
        }
        warm = r1.params.clone();
        out.stage_one = Some(r1.value);

        // stage 2 over the span of the transformed inputs
        let images = inputs
            .iter()
            .map(|s| ansatz.apply_pure(&r1.params, s))
            .collect::<vqlab_core::Result<Vec<_>>>()?;
        let state_of = |v: &[C64]| -> Result<Statevector> {
            let mut amps = vec![C64::new(0.0, 0.0); dim];
            for (c, img) in v.iter().zip(&images) {
                for (a, b) in amps.iter_mut().zip(img.amplitudes()) {
                    *a += c * b;
                }
            }
            Ok(Statevector::normalised(amps)?)
        };
        let coefficients = if level == 0 {
            vec![C64::new(1.0, 0.0)]
        } else {
            let f = |x: &[f64]| -> Result<f64> { Ok(-obs.expectation(&state_of(&unpack(x))?)) };
            let g = |x: &[f64]| -> Result<Vec<f64>> {
                let h = config.fd_step;
                let mut out = vec![0.0; x.len()];
                let mut y = x.to_vec();
                for i in 0..x.len() {
                    y[i] = x[i] + h;
                    let p = f(&y)?;
                    y[i] = x[i] - h;
                    let m = f(&y)?;
                    y[i] = x[i];
                    out[i] = (p - m) / (2.0 * h);
                }
                Ok(out)
            };
            let start: Vec<f64> = (0..=level)
                .flat_map(|i| [1.0 / (i + 1) as f64, 0.1 * i as f64])
                .collect();
            let cfg = OptimizerConfig {
                restarts: 0,
                gradient: GradientMode::FiniteDifference,
                ..config.clone()
            };
            let r2 = minimize(f, g, &start, &cfg)?;
            let v = unpack(&r2.params);
            let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            v.into_iter().map(|c| c / norm).collect()
        };
        let state = state_of(&coefficients)?;
        out.energies.push(obs.expectation(&state));
        out.residuals.push(residual(&obs, &state));
        out.states.push(SpectrumState::Contracted {
            params: r1.params,
            coefficients,
        });
    }
    out.sort();
    Ok(out)
}

/// H̃_{αβ} = ⟨φ_α|U†HU|φ_β⟩ assembled only from expectation values:
/// diagonals directly, Re from |±⟩ = (|φ_β⟩ ± |φ_α⟩)/√2 and Im from
/// (|φ_β⟩ ± i|φ_α⟩)/√2.
pub fn mc_vqe_matrix(
    hamiltonian: &PauliSum,
    circuit: &Circuit,
    params: &[f64],
    basis: &[usize],
) -> Result<DMatrix<C64>> {
    hamiltonian.ensure_hermitian()?;
    let n = circuit.n_qubits();
    let obs = Observable::Pauli(hamiltonian.clone());
    let energy_of = |amps: Vec<C64>| -> Result<f64> {
        let s = Statevector::from_amplitudes(amps)?;
        Ok(obs.expectation(&circuit.apply_pure(params, &s)?))
    };
    let dim = 1usize << n;
    let m = basis.len();
    let mut h = DMatrix::<C64>::zeros(m, m);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for a in 0..m {
        for b in a..m {
            if basis[a] >= dim || basis[b] >= dim {
                return Err(QuantumError::DimensionMismatch {
                    expected: dim,
                    found: basis[a].max(basis[b]) + 1,
                }
                .into());
            }
            let mix = |w: C64| {
                let mut v = vec![C64::new(0.0, 0.0); dim];
                v[basis[b]] += C64::new(r, 0.0);
                v[basis[a]] += w * r;
                v
            };
            if a == b {
                let mut v = vec![C64::new(0.0, 0.0); dim];
                v[basis[a]] = C64::new(1.0, 0.0);
                h[(a, a)] = C64::new(energy_of(v)?, 0.0);
                continue;
            }
            let re = 0.5 * (energy_of(mix(C64::new(1.0, 0.0)))? - energy_of(mix(C64::new(-1.0, 0.0)))?);
            let im = 0.5 * (energy_of(mix(C64::new(0.0, 1.0)))? - energy_of(mix(C64::new(0.0, -1.0)))?);
            h[(a, b)] = C64::new(re, im);
            h[(b, a)] = C64::new(re, -im);
        }
    }
    Ok(h)
}

/// Diagonalise H̃ from `mc_vqe_matrix` (S = I, the inputs are orthonormal).
pub fn mc_vqe(
    hamiltonian: &PauliSum,
    circuit: &Circuit,
    params: &[f64],
    basis: &[usize],
) -> Result<SpectrumResult> {
    let h = mc_vqe_matrix(hamiltonian, circuit, params, basis)?;
    let (energies, vecs) = eigh(&h);
    let n = circuit.n_qubits();
    let obs = Observable::Pauli(hamiltonian.clone());
    let mut out = SpectrumResult {
        method: SpectrumMethod::McVqe,
        energies: Vec::new(),
        states: Vec::new(),
        residuals: Vec::new(),
        flags: Vec::new(),
        stage_one: None,
    };
    for (j, e) in energies.iter().enumerate() {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        for (i, &bi) in basis.iter().enumerate() {
            amps[bi] = vecs[(i, j)];
        }
        let psi = circuit.apply_pure(params, &Statevector::normalised(amps)?)?;
        out.energies.push(*e);
        out.residuals.push(residual(&obs, &psi));
        out.states
            .push(SpectrumState::Coefficients(vecs.column(j).iter().copied().collect()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_only_expansion_returns_state_energy() {
        let h = PauliSum::from_real_terms(&[(1.0, "ZZ"), (0.5, "XI"), (0.5, "IX")]).unwrap();
        let (vals, vecs) = eigh(&h.to_dense());
        let g = Statevector::from_amplitudes(vecs.column(0).iter().copied().collect()).unwrap();
        let r = subspace_expansion(&g, &h, &[PauliString::identity(2)]).unwrap();
        assert_eq!(r.energies.len(), 1);
        assert!((r.energies[0] - vals[0]).abs() < 1e-12);
    }

    #[test]
    fn expansion_needs_identity() {
        let h = PauliSum::from_real_terms(&[(1.0, "Z")]).unwrap();
        let g = Statevector::zero(1).unwrap();
        let z: PauliString = "Z".parse().unwrap();
        assert_eq!(
            subspace_expansion(&g, &h, &[z]).unwrap_err(),
            SolverError::MissingIdentity
        );
    }

    #[test]
    fn csv_has_header_and_rows() {
        let h = PauliSum::from_real_terms(&[(1.0, "Z")]).unwrap();
        let plus = Statevector::from_amplitudes(vec![C64::new(0.5f64.sqrt(), 0.0); 2]).unwrap();
        let set = [PauliString::identity(1), "Z".parse().unwrap()];
        let csv = subspace_expansion(&plus, &h, &set).unwrap().to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("method,level,energy,residual\n"));
    }
}
