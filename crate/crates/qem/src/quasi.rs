//! Quasi-probability decompositions of inverse noise channels and the
//! Monte-Carlo estimator built on them.

use std::collections::HashMap;
use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use vqlab_core::linalg::{condition_number_real, pinv_real};
use vqlab_core::{
    Circuit, DensityMatrix, Pauli, PauliString, PauliSum, QuantumError, ShotSettings, C64,
};
use vqlab_noise::{NoiseModel, QuantumChannel};

use crate::error::{QemError, Result};
use crate::estimate::MitigatedEstimate;

/// E⁻¹ = Σ_i q_i B_i with cost C = Σ|q_i|.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiProbabilityDecomposition {
    basis: Vec<QuantumChannel>,
    coefficients: Vec<f64>,
}

impl QuasiProbabilityDecomposition {
    pub fn new(basis: Vec<QuantumChannel>, coefficients: Vec<f64>) -> Result<Self> {
        if basis.is_empty() || basis.len() != coefficients.len() {
            return Err(QemError::InvalidRates(format!(
                "{} basis operations for {} coefficients",
                basis.len(),
                coefficients.len()
            )));
        }
        let k = basis[0].n_qubits();
        if let Some(b) = basis.iter().find(|b| b.n_qubits() != k) {
            return Err(QuantumError::QubitMismatch {
                left: k,
                right: b.n_qubits(),
            }
            .into());
        }
        Ok(Self {
            basis,
            coefficients,
        })
    }

    /// The identity decomposition q = (1).
    pub fn trivial(n_qubits: usize) -> Self {
        Self {
            basis: vec![QuantumChannel::identity(n_qubits)],
            coefficients: vec![1.0],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.basis[0].n_qubits()
    }

    pub fn basis(&self) -> &[QuantumChannel] {
        &self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn cost(&self) -> f64 {
        self.coefficients.iter().map(|q| q.abs()).sum()
    }

    /// Sampling distribution p_i = |q_i|/C.
    pub fn probabilities(&self) -> Vec<f64> {
        let c = self.cost();
        self.coefficients.iter().map(|q| q.abs() / c).collect()
    }

    /// Transfer matrix of Σ q_i B_i.
    pub fn ptm(&self) -> DMatrix<f64> {
        let d = 1usize << (2 * self.n_qubits());
        self.basis
            .iter()
            .zip(&self.coefficients)
            .fold(DMatrix::zeros(d, d), |acc, (b, q)| acc + b.ptm() * *q)
    }

    /// max |R(Σq B)·R(E) − I|.
    pub fn deviation(&self, noise: &QuantumChannel) -> f64 {
        let r = self.ptm() * noise.ptm();
        let d = r.nrows();
        (r - DMatrix::identity(d, d)).amax()
    }

    /// ρ ← Σ_i q_i B_i(ρ) on `targets`.
    pub fn apply_linear(&self, rho: &mut DensityMatrix, targets: &[usize]) -> Result<()> {
        let mut acc = vec![C64::new(0.0, 0.0); rho.data().len()];
        for (b, &q) in self.basis.iter().zip(&self.coefficients) {
            if q == 0.0 {
                continue;
            }
            let mut work = rho.clone();
            b.apply(&mut work, targets)?;
            for (a, w) in acc.iter_mut().zip(work.data()) {
                *a += w * q;
            }
        }
        rho.data_mut().copy_from_slice(&acc);
        Ok(())
    }
}

fn kraus_op(label: &str, k: DMatrix<C64>) -> QuantumChannel {
    QuantumChannel::operation(label, vec![k]).expect("basis operation is trace-non-increasing")
}

/// The 4^k Pauli unitaries P·P† on k qubits, in [`PauliString::all`] order.
pub fn pauli_basis(n_qubits: usize) -> Vec<QuantumChannel> {
    PauliString::all(n_qubits)
        .into_iter()
        .map(|p| kraus_op(&p.to_string(), p.to_dense()))
        .collect()
}

/// The 16 single-qubit operations that span every single-qubit map:
/// the Paulis, the π/2 rotations (I + iσ)/√2, the unitaries (σ_a + σ_b)/√2,
/// the projectors (I + σ)/2 and the operations (σ_a + iσ_b)/2.
pub fn standard_basis() -> Vec<QuantumChannel> {
    let m = |p: Pauli| p.matrix();
    let one = DMatrix::<C64>::identity(2, 2);
    let i = C64::new(0.0, 1.0);
    let r = C64::new(FRAC_1_SQRT_2, 0.0);
    let half = C64::new(0.5, 0.0);
    let (x, y, z) = (m(Pauli::X), m(Pauli::Y), m(Pauli::Z));
    vec![
        kraus_op("I", one.clone()),
        kraus_op("X", x.clone()),
        kraus_op("Y", y.clone()),
        kraus_op("Z", z.clone()),
        kraus_op("R_x", (&one + &x * i) * r),
        kraus_op("R_y", (&one + &y * i) * r),
        kraus_op("R_z", (&one + &z * i) * r),
        kraus_op("R_yz", (&y + &z) * r),
        kraus_op("R_zx", (&z + &x) * r),
        kraus_op("R_xy", (&x + &y) * r),
        kraus_op("pi_x", (&one + &x) * half),
        kraus_op("pi_y", (&one + &y) * half),
        kraus_op("pi_z", (&one + &z) * half),
        kraus_op("pi_yz", (&y + &z * i) * half),
        kraus_op("pi_zx", (&z + &x * i) * half),
        kraus_op("pi_xy", (&x + &y * i) * half),
    ]
}

/// Tensor products of [`standard_basis`] on 1 or 2 qubits.
pub fn standard_basis_n(n_qubits: usize) -> Result<Vec<QuantumChannel>> {
    let one = standard_basis();
    match n_qubits {
        1 => Ok(one),
        2 => {
            let mut out = Vec::with_capacity(256);
            for a in &one {
                for b in &one {
                    out.push(a.tensor(b)?.with_label(&format!("{}{}", a.label(), b.label())));
                }
            }
            Ok(out)
        }
        k => Err(vqlab_noise::NoiseError::UnsupportedArity(k).into()),
    }
}

/// Solve R(E)⁻¹ = Σ_i q_i R(B_i) in the Pauli-transfer representation.
pub fn invert_channel(
    noise: &QuantumChannel,
    basis: &[QuantumChannel],
) -> Result<QuasiProbabilityDecomposition> {
    let k = noise.n_qubits();
    if let Some(b) = basis.iter().find(|b| b.n_qubits() != k) {
        return Err(QuantumError::QubitMismatch {
            left: k,
            right: b.n_qubits(),
        }
        .into());
    }
    if basis.is_empty() {
        return Err(QemError::NotSpanning {
            residual: f64::INFINITY,
        });
    }
    let r = noise.ptm();
    let condition = condition_number_real(&r);
    if !(condition <= 1e12) {
        return Err(QemError::NotInvertible { condition });
    }
    let target = r
        .clone()
        .try_inverse()
        .ok_or(QemError::NotInvertible { condition })?;
    let d2 = target.len();
    let mut a = DMatrix::zeros(d2, basis.len());
    for (j, b) in basis.iter().enumerate() {
        a.set_column(j, &DVector::from_column_slice(b.ptm().as_slice()));
    }
    let t = DVector::from_column_slice(target.as_slice());
    let q = pinv_real(&a, 1e-12) * &t;
    let residual = (&a * &q - &t).norm() / t.norm().max(1.0);
    if residual > 1e-8 {
        return Err(QemError::NotSpanning { residual });
    }
    let qpd = QuasiProbabilityDecomposition::new(basis.to_vec(), q.iter().copied().collect())?;
    let dev = qpd.deviation(noise);
    if dev > 1e-8 {
        return Err(QemError::NotSpanning { residual: dev });
    }
    Ok(qpd)
}

/// Pauli-channel probabilities from the diagonal of a transfer matrix.
fn pauli_probabilities(channel: &QuantumChannel) -> Result<Vec<f64>> {
    let r = channel.ptm();
    let m = r.nrows();
    for i in 0..m {
        for j in 0..m {
            if i != j && r[(i, j)].abs() > 1e-10 {
                return Err(QemError::NotPauliChannel);
            }
        }
    }
    let strings = PauliString::all(channel.n_qubits());
    Ok((0..m)
        .map(|j| {
            (0..m)
                .map(|i| {
                    let s = if strings[i].commutes_with(&strings[j]) { 1.0 } else { -1.0 };
                    s * r[(i, i)]
                })
                .sum::<f64>()
                / m as f64
        })
        .collect())
}

/// The part of a Pauli channel a symmetry check cannot detect: the error
/// components that commute with `symmetry` restricted to `targets`, with the
/// rest of the weight returned to the identity.
pub fn commuting_part(
    channel: &QuantumChannel,
    targets: &[usize],
    symmetry: &PauliString,
) -> Result<QuantumChannel> {
    let probs = pauli_probabilities(channel)?;
    let local = symmetry.restrict(targets).unphased();
    let strings = PauliString::all(channel.n_qubits());
    let mut kept: Vec<f64> = probs
        .iter()
        .zip(&strings)
        .map(|(&p, s)| if s.commutes_with(&local) { p.max(0.0) } else { 0.0 })
        .collect();
    kept[0] = 0.0;
    kept[0] = (1.0 - kept.iter().sum::<f64>()).max(0.0);
    Ok(QuantumChannel::pauli(
        &format!("commuting({})", channel.label()),
        channel.n_qubits(),
        &kept,
    )?)
}

/// Which basis [`decompose_noise`] inverts each channel in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// Pauli unitaries; enough for Pauli channels only.
    Pauli,
    /// The 16 operations per qubit (256 on two qubits).
    Standard,
    /// Pauli when the channel is a Pauli channel, standard otherwise.
    Auto,
}

pub fn decompose_channel(channel: &QuantumChannel, kind: BasisKind) -> Result<QuasiProbabilityDecomposition> {
    let k = channel.n_qubits();
    match kind {
        BasisKind::Pauli => invert_channel(channel, &pauli_basis(k)),
        BasisKind::Standard => invert_channel(channel, &standard_basis_n(k)?),
        BasisKind::Auto => match pauli_probabilities(channel) {
            Ok(_) => invert_channel(channel, &pauli_basis(k)),
            Err(_) => invert_channel(channel, &standard_basis_n(k)?),
        },
    }
}

/// One decomposition per noise slot, aligned with
/// [`NoiseModel::circuit_noise`].
pub type NoiseDecompositions = Vec<Vec<QuasiProbabilityDecomposition>>;

pub fn decompose_noise(circuit: &Circuit, noise: &NoiseModel, kind: BasisKind) -> Result<NoiseDecompositions> {
    noise
        .circuit_noise(circuit)?
        .iter()
        .map(|slots| slots.iter().map(|(ch, _)| decompose_channel(ch, kind)).collect())
        .collect()
}

type Slots = Vec<Vec<(QuantumChannel, Vec<usize>)>>;

fn checked_slots(
    circuit: &Circuit,
    params: &[f64],
    noise: &NoiseModel,
    observable: &PauliSum,
    decompositions: &NoiseDecompositions,
) -> Result<Slots> {
    circuit.check_params(params)?;
    observable.ensure_hermitian()?;
    if observable.n_qubits() != circuit.n_qubits() {
        return Err(QuantumError::QubitMismatch {
            left: circuit.n_qubits(),
            right: observable.n_qubits(),
        }
        .into());
    }
    let slots = noise.circuit_noise(circuit)?;
    for (gate, after) in slots.iter().enumerate() {
        for (slot, (ch, _)) in after.iter().enumerate() {
            let ok = decompositions
                .get(gate)
                .and_then(|d| d.get(slot))
                .is_some_and(|d| d.n_qubits() == ch.n_qubits());
            if !ok {
                return Err(QemError::MissingDecomposition { gate, slot });
            }
        }
    }
    Ok(slots)
}

/// Total cost C_tot = Π C over every slot.
pub fn total_cost(decompositions: &NoiseDecompositions) -> f64 {
    decompositions.iter().flatten().map(|d| d.cost()).product()
}

fn initial_state(circuit: &Circuit) -> Result<DensityMatrix> {
    Ok(circuit.reference().to_density()?)
}

/// Noisy state with every slot followed by its branch operation `pick`.
fn branch_state(
    circuit: &Circuit,
    params: &[f64],
    slots: &Slots,
    decompositions: &NoiseDecompositions,
    pick: &[usize],
) -> Result<DensityMatrix> {
    let mut rho = initial_state(circuit)?;
    let mut idx = 0;
    for ((g, after), dec) in circuit.gates().iter().zip(slots).zip(decompositions) {
        g.apply_mixed(&mut rho, params);
        for ((ch, targets), d) in after.iter().zip(dec) {
            ch.apply(&mut rho, targets)?;
            d.basis()[pick[idx]].apply(&mut rho, targets)?;
            idx += 1;
        }
    }
    Ok(rho)
}

/// Σ_branches Π q · Tr[O ρ_branch], computed by applying Σ q_i B_i after
/// every noise slot.
pub fn quasi_probability_mean(
    circuit: &Circuit,
    params: &[f64],
    noise: &NoiseModel,
    observable: &PauliSum,
    decompositions: &NoiseDecompositions,
) -> Result<f64> {
    let rho = mitigated_state(circuit, params, noise, observable, decompositions)?;
    Ok(observable.trace_with(rho.data()).re)
}

/// The quasi-state Σ Π q · ρ_branch (Hermitian, unit trace, possibly not
/// positive).
pub fn mitigated_state(
    circuit: &Circuit,
    params: &[f64],
    noise: &NoiseModel,
    observable: &PauliSum,
    decompositions: &NoiseDecompositions,
) -> Result<DensityMatrix> {
    let slots = checked_slots(circuit, params, noise, observable, decompositions)?;
    let mut rho = initial_state(circuit)?;
    for ((g, after), dec) in circuit.gates().iter().zip(&slots).zip(decompositions) {
        g.apply_mixed(&mut rho, params);
        for ((ch, targets), d) in after.iter().zip(dec) {
            ch.apply(&mut rho, targets)?;
            d.apply_linear(&mut rho, targets)?;
        }
    }
    Ok(rho)
}

/// Explicit sum over every branch of the decomposition tree. Exponential in
/// the number of slots; meant for small circuits.
pub fn quasi_probability_exhaustive(
    circuit: &Circuit,
    params: &[f64],
    noise: &NoiseModel,
    observable: &PauliSum,
    decompositions: &NoiseDecompositions,
) -> Result<f64> {
    let slots = checked_slots(circuit, params, noise, observable, decompositions)?;
    // flatten to a list of steps: gates and (slot, decomposition) pairs
    enum Step<'a> {
        Gate(&'a vqlab_core::GateOp),
        Slot(&'a QuantumChannel, &'a [usize], &'a QuasiProbabilityDecomposition),
    }
    let mut steps = Vec::new();
    for ((g, after), dec) in circuit.gates().iter().zip(&slots).zip(decompositions) {
        steps.push(Step::Gate(g));
        for ((ch, t), d) in after.iter().zip(dec) {
            steps.push(Step::Slot(ch, t, d));
        }
    }
    fn walk(
        steps: &[Step],
        mut rho: DensityMatrix,
        weight: f64,
        params: &[f64],
        observable: &PauliSum,
    ) -> Result<f64> {
        let mut rest = steps;
        while let Some((Step::Gate(g), tail)) = rest.split_first() {
            g.apply_mixed(&mut rho, params);
            rest = tail;
        }
        match rest.split_first() {
            None => Ok(weight * observable.trace_with(rho.data()).re),
            Some((Step::Slot(ch, t, d), tail)) => {
                ch.apply(&mut rho, t)?;
                let mut total = 0.0;
                for (b, &q) in d.basis().iter().zip(d.coefficients()) {
                    if q == 0.0 {
                        continue;
                    }
                    let mut branch = rho.clone();
                    b.apply(&mut branch, t)?;
                    total += walk(tail, branch, weight * q, params, observable)?;
                }
                Ok(total)
            }
            Some((Step::Gate(_), _)) => unreachable!("gates consumed above"),
        }
    }
    walk(&steps, initial_state(circuit)?, 1.0, params, observable)
}

/// Shots drawn from one RNG stream before moving to the next.
const CHUNK: u64 = 4096;

/// Monte-Carlo quasi-probability estimator. Each shot samples one basis
/// operation per noise slot with p_i = |q_i|/C, measures every Pauli term
/// once on the resulting branch and is weighted by C_tot·Π sgn(q_i).
/// Basis operations that are not trace preserving succeed with probability
/// Tr ρ_branch and score 0 otherwise.
pub fn quasi_probability_estimate(
    circuit: &Circuit,
    params: &[f64],
    noise: &NoiseModel,
    observable: &PauliSum,
    decompositions: &NoiseDecompositions,
    settings: &ShotSettings,
) -> Result<MitigatedEstimate> {
    if settings.shots == 0 {
        return Err(QemError::ZeroShots);
    }
    let slots = checked_slots(circuit, params, noise, observable, decompositions)?;
    let flat: Vec<&QuasiProbabilityDecomposition> = decompositions
        .iter()
        .zip(&slots)
        .flat_map(|(d, s)| d.iter().take(s.len()))
        .collect();
    let samplers: Vec<WeightedIndex<f64>> = flat
        .iter()
        .map(|d| WeightedIndex::new(d.probabilities()).expect("probabilities are valid"))
        .collect();
    let c_tot: f64 = flat.iter().map(|d| d.cost()).product();
    let terms = observable.real_terms();
    let (constant, paulis): (f64, Vec<(f64, PauliString)>) = {
        let mut c = 0.0;
        let mut rest = Vec::new();
        for (f, p) in terms {
            if p.is_identity() {
                c += f * p.phase().re;
            } else {
                rest.push((f, p));
            }
        }
        (c, rest)
    };

    let mut memo: HashMap<Vec<usize>, (f64, Vec<f64>)> = HashMap::new();
    let (mut count, mut mean, mut m2) = (0u64, 0.0f64, 0.0f64);
    let mut pick = vec![0usize; flat.len()];
    let mut stream = 0;
    while count < settings.shots {
        let mut rng = settings.rng(stream);
        stream += 1;
        let end = (count + CHUNK).min(settings.shots);
        while count < end {
            let mut sign = 1.0;
            for (i, s) in samplers.iter().enumerate() {
                pick[i] = s.sample(&mut rng);
                if flat[i].coefficients()[pick[i]] < 0.0 {
                    sign = -sign;
                }
            }
            if !memo.contains_key(&pick) {
                let rho = branch_state(circuit, params, &slots, decompositions, &pick)?;
                let tr = rho.trace().re;
                let values = paulis
                    .iter()
                    .map(|(_, p)| p.trace_with(rho.data()).re)
                    .collect();
                memo.insert(pick.clone(), (tr, values));
            }
            let (tr, values) = &memo[&pick];
            let mut shot = 0.0;
            let success = *tr >= 1.0 - 1e-12 || rng.random::<f64>() < *tr;
            if success && *tr > 0.0 {
                shot = constant;
                for ((f, _), v) in paulis.iter().zip(values) {
                    let plus = rng.random::<f64>() < 0.5 * (1.0 + (v / tr).clamp(-1.0, 1.0));
                    shot += if plus { *f } else { -*f };
                }
            }
            let x = c_tot * sign * shot;
            count += 1;
            let delta = x - mean;
            mean += delta / count as f64;
            m2 += delta * (x - mean);
        }
    }
    let var = if count > 1 { m2 / (count - 1) as f64 } else { 0.0 };
    let mut noisy = initial_state(circuit)?;
    for (g, after) in circuit.gates().iter().zip(&slots) {
        g.apply_mixed(&mut noisy, params);
        for (ch, t) in after {
            ch.apply(&mut noisy, t)?;
        }
    }
    let raw = observable.trace_with(noisy.data()).re;
    Ok(MitigatedEstimate::new(
        "quasi_probability",
        mean,
        (var / count as f64).sqrt(),
        c_tot * c_tot,
        vec![raw],
    )
    .with_detail("c_total", c_tot)
    .with_detail("shots", count as f64)
    .with_detail("sample_variance", var)
    .with_detail("branches", memo.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_basis_is_independent() {
        let basis = standard_basis();
        let mut a = DMatrix::zeros(16, 16);
        for (j, b) in basis.iter().enumerate() {
            a.set_column(j, &DVector::from_column_slice(b.ptm().as_slice()));
        }
        assert!(condition_number_real(&a) < 1e3);
    }

    #[test]
    fn commuting_part_drops_detectable_errors() {
        let ch = QuantumChannel::pauli("p", 1, &[0.7, 0.1, 0.05, 0.15]).unwrap();
        let sym: PauliString = "XZ".parse().unwrap();
        // on qubit 0 the symmetry acts as X: only X errors go undetected
        let c = commuting_part(&ch, &[0], &sym).unwrap();
        let p = pauli_probabilities(&c).unwrap();
        assert!((p[0] - 0.9).abs() < 1e-12 && (p[1] - 0.1).abs() < 1e-12);
        assert!(p[2].abs() < 1e-12 && p[3].abs() < 1e-12);
    }
}
