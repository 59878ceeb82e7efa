//! Expectation values, shot sampling, and the Hadamard / SWAP test primitives.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::circuit::Circuit;
use crate::error::{QuantumError, Result};
use crate::gate::GateOp;
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::state::{DensityMatrix, QuantumState, Statevector};
use crate::C64;

/// Shot budget and seed for sampled estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotSettings {
    pub shots: u64,
    pub seed: u64,
}

impl ShotSettings {
    pub fn new(shots: u64, seed: u64) -> Self {
        Self { shots, seed }
    }

    /// RNG for stream `stream` under this seed.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// Tr[ρ M] (exact). Fails on a non-Hermitian observable.
pub fn expectation(state: &QuantumState, observable: &PauliSum) -> Result<f64> {
    observable.ensure_hermitian()?;
    if state.n_qubits() != observable.n_qubits() {
        return Err(QuantumError::QubitMismatch {
            left: state.n_qubits(),
            right: observable.n_qubits(),
        });
    }
    Ok(match state {
        QuantumState::Pure(s) => observable.expectation_complex(s.amplitudes()).re,
        QuantumState::Mixed(r) => observable.trace_with(r.data()).re,
    })
}

pub fn expectation_pure(state: &Statevector, observable: &PauliSum) -> Result<f64> {
    observable.ensure_hermitian()?;
    if state.n_qubits() != observable.n_qubits() {
        return Err(QuantumError::QubitMismatch {
            left: state.n_qubits(),
            right: observable.n_qubits(),
        });
    }
    Ok(observable.expectation_complex(state.amplitudes()).re)
}

pub fn expectation_mixed(rho: &DensityMatrix, observable: &PauliSum) -> Result<f64> {
    observable.ensure_hermitian()?;
    if rho.n_qubits() != observable.n_qubits() {
        return Err(QuantumError::QubitMismatch {
            left: rho.n_qubits(),
            right: observable.n_qubits(),
        });
    }
    Ok(observable.trace_with(rho.data()).re)
}

/// Draw the number of +1 outcomes of a ±1 measurement with mean `mean`.
pub fn sample_plus_count(mean: f64, shots: u64, rng: &mut ChaCha8Rng) -> u64 {
    let mut p = (1.0 + mean) / 2.0;
    if p < 1e-12 {
        p = 0.0;
    } else if p > 1.0 - 1e-12 {
        p = 1.0;
    }
    Binomial::new(shots, p)
        .expect("probability clamped to [0, 1]")
        .sample(rng)
}

/// Sample mean and standard error of `shots` ±1 outcomes with exact mean `mean`.
pub fn sample_pm1(mean: f64, shots: u64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let plus = sample_plus_count(mean, shots, rng);
    let m = (2.0 * plus as f64 - shots as f64) / shots as f64;
    let var = (1.0 - m * m).max(0.0);
    (m, (var / shots as f64).sqrt())
}

/// Shot-sampled ⟨M⟩ measuring each non-identity term independently with
/// `shots` repetitions. Term `t` uses RNG stream `t`.
/// Returns (estimate, standard error).
pub fn sampled_expectation(
    state: &QuantumState,
    observable: &PauliSum,
    settings: ShotSettings,
) -> Result<(f64, f64)> {
    if settings.shots == 0 {
        return Err(QuantumError::ZeroShots);
    }
    observable.ensure_hermitian()?;
    if state.n_qubits() != observable.n_qubits() {
        return Err(QuantumError::QubitMismatch {
            left: state.n_qubits(),
            right: observable.n_qubits(),
        });
    }
    let mut est = 0.0;
    let mut var = 0.0;
    for (t, (f, p)) in observable.real_terms().into_iter().enumerate() {
        if p.is_identity() {
            est += f;
            continue;
        }
        let exact = match state {
            QuantumState::Pure(s) => p.expectation(s.amplitudes()).re,
            QuantumState::Mixed(r) => p.trace_with(r.data()).re,
        };
        let mut rng = settings.rng(t as u64);
        let (m, se) = sample_pm1(exact, settings.shots, &mut rng);
        est += f * m;
        var += f * f * se * se;
    }
    Ok((est, var.sqrt()))
}

/// Re(e^{iθ}⟨ψ|V†U|ψ⟩) by direct inner product.
pub fn hadamard_test(
    u: &Circuit,
    u_params: &[f64],
    v: &Circuit,
    v_params: &[f64],
    theta: f64,
    state: &Statevector,
) -> Result<f64> {
    if u.n_qubits() != v.n_qubits() {
        return Err(QuantumError::QubitMismatch {
            left: u.n_qubits(),
            right: v.n_qubits(),
        });
    }
    let a = u.apply_pure(u_params, state)?;
    let b = v.apply_pure(v_params, state)?;
    Ok((C64::from_polar(1.0, theta) * b.inner(&a)).re)
}

fn phase_gate(theta: f64) -> GateOp {
    let m = nalgebra::DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::from_polar(1.0, theta),
        ],
    );
    GateOp::Fixed {
        name: "phase".into(),
        targets: vec![0],
        matrix: m,
    }
}

/// Controlled Pauli string (control = qubit 0, string shifted by one).
fn controlled_pauli(p: &PauliString, width: usize) -> GateOp {
    let support = p.support();
    if support.is_empty() {
        return phase_gate(std::f64::consts::FRAC_PI_2 * p.phase_power() as f64);
    }
    let local = p.restrict(&support).to_dense();
    GateOp::Fixed {
        name: format!("p{p}"),
        targets: support,
        matrix: local,
    }
    .controlled(width)
}

/// Prepare the ancilla in (|0⟩ + e^{iθ}|1⟩)/√2, run `body` on the joint
/// register, close with H on the ancilla, and return ⟨Z_ancilla⟩.
fn run_ancilla_circuit(
    reference: &Statevector,
    theta: f64,
    n_params: usize,
    params: &[f64],
    body: Vec<GateOp>,
) -> Result<f64> {
    let n = reference.n_qubits();
    let width = n + 1;
    let start = Statevector::zero(1)?.tensor(reference)?;
    let mut c = Circuit::new(width)?.with_params(n_params).with_reference(start)?;
    c.push(GateOp::h(0))?;
    c.push(phase_gate(theta))?;
    for g in body {
        c.push(g)?;
    }
    c.push(GateOp::h(0))?;
    let out = c.prepare(params)?;
    let half = 1usize << n;
    let amps = out.amplitudes();
    let p0: f64 = amps[..half].iter().map(|a| a.norm_sqr()).sum();
    let p1: f64 = amps[half..].iter().map(|a| a.norm_sqr()).sum();
    Ok(p0 - p1)
}

/// Re(e^{iθ}⟨ψ|V†U|ψ⟩) from a simulated ancilla circuit: V runs
/// anti-controlled and U controlled on a single ancilla, then ⟨Z⟩ is read out.
pub fn hadamard_test_ancilla(
    u: &Circuit,
    u_params: &[f64],
    v: &Circuit,
    v_params: &[f64],
    theta: f64,
    state: &Statevector,
) -> Result<f64> {
    if u.n_qubits() != v.n_qubits() || u.n_qubits() != state.n_qubits() {
        return Err(QuantumError::QubitMismatch {
            left: u.n_qubits(),
            right: v.n_qubits(),
        });
    }
    u.check_params(u_params)?;
    v.check_params(v_params)?;
    let width = u.n_qubits() + 1;
    // Bind parameters by folding them into fixed angles so that the two
    // circuits can share one register without slot clashes.
    let bind = |c: &Circuit, p: &[f64]| -> Vec<GateOp> {
        c.gates()
            .iter()
            .map(|g| match g {
                GateOp::Rotation { name, terms, angle } => GateOp::Rotation {
                    name: name.clone(),
                    terms: terms.clone(),
                    angle: crate::gate::Angle::Fixed(angle.value(p)),
                },
                other => other.clone(),
            })
            .collect()
    };
    let mut body = vec![GateOp::x(0)];
    body.extend(bind(v, v_params).iter().map(|g| g.controlled(width)));
    body.push(GateOp::x(0));
    body.extend(bind(u, u_params).iter().map(|g| g.controlled(width)));
    run_ancilla_circuit(state, theta, 0, &[], body)
}

/// Insert position for the interference circuit: Pauli `sigma` applied right
/// after gate `after_gate` of the ansatz.
#[derive(Debug, Clone)]
pub struct Insertion {
    pub after_gate: usize,
    pub sigma: PauliString,
}

/// Re(e^{iθ}⟨ψ₀|ψ₁⟩) where ψ₀ is the ansatz output with `branch0` inserted and
/// ψ₁ the output with `branch1` inserted and `tail` applied at the end, read
/// from a simulated single-ancilla circuit. This is the circuit family used to
/// measure the McLachlan matrix and vector entries.
pub fn ancilla_interference(
    circuit: &Circuit,
    params: &[f64],
    branch0: Option<&Insertion>,
    branch1: Option<&Insertion>,
    tail: Option<&PauliString>,
    theta: f64,
) -> Result<f64> {
    circuit.check_params(params)?;
    let n = circuit.n_qubits();
    let width = n + 1;
    let mut body = Vec::new();
    for (k, g) in circuit.gates().iter().enumerate() {
        body.push(g.embed(1, width));
        if let Some(ins) = branch0.filter(|i| i.after_gate == k) {
            body.push(GateOp::x(0));
            body.push(controlled_pauli(&ins.sigma, width));
            body.push(GateOp::x(0));
        }
        if let Some(ins) = branch1.filter(|i| i.after_gate == k) {
            body.push(controlled_pauli(&ins.sigma, width));
        }
    }
    if let Some(p) = tail {
        body.push(controlled_pauli(p, width));
    }
    run_ancilla_circuit(&circuit.reference(), theta, circuit.n_params(), params, body)
}

/// SWAP-test flavour.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapMode {
    /// Ancilla-controlled SWAPs, ⟨Z_ancilla⟩ = Tr[ρσ].
    Ancilla,
    /// Bell-basis measurement per qubit pair, parity −1 on outcome "11".
    Destructive,
}

fn check_pair(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.n_qubits() != sigma.n_qubits() {
        return Err(QuantumError::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    Ok(())
}

/// Tr[ρσ] directly.
pub fn overlap_exact(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_pair(rho, sigma)?;
    Ok(rho.overlap(sigma))
}

/// Tr[ρσ] from the exact outcome distribution of the simulated SWAP circuit.
pub fn swap_test(rho: &DensityMatrix, sigma: &DensityMatrix, mode: SwapMode) -> Result<f64> {
    check_pair(rho, sigma)?;
    let n = rho.n_qubits();
    match mode {
        SwapMode::Ancilla => {
            let width = 2 * n + 1;
            let joint = DensityMatrix::zero_state(1)?.tensor(&rho.tensor(sigma)?)?;
            let mut c = Circuit::new(width)?;
            c.push(GateOp::h(0))?;
            for q in 0..n {
                c.push(GateOp::swap(q, n + q).controlled(width))?;
            }
            c.push(GateOp::h(0))?;
            let out = c.apply_mixed(&[], &joint)?;
            let z0 = PauliString::single(width, 0, Pauli::Z);
            Ok(z0.trace_with(out.data()).re)
        }
        SwapMode::Destructive => {
            let width = 2 * n;
            let joint = rho.tensor(sigma)?;
            let mut c = Circuit::new(width)?;
            for q in 0..n {
                c.push(GateOp::cnot(q, n + q))?;
                c.push(GateOp::h(q))?;
            }
            let out = c.apply_mixed(&[], &joint)?;
            let probs = out.diagonal();
            let mut acc = 0.0;
            for (b, p) in probs.iter().enumerate() {
                let mut parity = 1.0;
                for q in 0..n {
                    let a = (b >> (width - 1 - q)) & 1;
                    let s = (b >> (width - 1 - (n + q))) & 1;
                    if a & s == 1 {
                        parity = -parity;
                    }
                }
                acc += parity * p;
            }
            Ok(acc)
        }
    }
}

/// Shot-sampled SWAP test. Returns (estimate, standard error).
pub fn swap_test_sampled(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    mode: SwapMode,
    settings: ShotSettings,
) -> Result<(f64, f64)> {
    if settings.shots == 0 {
        return Err(QuantumError::ZeroShots);
    }
    let exact = swap_test(rho, sigma, mode)?;
    let mut rng = settings.rng(0);
    Ok(sample_pm1(exact, settings.shots, &mut rng))
}
