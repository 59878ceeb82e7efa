//! Variational simulation of A(t)·du/dt = Σ_i B_i(t)|u_i⟩ with the
//! unnormalised state u = e^ℓ|ψ(θ)⟩, plus the matrix-multiplication and
//! linear-solve reductions built on it.

use nalgebra::DVector;
use vqlab_core::linalg::{condition_number_real, pinv_real};
use vqlab_core::{Circuit, PauliSum, QuantumError, Statevector, C64};

use crate::error::{Result, VqsError};
use crate::evolve::check_grid;
use crate::mclachlan::{gram, re_inner};

/// M̄ is rejected once its condition number passes this.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Which vector a drive term acts on.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// The evolving state u itself.
    Current,
    /// A fixed, possibly unnormalised, vector.
    Fixed(Vec<C64>),
}

type OperatorFn<'a> = Box<dyn Fn(f64, &Statevector) -> PauliSum + 'a>;

/// One term B_i(t)|u_i⟩. The operator may depend on time and on the current
/// normalised state ψ (for expectation-value shifts).
pub struct Drive<'a> {
    operator: OperatorFn<'a>,
    source: Source,
}

impl<'a> Drive<'a> {
    pub fn new<F>(operator: F, source: Source) -> Self
    where
        F: Fn(f64, &Statevector) -> PauliSum + 'a,
    {
        Self {
            operator: Box::new(operator),
            source,
        }
    }

    pub fn constant(operator: PauliSum, source: Source) -> Self {
        Self::new(move |_, _| operator.clone(), source)
    }

    /// −iH acting on the current state: plain Schrödinger dynamics.
    pub fn schrodinger(hamiltonian: &PauliSum) -> Self {
        Self::constant(hamiltonian.scale(C64::new(0.0, -1.0)), Source::Current)
    }
}

pub struct GeneralisedSpec<'a> {
    /// A(t); the identity when absent.
    pub lhs: Option<Box<dyn Fn(f64) -> PauliSum + 'a>>,
    pub drives: Vec<Drive<'a>>,
    /// Evolve ℓ = ln‖u‖ as an extra unknown.
    pub track_norm: bool,
    pub log_norm0: f64,
    pub total_time: f64,
    pub dt: f64,
    pub cutoff: f64,
}

impl<'a> GeneralisedSpec<'a> {
    pub fn new(drives: Vec<Drive<'a>>, total_time: f64, dt: f64) -> Self {
        Self {
            lhs: None,
            drives,
            track_norm: false,
            log_norm0: 0.0,
            total_time,
            dt,
            cutoff: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralisedTrace {
    pub times: Vec<f64>,
    pub params: Vec<Vec<f64>>,
    /// ℓ at every row (constant when the norm is not tracked).
    pub log_norms: Vec<f64>,
    pub conditions: Vec<f64>,
}

impl GeneralisedTrace {
    pub fn final_params(&self) -> &[f64] {
        self.params.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn final_norm(&self) -> f64 {
        self.log_norms.last().copied().unwrap_or(0.0).exp()
    }
}

pub fn evolve_generalised(
    ansatz: &Circuit,
    theta0: &[f64],
    spec: &GeneralisedSpec<'_>,
) -> Result<GeneralisedTrace> {
    ansatz.check_params(theta0)?;
    let (steps, total) = check_grid(spec.total_time, spec.dt)?;
    let n = ansatz.n_qubits();
    let mut theta = theta0.to_vec();
    let mut ell = spec.log_norm0;
    let mut trace = GeneralisedTrace {
        times: Vec::with_capacity(steps + 1),
        params: Vec::with_capacity(steps + 1),
        log_norms: Vec::with_capacity(steps + 1),
        conditions: Vec::with_capacity(steps + 1),
    };
    for k in 0..=steps {
        let t = if steps == 0 { 0.0 } else { total * k as f64 / steps as f64 };
        let psi = ansatz.prepare(&theta)?;
        let mut columns: Vec<Vec<C64>> = ansatz
            .derivative_states(&theta)?
            .into_iter()
            .map(Statevector::into_amplitudes)
            .collect();
        if spec.track_norm {
            columns.push(psi.amplitudes().to_vec());
        }
        if let Some(a) = &spec.lhs {
            let a = a(t);
            check_width(&a, n)?;
            for c in columns.iter_mut() {
                *c = a.apply(c);
            }
        }
        // Σ B_i u_i, divided by e^ℓ
        let dim = psi.dim();
        let mut drive = vec![C64::new(0.0, 0.0); dim];
        let scale = (-ell).exp();
        for d in &spec.drives {
            let b = (d.operator)(t, &psi);
            check_width(&b, n)?;
            match &d.source {
                Source::Current => {
                    let bu = b.apply(psi.amplitudes());
                    for (o, v) in drive.iter_mut().zip(&bu) {
                        *o += v;
                    }
                }
                Source::Fixed(v) => {
                    if v.len() != dim {
                        return Err(QuantumError::DimensionMismatch {
                            expected: dim,
                            found: v.len(),
                        }
                        .into());
                    }
                    let bu = b.apply(v);
                    for (o, v) in drive.iter_mut().zip(&bu) {
                        *o += v * scale;
                    }
                }
            }
        }
        let m = gram(&columns);
        let rhs = DVector::from_iterator(columns.len(), columns.iter().map(|c| re_inner(c, &drive)));
        let condition = if m.is_empty() { 1.0 } else { condition_number_real(&m) };
        if !(condition <= CONDITION_LIMIT) {
            return Err(VqsError::IllConditioned {
                time: t,
                condition,
                limit: CONDITION_LIMIT,
            });
        }
        let rate = pinv_real(&m, spec.cutoff) * rhs;
        trace.times.push(t);
        trace.params.push(theta.clone());
        trace.log_norms.push(ell);
        trace.conditions.push(condition);
        if k < steps {
            let t_next = total * (k + 1) as f64 / steps as f64;
            let h = t_next - t;
            for (th, r) in theta.iter_mut().zip(rate.iter()) {
                *th += h * r;
            }
            if spec.track_norm {
                ell += h * rate[rate.len() - 1];
            }
        }
    }
    Ok(trace)
}

fn check_width(op: &PauliSum, n: usize) -> Result<()> {
    if op.n_qubits() != n {
        return Err(QuantumError::QubitMismatch {
            left: op.n_qubits(),
            right: n,
        }
        .into());
    }
    Ok(())
}

/// Output of the multiply/solve reductions: u(T) = e^ℓ|ψ(θ)⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearEvolution {
    pub params: Vec<f64>,
    pub norm: f64,
    pub state: Vec<C64>,
    pub trace: GeneralisedTrace,
}

impl LinearEvolution {
    fn finish(ansatz: &Circuit, trace: GeneralisedTrace) -> Result<Self> {
        let params = trace.final_params().to_vec();
        let norm = trace.final_norm();
        let state = ansatz
            .prepare(&params)?
            .into_amplitudes()
            .into_iter()
            .map(|a| a * norm)
            .collect();
        Ok(Self {
            params,
            norm,
            state,
            trace,
        })
    }
}

fn initial_state(ansatz: &Circuit, theta0: &[f64], matrix: &PauliSum) -> Result<Statevector> {
    let u0 = ansatz.prepare(theta0)?;
    check_width(matrix, ansatz.n_qubits())?;
    Ok(u0)
}

/// u(t) = C(t)|u₀⟩ with C(t) = (t/T)M + (1 − t/T)I, so u(T) = M|u₀⟩; the
/// ansatz at θ0 must prepare |u₀⟩. The interval T = 1 is split into `steps`.
pub fn multiply_by_evolution(
    matrix: &PauliSum,
    ansatz: &Circuit,
    theta0: &[f64],
    steps: usize,
) -> Result<LinearEvolution> {
    let u0 = initial_state(ansatz, theta0, matrix)?;
    let image = matrix.apply(u0.amplitudes());
    if image.iter().map(|z| z.norm_sqr()).sum::<f64>() < 1e-24 {
        return Err(VqsError::ZeroImage);
    }
    let d = rate_matrix(matrix);
    let spec = GeneralisedSpec {
        track_norm: true,
        ..GeneralisedSpec::new(
            vec![Drive::constant(d, Source::Fixed(u0.into_amplitudes()))],
            1.0,
            1.0 / steps.max(1) as f64,
        )
    };
    LinearEvolution::finish(ansatz, evolve_generalised(ansatz, theta0, &spec)?)
}

/// u(t) = C(t)⁻¹|u₀⟩, from C(t)·du/dt = −(M − I)u, so u(T) = M⁻¹|u₀⟩.
/// Aborts with `IllConditioned` when the path passes a singular C(t).
pub fn solve_by_evolution(
    matrix: &PauliSum,
    ansatz: &Circuit,
    theta0: &[f64],
    steps: usize,
) -> Result<LinearEvolution> {
    initial_state(ansatz, theta0, matrix)?;
    let d = rate_matrix(matrix).scale(C64::new(-1.0, 0.0));
    let m = matrix.clone();
    let spec = GeneralisedSpec {
        lhs: Some(Box::new(move |t| morph(&m, t))),
        track_norm: true,
        ..GeneralisedSpec::new(
            vec![Drive::constant(d, Source::Current)],
            1.0,
            1.0 / steps.max(1) as f64,
        )
    };
    LinearEvolution::finish(ansatz, evolve_generalised(ansatz, theta0, &spec)?)
}

/// (M − I)/T with T = 1.
fn rate_matrix(matrix: &PauliSum) -> PauliSum {
    matrix
        .add(&PauliSum::identity(matrix.n_qubits()).scale(C64::new(-1.0, 0.0)))
        .simplify(0.0)
}

/// sM + (1 − s)I.
fn morph(matrix: &PauliSum, s: f64) -> PauliSum {
    matrix
        .scale(C64::new(s, 0.0))
        .add(&PauliSum::identity(matrix.n_qubits()).scale(C64::new(1.0 - s, 0.0)))
        .simplify(0.0)
}
