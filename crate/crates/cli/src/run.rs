//! Task execution for `run`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use vqlab_core::ansatz::hardware_efficient;
use vqlab_core::models::transverse_ising;
use vqlab_core::{
    sampled_expectation, Circuit, GateOp, Pauli, PauliString, PauliSum, QuantumState, ShotSettings,
    MAX_DENSITY_QUBITS, MAX_STATEVECTOR_QUBITS,
};
use vqlab_noise::{parse_channel, NoiseModel};
use vqlab_qem::{combine, Extrapolation, NoisyExperiment, Stage, SymmetryOperator, VerifyMode};
use vqlab_solvers::sat::assignment_of;
use vqlab_solvers::{
    excited_by_overlap, linear_algebra_hamiltonian, minimize_cost, qaoa, sat_to_hamiltonian,
    ssvqe, subspace_expansion, vqe, Cnf, CostLocality, LinearTask, OptimizerConfig, Schedule,
};
use vqlab_vqs::{evolve, prepare_gibbs, purification_ansatz, EvolveOptions, Mode};

use crate::config::{
    EvolveMode, Locality, LoadedConfig, Operation, Problem, SpectrumMethodConfig, StageConfig,
    Task, VerifyModeConfig,
};
use crate::error::{CliError, Result};

/// Largest register the dense oracle will diagonalise.
pub const MAX_ORACLE_QUBITS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Run,
    Oracle,
}

/// Everything a task needs, built and validated before any task runs.
#[derive(Debug, Clone)]
pub struct Context {
    pub hamiltonian: PauliSum,
    pub cnf: Option<Cnf>,
    pub n_qubits: usize,
    pub depth: usize,
    pub noise: Option<NoiseModel>,
    pub stages: Vec<Stage>,
    pub shots: u64,
    pub seed: u64,
    pub oracle: bool,
}

/// One point of a plot series.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub task: usize,
    pub kind: &'static str,
    pub series: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtrapolationRow {
    pub task: usize,
    pub stage: String,
    pub rate: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TaskOutput {
    pub result: Value,
    pub trace: Vec<TraceRow>,
    pub extrapolation: Vec<ExtrapolationRow>,
    /// Non-convergence or budget flags; any flag makes the exit code 2.
    pub flags: Vec<String>,
}

fn invalid(message: impl Into<String>) -> CliError {
    CliError::Invalid(message.into())
}

fn cap(what: &'static str, requested: usize, cap: usize) -> Result<()> {
    if requested > cap {
        return Err(CliError::Cap {
            what,
            requested,
            cap,
        });
    }
    Ok(())
}

impl Context {
    /// Schema-level checks and resource caps, then problem construction.
    pub fn build(loaded: &LoadedConfig, seed: u64, strict_noise: bool, mode: RunMode) -> Result<Self> {
        let cfg = &loaded.config;
        let (hamiltonian, cnf) = match &cfg.problem {
            Problem::TransverseIsing { n, h, lambda } => {
                if *n == 0 {
                    return Err(invalid("problem.n must be at least 1"));
                }
                // width check first so a huge request never reaches the model builder
                cap("statevector simulation", *n, MAX_STATEVECTOR_QUBITS)?;
                (transverse_ising(*n, *h, *lambda)?, None)
            }
            Problem::Pauli { .. } => {
                let text = loaded.problem_text.as_deref().unwrap_or("");
                let h = PauliSum::parse_text(text)?;
                if h.n_qubits() == 0 {
                    return Err(invalid("problem has no Pauli terms"));
                }
                (h, None)
            }
            Problem::Dimacs { .. } => {
                let cnf = Cnf::parse_dimacs(loaded.problem_text.as_deref().unwrap_or(""))?;
                (sat_to_hamiltonian(&cnf)?, Some(cnf))
            }
        };
        let n = hamiltonian.n_qubits().max(cnf.as_ref().map_or(0, Cnf::n_vars));
        cap("statevector simulation", n, MAX_STATEVECTOR_QUBITS)?;
        if mode == RunMode::Oracle {
            cap("dense oracle", n, MAX_ORACLE_QUBITS)?;
        }
        if cfg.noise.is_some() {
            cap("density-matrix simulation", n, MAX_DENSITY_QUBITS)?;
        }
        if cfg.ansatz.depth == 0 && cfg.tasks.iter().any(uses_ansatz) {
            return Err(invalid("ansatz.depth must be at least 1"));
        }
        for (i, task) in cfg.tasks.iter().enumerate() {
            check_task(i, task, n, &hamiltonian)?;
        }

        let noise = match &cfg.noise {
            None => None,
            Some(nc) => {
                let mut model = NoiseModel::noiseless().strict(strict_noise);
                if let Some(spec) = &nc.single_qubit {
                    model = model.with_single_qubit(parse_channel(spec, 1)?);
                }
                if let Some(spec) = &nc.two_qubit {
                    model = model.with_two_qubit(parse_channel(spec, 2)?);
                }
                Some(model)
            }
        };
        let stages = match &cfg.mitigation {
            None => Vec::new(),
            Some(m) => {
                if noise.is_none() {
                    return Err(invalid("mitigation needs a [noise] block"));
                }
                let symmetry = match &m.symmetry {
                    Some(s) => {
                        let p: PauliString = s.parse()?;
                        if p.n_qubits() != n {
                            return Err(invalid(format!(
                                "mitigation.symmetry acts on {} qubits, the problem on {n}",
                                p.n_qubits()
                            )));
                        }
                        Some(SymmetryOperator::new(p, m.sector)?)
                    }
                    None => None,
                };
                m.stages
                    .iter()
                    .map(|s| stage(s, symmetry.as_ref()))
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(Self {
            hamiltonian,
            cnf,
            n_qubits: n,
            depth: cfg.ansatz.depth,
            noise,
            stages,
            shots: cfg.shots,
            seed,
            oracle: cfg.oracle,
        })
    }

    pub fn ansatz(&self) -> Result<Circuit> {
        Ok(hardware_efficient(self.n_qubits, self.depth)?)
    }

    /// Seed of task `index`, so inserting a task does not reseed earlier ones.
    pub fn task_seed(&self, index: usize) -> u64 {
        self.seed.wrapping_add(index as u64)
    }
}

fn uses_ansatz(task: &Task) -> bool {
    !matches!(task, Task::Qaoa { .. } | Task::Gibbs { .. })
}

fn check_task(i: usize, task: &Task, n: usize, h: &PauliSum) -> Result<()> {
    let at = |m: String| invalid(format!("tasks[{i}] ({}): {m}", task.name()));
    match task {
        Task::Qaoa { depth, .. } if *depth == 0 => return Err(at("depth must be at least 1".into())),
        Task::Spectrum { method, levels, .. } => {
            if *levels >= 1usize << n {
                return Err(at(format!("level {levels} does not exist in dimension {}", 1usize << n)));
            }
            if *method == SpectrumMethodConfig::SubspaceExpansion && *levels > 3 * n {
                return Err(at(format!("the expansion space has only {} states", 3 * n + 1)));
            }
        }
        Task::Evolve { time, dt, .. } | Task::Gibbs { tau: time, dt } => {
            if !(*dt > 0.0) || !(*time >= 0.0) {
                return Err(at(format!("need dt > 0 and a non-negative duration, got {time}, {dt}")));
            }
        }
        Task::LinearAlgebra {
            operation,
            locality,
            v0_index,
            ..
        } => {
            if *operation == Operation::Multiply && *locality == Locality::Local {
                return Err(at("the local cost is defined for the solve operation only".into()));
            }
            if v0_index.is_some_and(|b| b >= 1usize << n) {
                return Err(at("v0_index is outside the register".into()));
            }
        }
        _ => {}
    }
    if let Task::Gibbs { .. } = task {
        cap("purified Gibbs register", 2 * n, MAX_STATEVECTOR_QUBITS)?;
    }
    if matches!(task, Task::Vqe { .. } | Task::Spectrum { .. } | Task::Evolve { .. } | Task::Gibbs { .. }) {
        h.ensure_hermitian()?;
    }
    Ok(())
}

fn stage(s: &StageConfig, symmetry: Option<&SymmetryOperator>) -> Result<Stage> {
    Ok(match s {
        StageConfig::Boost { factors } => Stage::Boost(factors.clone()),
        StageConfig::QuasiProbability { partial } => Stage::QuasiProbability { partial: *partial },
        StageConfig::Symmetry { mode } => Stage::Symmetry {
            operator: symmetry
                .cloned()
                .ok_or_else(|| invalid("symmetry stage needs mitigation.symmetry"))?,
            mode: match mode {
                VerifyModeConfig::Postselect => VerifyMode::Postselect,
                VerifyModeConfig::Postprocess => VerifyMode::Postprocess,
            },
        },
        StageConfig::Richardson => Stage::Extrapolate(Extrapolation::Richardson),
        StageConfig::Linear => Stage::Extrapolate(Extrapolation::Linear),
        StageConfig::Exponential { mean_errors } => Stage::Extrapolate(Extrapolation::Exponential {
            mean_errors: *mean_errors,
        }),
        StageConfig::Hyperbolic => Stage::Extrapolate(Extrapolation::Hyperbolic),
    })
}

/// `init` when given, otherwise uniform draws from [−π, π).
pub fn start_params(init: &Option<Vec<f64>>, count: usize, seed: u64) -> Result<Vec<f64>> {
    match init {
        Some(v) if v.len() != count => Err(invalid(format!(
            "init has {} values, the circuit has {count} parameters",
            v.len()
        ))),
        Some(v) => Ok(v.clone()),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..count).map(|_| rng.random_range(-PI..PI)).collect())
        }
    }
}

fn optimizer(restarts: usize, max_iters: usize, step_size: f64, seed: u64) -> OptimizerConfig {
    OptimizerConfig {
        restarts,
        max_iters,
        step_size,
        seed,
        ..OptimizerConfig::default()
    }
}

/// |v₀⟩ preparation: X on the set bits of `index`, or H everywhere.
pub fn v0_circuit(n: usize, index: Option<usize>) -> Result<Circuit> {
    let mut c = Circuit::new(n)?;
    for q in 0..n {
        match index {
            Some(b) if (b >> (n - 1 - q)) & 1 == 1 => c.push(GateOp::x(q))?,
            Some(_) => {}
            None => c.push(GateOp::h(q))?,
        }
    }
    Ok(c)
}

pub fn bitstring(index: usize, n: usize) -> String {
    (0..n)
        .map(|q| if (index >> (n - 1 - q)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

fn series(task: usize, kind: &'static str, name: &str, xs: impl IntoIterator<Item = (f64, f64)>) -> Vec<TraceRow> {
    xs.into_iter()
        .map(|(x, y)| TraceRow {
            task,
            kind,
            series: name.to_string(),
            x,
            y,
        })
        .collect()
}

fn indexed(values: &[f64]) -> impl Iterator<Item = (f64, f64)> + '_ {
    values.iter().enumerate().map(|(k, &v)| (k as f64, v))
}

fn not_converged(i: usize, kind: &str, what: &str) -> String {
    format!("tasks[{i}] ({kind}): {what}")
}

pub fn run_task(ctx: &Context, i: usize, task: &Task) -> Result<TaskOutput> {
    let seed = ctx.task_seed(i);
    let kind = task.name();
    let h = &ctx.hamiltonian;
    let mut out = TaskOutput::default();
    match task {
        Task::Vqe {
            restarts,
            max_iters,
            step_size,
            init,
        } => {
            let ansatz = ctx.ansatz()?;
            let x0 = start_params(init, ansatz.n_params(), seed)?;
            let r = vqe(h, &ansatz, &x0, &optimizer(*restarts, *max_iters, *step_size, seed))?;
            if !r.converged {
                out.flags.push(not_converged(i, kind, "optimiser hit max_iters"));
            }
            out.trace = series(i, "vqe", "energy", indexed(&r.trace));
            let mut result = json!({
                "energy": r.energy,
                "params": r.params,
                "iterations": r.iterations,
                "converged": r.converged,
            });
            if ctx.shots > 0 {
                let state = QuantumState::Pure(ansatz.prepare(&r.params)?);
                let (value, std_error) =
                    sampled_expectation(&state, h, ShotSettings::new(ctx.shots, seed))?;
                result["sampled"] = json!({ "shots": ctx.shots, "value": value, "std_error": std_error });
            }
            if let Some(noise) = &ctx.noise {
                let exp = NoisyExperiment {
                    circuit: ansatz,
                    params: r.params.clone(),
                    noise: noise.clone(),
                    observable: h.clone(),
                };
                let raw = combine(&exp, &[])?;
                result["noisy_energy"] = json!(raw.estimate.value);
                if !ctx.stages.is_empty() {
                    let m = combine(&exp, &ctx.stages)?;
                    for st in &m.stages {
                        for (rate, value) in m.rates.iter().zip(&st.values) {
                            out.extrapolation.push(ExtrapolationRow {
                                task: i,
                                stage: st.stage.clone(),
                                rate: *rate,
                                value: *value,
                            });
                        }
                    }
                    out.extrapolation.push(ExtrapolationRow {
                        task: i,
                        stage: "estimate".into(),
                        rate: 0.0,
                        value: m.estimate.value,
                    });
                    result["mitigated"] = serde_json::to_value(&m.estimate).expect("estimate serialises");
                }
            }
            out.result = result;
        }
        Task::Qaoa {
            depth,
            restarts,
            max_iters,
            step_size,
            morphing_steps,
            init,
        } => {
            let x0 = start_params(init, 2 * depth, seed)?;
            let schedule = match morphing_steps {
                Some(steps) => Schedule::Morphing { steps: *steps },
                None => Schedule::Fixed,
            };
            let r = qaoa(h, *depth, schedule, &x0, &optimizer(*restarts, *max_iters, *step_size, seed))?;
            if !r.converged {
                out.flags.push(not_converged(i, kind, "optimiser hit max_iters"));
            }
            out.trace = series(i, "qaoa", "energy", indexed(&r.trace));
            out.trace.extend(series(i, "qaoa", "probability", indexed(&r.probabilities)));
            let mut result = json!({
                "energy": r.energy,
                "params": r.params,
                "best_index": r.best_index,
                "best_bitstring": bitstring(r.best_index, ctx.n_qubits),
                "best_probability": r.probabilities[r.best_index],
                "converged": r.converged,
            });
            if let Some(cnf) = &ctx.cnf {
                let a = assignment_of(r.best_index, cnf.n_vars());
                result["assignment"] = json!(a.iter().map(|&b| u8::from(b)).collect::<Vec<_>>());
                result["violated_clauses"] = json!(cnf.violated(&a));
            }
            out.result = result;
        }
        Task::Spectrum {
            method,
            levels,
            restarts,
            max_iters,
            step_size,
            init,
        } => {
            let ansatz = ctx.ansatz()?;
            let x0 = start_params(init, ansatz.n_params(), seed)?;
            let cfg = optimizer(*restarts, *max_iters, *step_size, seed);
            let r = match method {
                SpectrumMethodConfig::Overlap => excited_by_overlap(h, &ansatz, None, *levels, &x0, &cfg)?,
                SpectrumMethodConfig::Ssvqe => ssvqe(h, &ansatz, *levels, &x0, &cfg)?,
                SpectrumMethodConfig::SubspaceExpansion => {
                    let g = vqe(h, &ansatz, &x0, &cfg)?;
                    if !g.converged {
                        out.flags.push(not_converged(i, kind, "ground-state optimiser hit max_iters"));
                    }
                    let ground = ansatz.prepare(&g.params)?;
                    let mut r = subspace_expansion(&ground, h, &expansion_operators(ctx.n_qubits))?;
                    r.energies.truncate(levels + 1);
                    r.residuals.truncate(levels + 1);
                    r
                }
            };
            out.trace = series(i, "spectrum", "energy", indexed(&r.energies));
            out.result = json!({
                "method": r.method.tag(),
                "energies": r.energies,
                "residuals": r.residuals,
                "notes": r.flags,
            });
        }
        Task::Evolve {
            mode,
            time,
            dt,
            residual_budget,
            init,
        } => {
            let ansatz = ctx.ansatz()?;
            let theta0 = start_params(init, ansatz.n_params(), seed)?;
            let trace = evolve_trace(&ansatz, &theta0, h, *mode, *time, *dt, *residual_budget)?;
            if !trace.over_budget.is_empty() {
                out.flags.push(not_converged(
                    i,
                    kind,
                    &format!("{} steps over the residual budget", trace.over_budget.len()),
                ));
            }
            if !trace.energy_increases.is_empty() {
                out.flags.push(not_converged(
                    i,
                    kind,
                    &format!("energy rose on {} imaginary-time steps", trace.energy_increases.len()),
                ));
            }
            let times = &trace.times;
            out.trace = series(i, "evolve", "energy", times.iter().copied().zip(trace.energies.iter().copied()));
            out.trace.extend(series(
                i,
                "evolve",
                "residual",
                times.iter().copied().zip(trace.residuals.iter().copied()),
            ));
            for k in 0..theta0.len() {
                out.trace.extend(series(
                    i,
                    "evolve",
                    &format!("theta_{k}"),
                    times.iter().copied().zip(trace.params.iter().map(|p| p[k])),
                ));
            }
            out.result = json!({
                "steps": times.len().saturating_sub(1),
                "initial_params": theta0,
                "final_params": trace.final_params(),
                "final_energy": trace.final_energy(),
                "max_residual": trace.residuals.iter().copied().fold(0.0, f64::max),
            });
        }
        Task::Gibbs { tau, dt } => {
            let ansatz = purification_ansatz(ctx.n_qubits)?;
            let theta0 = vec![0.0; ansatz.n_params()];
            let r = prepare_gibbs(h, &ansatz, &theta0, *tau, *dt)?;
            if !r.trace.energy_increases.is_empty() {
                out.flags.push(not_converged(i, kind, "energy rose during imaginary-time evolution"));
            }
            out.trace = series(
                i,
                "gibbs",
                "energy",
                r.trace.times.iter().copied().zip(r.trace.energies.iter().copied()),
            );
            out.result = json!({
                "populations": r.state.diagonal(),
                "purity": r.state.purity(),
            });
        }
        Task::LinearAlgebra {
            operation,
            locality,
            v0_index,
            restarts,
            max_iters,
            step_size,
            init,
        } => {
            let ansatz = ctx.ansatz()?;
            let v0 = v0_circuit(ctx.n_qubits, *v0_index)?;
            let cost = linear_algebra_hamiltonian(h, &v0, linear_task(*operation), cost_locality(*locality))?;
            let x0 = start_params(init, ansatz.n_params(), seed)?;
            let r = minimize_cost(&cost, &ansatz, &x0, &optimizer(*restarts, *max_iters, *step_size, seed))?;
            if !r.converged {
                out.flags.push(not_converged(i, kind, "optimiser hit max_iters"));
            }
            out.trace = series(i, "linear-algebra", "cost", indexed(&r.trace));
            let state = ansatz.prepare(&r.params)?;
            out.result = json!({
                "cost": r.value,
                "params": r.params,
                "probabilities": state.probabilities(),
                "converged": r.converged,
            });
        }
    }
    out.result["task"] = json!(i);
    out.result["kind"] = json!(kind);
    Ok(out)
}

pub fn linear_task(op: Operation) -> LinearTask {
    match op {
        Operation::Multiply => LinearTask::Multiply,
        Operation::Solve => LinearTask::Solve,
    }
}

pub fn cost_locality(l: Locality) -> CostLocality {
    match l {
        Locality::Global => CostLocality::Global,
        Locality::Local => CostLocality::Local,
    }
}

/// Identity plus every single-qubit Pauli.
pub fn expansion_operators(n: usize) -> Vec<PauliString> {
    let mut out = vec![PauliString::identity(n)];
    for q in 0..n {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            out.push(PauliString::single(n, q, p));
        }
    }
    out
}

pub fn evolve_trace(
    ansatz: &Circuit,
    theta0: &[f64],
    h: &PauliSum,
    mode: EvolveMode,
    time: f64,
    dt: f64,
    residual_budget: Option<f64>,
) -> Result<vqlab_vqs::EvolutionTrace> {
    let mode = match mode {
        EvolveMode::Real => Mode::Real,
        EvolveMode::Imaginary => Mode::Imaginary,
    };
    let opts = EvolveOptions {
        residual_budget,
        ..EvolveOptions::new(mode, time, dt)
    };
    Ok(evolve(ansatz, theta0, h, &opts)?)
}
