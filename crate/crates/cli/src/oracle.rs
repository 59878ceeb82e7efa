//! Dense reference answers by diagonalisation, matrix functions and direct
//! solves, for diffing against `run` output.

use nalgebra::{DMatrix, DVector};
use serde_json::json;
use vqlab_core::linalg::eigh;
use vqlab_core::C64;
use vqlab_solvers::sat::assignment_of;

use crate::config::{EvolveMode, Operation, Task};
use crate::error::Result;
use crate::run::{bitstring, evolve_trace, start_params, v0_circuit, Context, TaskOutput, TraceRow};

/// f(H)|v⟩ through the eigendecomposition (values, vectors) of H.
fn apply_fn(vals: &[f64], vecs: &DMatrix<C64>, v: &DVector<C64>, f: impl Fn(f64) -> C64) -> DVector<C64> {
    let mut c = vecs.adjoint() * v;
    for (ci, &l) in c.iter_mut().zip(vals) {
        *ci *= f(l);
    }
    vecs * c
}

fn fidelity(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    a.dotc(b).norm_sqr() / (a.norm_squared() * b.norm_squared())
}

fn amplitudes(v: &DVector<C64>) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn oracle_task(ctx: &Context, i: usize, task: &Task) -> Result<TaskOutput> {
    let seed = ctx.task_seed(i);
    let kind = task.name();
    let h = &ctx.hamiltonian;
    let dense = h.to_dense();
    let mut out = TaskOutput::default();
    match task {
        Task::Vqe { .. } => {
            let (vals, _) = eigh(&dense);
            out.result = json!({ "ground_energy": vals[0], "eigenvalues": vals });
        }
        Task::Spectrum { levels, .. } => {
            let (vals, _) = eigh(&dense);
            out.result = json!({ "energies": &vals[..=*levels], "eigenvalues": vals });
        }
        Task::Qaoa { .. } => {
            let diag: Vec<f64> = (0..dense.nrows()).map(|k| dense[(k, k)].re).collect();
            let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
            let optimal: Vec<usize> = (0..diag.len()).filter(|&k| diag[k] <= min + 1e-12).collect();
            let mut result = json!({
                "min_energy": min,
                "optimal_indices": optimal,
                "optimal_bitstrings": optimal.iter().map(|&k| bitstring(k, ctx.n_qubits)).collect::<Vec<_>>(),
            });
            if let Some(cnf) = &ctx.cnf {
                let a: Vec<Vec<u8>> = optimal
                    .iter()
                    .map(|&k| assignment_of(k, cnf.n_vars()).into_iter().map(u8::from).collect())
                    .collect();
                result["optimal_assignments"] = json!(a);
            }
            out.result = result;
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
            let (vals, vecs) = eigh(&dense);
            let psi0 = ansatz.prepare(&theta0)?.to_dvector();
            let exact_at = |t: f64| match mode {
                EvolveMode::Real => apply_fn(&vals, &vecs, &psi0, |l| C64::new(0.0, -l * t).exp()),
                EvolveMode::Imaginary => apply_fn(&vals, &vecs, &psi0, |l| C64::new((-l * t).exp(), 0.0)),
            };
            let mut fid = Vec::with_capacity(trace.times.len());
            for (t, p) in trace.times.iter().zip(&trace.params) {
                let var = ansatz.prepare(p)?.to_dvector();
                fid.push(fidelity(&exact_at(*t), &var));
            }
            let last = exact_at(trace.times.last().copied().unwrap_or(0.0));
            let hv = &dense * &last;
            let exact_energy = last.dotc(&hv).re / last.norm_squared();
            out.trace = trace
                .times
                .iter()
                .zip(&fid)
                .map(|(&x, &y)| TraceRow {
                    task: i,
                    kind: "evolve",
                    series: "fidelity".into(),
                    x,
                    y,
                })
                .collect();
            out.result = json!({
                "final_fidelity": fid.last().copied().unwrap_or(1.0),
                "min_fidelity": fid.iter().copied().fold(1.0, f64::min),
                "exact_final_energy": exact_energy,
            });
        }
        Task::Gibbs { tau, .. } => {
            let (vals, vecs) = eigh(&dense);
            // e^{−2τH}/Z
            let shift = vals[0];
            let w: Vec<f64> = vals.iter().map(|l| (-2.0 * tau * (l - shift)).exp()).collect();
            let z: f64 = w.iter().sum();
            let populations: Vec<f64> = (0..dense.nrows())
                .map(|r| (0..vals.len()).map(|k| w[k] * vecs[(r, k)].norm_sqr()).sum::<f64>() / z)
                .collect();
            let energy: f64 = vals.iter().zip(&w).map(|(l, wk)| l * wk).sum::<f64>() / z;
            out.result = json!({ "populations": populations, "energy": energy });
        }
        Task::LinearAlgebra {
            operation, v0_index, ..
        } => {
            let v0 = v0_circuit(ctx.n_qubits, *v0_index)?.prepare(&[])?.to_dvector();
            let target = match operation {
                Operation::Multiply => Some(&dense * &v0),
                Operation::Solve => dense.clone().lu().solve(&v0),
            };
            out.result = match target {
                Some(t) if t.norm() > 1e-300 => {
                    let t = &t / C64::new(t.norm(), 0.0);
                    json!({
                        "target_amplitudes": amplitudes(&t),
                        "target_probabilities": t.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>(),
                    })
                }
                _ => json!({ "target_amplitudes": null, "note": "matrix is singular or annihilates v0" }),
            };
        }
    }
    out.result["task"] = json!(i);
    out.result["kind"] = json!(kind);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_function_on_diagonal() {
        let vals = [1.0, -2.0];
        let vecs = DMatrix::<C64>::identity(2, 2);
        let v = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)]);
        let w = apply_fn(&vals, &vecs, &v, |l| C64::new(l, 0.0));
        assert_eq!(w[0], C64::new(1.0, 0.0));
        assert_eq!(w[1], C64::new(-4.0, 0.0));
        assert!((fidelity(&v, &(&v * C64::new(0.0, 3.0))) - 1.0).abs() < 1e-15);
    }
}
