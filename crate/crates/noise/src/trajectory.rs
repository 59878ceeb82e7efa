//! Stochastic Schrödinger unravelling of the factor-2 Lindblad equation.
//!
//! The factor-2 dissipator equals the ½-normalised one with L'_k = √2 L_k, so
//! jumps fire with probability ⟨L'_k†L'_k⟩dt = 2⟨L_k†L_k⟩dt and the no-jump
//! drift is generated by H_eff = H − (i/2) Σ L'_k†L'_k = H − i Σ L_k†L_k,
//! followed by renormalisation.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use vqlab_core::{QuantumError, Statevector, C64};

use crate::error::{NoiseError, Result};
use crate::lindblad::LindbladSystem;

/// One quantum trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Statevector>,
    /// (time, jump operator index), strictly increasing in time.
    pub jumps: Vec<(f64, usize)>,
}

struct Stepper {
    drift: DMatrix<C64>,
    jumps: Vec<DMatrix<C64>>,
    weights: Vec<DMatrix<C64>>,
    dt: f64,
}

impl Stepper {
    fn new(system: &LindbladSystem, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(NoiseError::InvalidTime { dt, t: 0.0 });
        }
        let bound = dt * system.max_jump_rate();
        if bound > 0.1 {
            return Err(NoiseError::StepTooLarge { value: bound });
        }
        let d = system.hamiltonian().nrows();
        let mut h_eff = system.hamiltonian().clone();
        for l in system.jumps() {
            h_eff -= l.adjoint() * l * C64::new(0.0, 1.0);
        }
        let drift = (h_eff * C64::new(0.0, -dt)).exp();
        let weights = system
            .jumps()
            .iter()
            .map(|l| l.adjoint() * l * C64::new(2.0, 0.0))
            .collect();
        debug_assert_eq!(drift.nrows(), d);
        Ok(Self {
            drift,
            jumps: system.jumps().to_vec(),
            weights,
            dt,
        })
    }

    /// Advance one step; returns the index of the jump that fired, if any.
    fn step(&self, psi: &mut DVector<C64>, rng: &mut ChaCha8Rng) -> Option<usize> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (k, w) in self.weights.iter().enumerate() {
            let rate = (psi.adjoint() * w * &*psi)[(0, 0)].re;
            acc += rate * self.dt;
            if u < acc {
                let next = &self.jumps[k] * &*psi;
                let norm = next.norm();
                *psi = next / C64::new(norm, 0.0);
                return Some(k);
            }
        }
        let next = &self.drift * &*psi;
        let norm = next.norm();
        *psi = next / C64::new(norm, 0.0);
        None
    }
}

fn check_input(system: &LindbladSystem, psi0: &Statevector) -> Result<()> {
    if psi0.n_qubits() != system.n_qubits() {
        return Err(QuantumError::QubitMismatch {
            left: system.n_qubits(),
            right: psi0.n_qubits(),
        }
        .into());
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(QuantumError::NotNormalised { norm }.into());
    }
    Ok(())
}

/// Sample one trajectory on the grid 0, dt, 2dt, … up to `t`.
pub fn sse_trajectory(
    system: &LindbladSystem,
    psi0: &Statevector,
    t: f64,
    dt: f64,
    seed: u64,
) -> Result<Trajectory> {
    check_input(system, psi0)?;
    if !(t >= 0.0) {
        return Err(NoiseError::InvalidTime { dt, t });
    }
    let stepper = Stepper::new(system, dt)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = (t / dt).round() as usize;
    let mut psi = psi0.to_dvector();
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![psi0.clone()],
        jumps: Vec::new(),
    };
    for s in 1..=steps {
        let now = s as f64 * dt;
        if let Some(k) = stepper.step(&mut psi, &mut rng) {
            traj.jumps.push((now, k));
        }
        traj.times.push(now);
        traj.states
            .push(Statevector::from_amplitudes_unchecked(psi.iter().copied().collect())?);
    }
    Ok(traj)
}

/// Trajectory-averaged density matrices at selected grid steps.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleAverage {
    pub times: Vec<f64>,
    /// Mean |ψ⟩⟨ψ| at each sample time.
    pub densities: Vec<DMatrix<C64>>,
    /// Standard error of each diagonal population at each sample time.
    pub population_std_error: Vec<Vec<f64>>,
    pub trajectories: usize,
}

/// Run `count` independent trajectories (trajectory i uses ChaCha8 stream i
/// under `seed`) and average |ψ⟩⟨ψ| at the grid steps `sample_steps`.
/// Runs on the rayon pool; the result does not depend on the thread count.
pub fn sse_ensemble(
    system: &LindbladSystem,
    psi0: &Statevector,
    dt: f64,
    sample_steps: &[usize],
    count: usize,
    seed: u64,
) -> Result<EnsembleAverage> {
    check_input(system, psi0)?;
    let stepper = Stepper::new(system, dt)?;
    let last = sample_steps.iter().copied().max().unwrap_or(0);
    let d = psi0.dim();
    let run = |i: usize| -> Vec<DVector<C64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut psi = psi0.to_dvector();
        let mut snaps = Vec::with_capacity(sample_steps.len());
        let mut next = 0;
        let mut order: Vec<usize> = sample_steps.to_vec();
        order.sort_unstable();
        for s in 0..=last {
            if s > 0 {
                stepper.step(&mut psi, &mut rng);
            }
            while next < order.len() && order[next] == s {
                snaps.push(psi.clone());
                next += 1;
            }
        }
        snaps
    };
    let all: Vec<Vec<DVector<C64>>> = (0..count).into_par_iter().map(run).collect();
    let mut order: Vec<usize> = sample_steps.to_vec();
    order.sort_unstable();
    let mut densities = Vec::with_capacity(order.len());
    let mut errs = Vec::with_capacity(order.len());
    for j in 0..order.len() {
        let mut mean = DMatrix::<C64>::zeros(d, d);
        let mut sq = vec![0.0; d];
        for snaps in &all {
            let v = &snaps[j];
            mean += v * v.adjoint();
            for (k, a) in v.iter().enumerate() {
                sq[k] += a.norm_sqr().powi(2);
            }
        }
        let n = count as f64;
        mean /= C64::new(n, 0.0);
        let se = (0..d)
            .map(|k| {
                let m = mean[(k, k)].re;
                let var = (sq[k] / n - m * m).max(0.0);
                (var / (n - 1.0).max(1.0)).sqrt()
            })
            .collect();
        densities.push(mean);
        errs.push(se);
    }
    Ok(EnsembleAverage {
        times: order.iter().map(|&s| s as f64 * dt).collect(),
        densities,
        population_std_error: errs,
        trajectories: count,
    })
}

/// The deterministic no-jump evolution (drift + renormalisation) for `steps` steps.
pub fn no_jump_state(
    system: &LindbladSystem,
    psi0: &Statevector,
    dt: f64,
    steps: usize,
) -> Result<Statevector> {
    check_input(system, psi0)?;
    let stepper = Stepper::new(system, dt)?;
    let mut psi = psi0.to_dvector();
    for _ in 0..steps {
        let next = &stepper.drift * &psi;
        let norm = next.norm();
        psi = next / C64::new(norm, 0.0);
    }
    Ok(Statevector::from_amplitudes_unchecked(psi.iter().copied().collect())?)
}
