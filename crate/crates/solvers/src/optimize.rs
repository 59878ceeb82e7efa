//! Gradient descent with backtracking and seeded restarts.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cost::GradientMode;
use crate::error::{Result, SolverError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    GradientDescent,
    /// Warm-started gradient descent along a Hamiltonian schedule.
    MorphingOuterLoop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub method: Method,
    /// Initial step size a in θ ← θ − a∇E.
    pub step_size: f64,
    pub max_iters: usize,
    pub gradient: GradientMode,
    /// Stop once an accepted step lowers the cost by less than this.
    pub tolerance: f64,
    pub fd_step: f64,
    /// Extra runs from uniformly random starts in [−π, π).
    pub restarts: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Method::GradientDescent,
            step_size: 0.1,
            max_iters: 2000,
            gradient: GradientMode::ParameterShift,
            tolerance: 1e-12,
            fd_step: 1e-6,
            restarts: 0,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if !(self.fd_step > 0.0) {
            return Err(SolverError::InvalidConfig("finite-difference step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub params: Vec<f64>,
    pub value: f64,
    /// Best value seen after each accepted step, across all restarts.
    pub trace: Vec<f64>,
    pub iterations: usize,
    /// False when max-iters ran out before the tolerance was met.
    pub converged: bool,
}

/// One descent run. Step lengths follow the Barzilai–Borwein estimate and are
/// halved until the Armijo condition holds, so every accepted step lowers f.
pub fn gradient_descent<F, G>(
    f: F,
    grad: G,
    x0: &[f64],
    config: &OptimizerConfig,
) -> Result<OptimizeResult>
where
    F: Fn(&[f64]) -> Result<f64>,
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    config.validate()?;
    let mut x = x0.to_vec();
    let mut e = f(&x)?;
    let mut g = grad(&x)?;
    let mut a = config.step_size;
    let mut trace = vec![e];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iters {
        let g2: f64 = g.iter().map(|v| v * v).sum();
        if g2.sqrt() < 1e-12 {
            converged = true;
            break;
        }
        let mut step = a;
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
            let en = f(&xn)?;
            if en <= e - 1e-4 * step * g2 {
                accepted = Some((xn, en));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, en)) = accepted else {
            // no descent left at machine resolution
            converged = true;
            break;
        };
        iterations += 1;
        let gn = grad(&xn)?;
        let (mut ss, mut sy) = (0.0, 0.0);
        for i in 0..x.len() {
            let s = xn[i] - x[i];
            ss += s * s;
            sy += s * (gn[i] - g[i]);
        }
        a = if sy > 1e-300 { (ss / sy).min(1e3) } else { 2.0 * step };
        let drop = e - en;
        x = xn;
        e = en;
        g = gn;
        trace.push(e);
        if drop < config.tolerance {
            converged = true;
            break;
        }
    }
    Ok(OptimizeResult {
        params: x,
        value: e,
        trace,
        iterations,
        converged,
    })
}

/// Descent from `x0` plus `config.restarts` random starts; the best run wins.
pub fn minimize<F, G>(f: F, grad: G, x0: &[f64], config: &OptimizerConfig) -> Result<OptimizeResult>
where
    F: Fn(&[f64]) -> Result<f64>,
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut best = gradient_descent(&f, &grad, x0, config)?;
    let mut trace = best.trace.clone();
    let mut iterations = best.iterations;
    for _ in 0..config.restarts {
        let start: Vec<f64> = (0..x0.len()).map(|_| rng.random_range(-PI..PI)).collect();
        let run = gradient_descent(&f, &grad, &start, config)?;
        iterations += run.iterations;
        let floor = *trace.last().unwrap();
        trace.extend(run.trace.iter().map(|v| v.min(floor)));
        if run.value < best.value {
            best = run;
        }
    }
    // running minimum so the reported trace is monotone
    for i in 1..trace.len() {
        trace[i] = trace[i].min(trace[i - 1]);
    }
    best.trace = trace;
    best.iterations = iterations;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let f = |x: &[f64]| Ok((x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2));
        let g = |x: &[f64]| Ok(vec![2.0 * (x[0] - 1.0), 20.0 * (x[1] + 2.0)]);
        let r = minimize(f, g, &[0.0, 0.0], &OptimizerConfig::default()).unwrap();
        assert!(r.converged);
        assert!((r.params[0] - 1.0).abs() < 1e-6 && (r.params[1] + 2.0).abs() < 1e-6);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn rejects_bad_settings() {
        let cfg = OptimizerConfig {
            step_size: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = OptimizerConfig {
            tolerance: -1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
