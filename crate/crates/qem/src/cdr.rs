//! Clifford data regression with a linear model.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vqlab_core::measure::expectation_pure;
use vqlab_core::{Circuit, PauliSum};
use vqlab_noise::{run_noisy, NoiseModel};

use crate::error::{QemError, Result};
use crate::estimate::MitigatedEstimate;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdrOptions {
    pub training_size: usize,
    pub seed: u64,
    /// Chance that a parameter is set to a uniformly random multiple of π/2
    /// instead of its nearest one, so the training set is not one circuit.
    pub randomise: f64,
}

impl Default for CdrOptions {
    fn default() -> Self {
        Self {
            training_size: 20,
            seed: 0,
            randomise: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdrFit {
    pub estimate: MitigatedEstimate,
    pub slope: f64,
    pub intercept: f64,
    /// (noisy, ideal) training pairs.
    pub training: Vec<(f64, f64)>,
}

/// Parameters snapped to multiples of π/2.
pub fn clifford_params(params: &[f64], randomise: f64, rng: &mut impl Rng) -> Vec<f64> {
    params
        .iter()
        .map(|&t| {
            if randomise > 0.0 && rng.random::<f64>() < randomise {
                rng.random_range(0..4) as f64 * FRAC_PI_2
            } else {
                (t / FRAC_PI_2).round() * FRAC_PI_2
            }
        })
        .collect()
}

/// Ordinary least squares for y = θ₁x + θ₂.
pub fn fit_linear(pairs: &[(f64, f64)]) -> Result<(f64, f64)> {
    if pairs.is_empty() {
        return Err(QemError::EmptyInput);
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 1e-14 * n {
        return Err(QemError::DegenerateTraining);
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Learn g(x) = θ₁x + θ₂ from near-Clifford copies of `circuit` (ideal
/// values by noiseless simulation, noisy ones under `noise`) and apply it
/// to the noisy value of the target. γ = θ₁².
pub fn clifford_data_regression(
    circuit: &Circuit,
    params: &[f64],
    noise: &NoiseModel,
    observable: &PauliSum,
    options: &CdrOptions,
) -> Result<CdrFit> {
    circuit.check_params(params)?;
    if options.training_size < 2 {
        return Err(QemError::TooFewPoints {
            needed: 2,
            found: options.training_size,
        });
    }
    let noisy_value = |p: &[f64]| -> Result<f64> {
        let rho = run_noisy(circuit, p, noise)?;
        Ok(observable.trace_with(rho.data()).re)
    };
    let raw = noisy_value(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut training = Vec::with_capacity(options.training_size);
    for _ in 0..options.training_size {
        let p = clifford_params(params, options.randomise, &mut rng);
        let ideal = expectation_pure(&circuit.prepare(&p)?, observable)?;
        training.push((noisy_value(&p)?, ideal));
    }
    let (slope, intercept) = fit_linear(&training)?;
    let estimate = MitigatedEstimate::new("cdr", slope * raw + intercept, 0.0, slope * slope, vec![raw])
        .with_detail("slope", slope)
        .with_detail("intercept", intercept);
    Ok(CdrFit {
        estimate,
        slope,
        intercept,
        training,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapping_without_randomisation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = clifford_params(&[0.1, 1.2, -2.0, 3.0], 0.0, &mut rng);
        let k: Vec<f64> = p.iter().map(|v| v / FRAC_PI_2).collect();
        assert_eq!(k, vec![0.0, 1.0, -1.0, 2.0]);
    }

    #[test]
    fn linear_fit_recovers_line() {
        let pairs: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 2.0 * i as f64 - 1.0)).collect();
        let (a, b) = fit_linear(&pairs).unwrap();
        assert!((a - 2.0).abs() < 1e-14 && (b + 1.0).abs() < 1e-14);
        assert_eq!(fit_linear(&[(0.3, 1.0), (0.3, 0.0)]), Err(QemError::DegenerateTraining));
    }
}
