//! Readout-error mitigation by confusion-matrix inversion.

use nalgebra::DVector;
use serde::Serialize;
use vqlab_core::linalg::condition_number_real;
use vqlab_noise::ConfusionMatrix;

use crate::error::{QemError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MeasurementMethod {
    Inverse,
    /// Simplex-constrained least squares.
    Constrained,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MitigatedDistribution {
    pub probabilities: Vec<f64>,
    pub method: MeasurementMethod,
    /// ‖N p_est − p_noise‖.
    pub residual: f64,
    pub iterations: usize,
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

const MAX_ITERS: usize = 1_000_000;

/// p_est = N⁻¹p_noise when that is a valid distribution, otherwise the
/// minimiser of ‖N p − p_noise‖ over the simplex by projected gradient
/// (step 1/σ_max², stopping once a step moves less than 1e-10).
pub fn mitigate_measurement(p_noise: &[f64], confusion: &ConfusionMatrix) -> Result<MitigatedDistribution> {
    let n = confusion.matrix();
    let dim = n.nrows();
    if p_noise.len() != dim {
        return Err(QemError::InvalidDistribution(format!(
            "expected {dim} entries, got {}",
            p_noise.len()
        )));
    }
    if p_noise.iter().any(|p| !(*p >= -1e-12) || !p.is_finite()) {
        return Err(QemError::InvalidDistribution("negative or non-finite entry".into()));
    }
    let sum: f64 = p_noise.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(QemError::InvalidDistribution(format!("entries sum to {sum}")));
    }
    let cond = condition_number_real(n);
    if !(cond < 1e12) {
        return Err(QemError::SingularConfusion(cond));
    }
    let b = DVector::from_column_slice(p_noise);
    let x = n
        .clone()
        .lu()
        .solve(&b)
        .ok_or(QemError::SingularConfusion(f64::INFINITY))?;
    let residual = |x: &DVector<f64>| (n * x - &b).norm();
    if x.iter().all(|v| *v >= -1e-12) {
        let clipped: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
        let s: f64 = clipped.iter().sum();
        let p = DVector::from_vec(clipped.iter().map(|v| v / s).collect());
        return Ok(MitigatedDistribution {
            residual: residual(&p),
            probabilities: p.iter().copied().collect(),
            method: MeasurementMethod::Inverse,
            iterations: 0,
        });
    }
    let lipschitz = n.clone().singular_values().max().powi(2);
    let nt = n.transpose();
    let mut p = DVector::from_vec(project_simplex(x.as_slice()));
    let mut iterations = 0;
    while iterations < MAX_ITERS {
        iterations += 1;
        let grad = &nt * (n * &p - &b);
        let next = DVector::from_vec(project_simplex((&p - grad / lipschitz).as_slice()));
        let step = (&next - &p).norm();
        p = next;
        if step < 1e-10 {
            break;
        }
    }
    let s: f64 = p.iter().sum();
    p /= s;
    Ok(MitigatedDistribution {
        residual: residual(&p),
        probabilities: p.iter().copied().collect(),
        method: MeasurementMethod::Constrained,
        iterations,
    })
}
