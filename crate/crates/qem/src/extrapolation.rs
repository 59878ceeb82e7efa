//! Zero-noise extrapolation: Richardson, exponential, multi-exponential,
//! least-squares polynomial and hyperbolic.

use nalgebra::{DMatrix, DVector};
use twofloat::TwoFloat;
use vqlab_core::linalg::pinv_real;

use crate::error::{QemError, Result};
use crate::estimate::{Measured, MitigatedEstimate, RatePoint};

/// β_k = Π_{i≠k} α_i/(α_i − α_k), the weights with Σβ = 1 and
/// Σβ_k α_k^j = 0 for j = 1..n. Numerator and denominator are formed as
/// double-double products and divided once with a correction step, so each
/// β_k carries a single rounding.
pub fn richardson_coefficients(alphas: &[f64]) -> Result<Vec<f64>> {
    check_factors(alphas)?;
    Ok((0..alphas.len())
        .map(|k| {
            let ak = TwoFloat::from(alphas[k]);
            let (mut num, mut den) = (TwoFloat::from(1.0), TwoFloat::from(1.0));
            for (i, &ai) in alphas.iter().enumerate() {
                if i != k {
                    let ai = TwoFloat::from(ai);
                    num *= ai;
                    den *= ai - ak;
                }
            }
            let q = num.hi() / den.hi();
            let r = num - den * q;
            q + r.hi() / den.hi()
        })
        .collect())
}

fn check_factors(alphas: &[f64]) -> Result<()> {
    let Some(&first) = alphas.first() else {
        return Err(QemError::EmptyInput);
    };
    if !alphas.iter().all(|a| a.is_finite()) {
        return Err(QemError::InvalidRates("factors must be finite".into()));
    }
    for (i, a) in alphas.iter().enumerate() {
        if alphas[..i].contains(a) {
            return Err(QemError::DuplicateRate(*a));
        }
    }
    if (first - 1.0).abs() > 1e-12 {
        return Err(QemError::InvalidRates(format!(
            "first factor must be 1, got {first}"
        )));
    }
    if alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(QemError::InvalidRates("factors must be strictly increasing".into()));
    }
    Ok(())
}

/// Richardson extrapolation over points measured at boost factors α_k
/// (α_0 = 1). γ = Σβ² assumes equal variance at every factor.
pub fn richardson(points: &[RatePoint]) -> Result<MitigatedEstimate> {
    let alphas: Vec<f64> = points.iter().map(|p| p.rate).collect();
    let beta = richardson_coefficients(&alphas)?;
    let value = beta.iter().zip(points).map(|(b, p)| b * p.value).sum();
    let var: f64 = beta
        .iter()
        .zip(points)
        .map(|(b, p)| (b * p.std_error).powi(2))
        .sum();
    let gamma = beta.iter().map(|b| b * b).sum();
    let mut out = MitigatedEstimate::new(
        "richardson",
        value,
        var.sqrt(),
        gamma,
        points.iter().map(|p| p.value).collect(),
    );
    for (k, b) in beta.iter().enumerate() {
        out = out.with_detail(&format!("beta_{k}"), *b);
    }
    Ok(out)
}

/// Two-point exponential extrapolation from M(ε) and M(αε) for a circuit
/// with `n_gates` noisy gates.
pub fn exponential_extrapolate(
    eps: f64,
    alpha: f64,
    base: Measured,
    boosted: Measured,
    n_gates: f64,
) -> Result<MitigatedEstimate> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(QemError::InvalidFactor(alpha));
    }
    if !(eps >= 0.0) || !(n_gates >= 0.0) {
        return Err(QemError::InvalidRates(format!(
            "need ε ≥ 0 and N_g ≥ 0, got ε={eps}, N_g={n_gates}"
        )));
    }
    let w1 = alpha * (n_gates * eps).exp() / (alpha - 1.0);
    let w2 = (n_gates * alpha * eps).exp() / (alpha - 1.0);
    let value = w1 * base.value - w2 * boosted.value;
    let std = ((w1 * base.std_error).powi(2) + (w2 * boosted.std_error).powi(2)).sqrt();
    Ok(MitigatedEstimate::new(
        "exponential",
        value,
        std,
        w1 * w1 + w2 * w2,
        vec![base.value, boosted.value],
    )
    .with_detail("alpha", alpha)
    .with_detail("mean_errors", n_gates * eps))
}

/// M(0) = sgn(M_e)·√(M_e²cosh²μ − M_o²sinh²μ) from the symmetry-sector
/// values and the mean number of symmetry-breaking errors μ.
pub fn hyperbolic_extrapolate(even: Measured, odd: Measured, mu: f64) -> Result<MitigatedEstimate> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(QemError::InvalidRates(format!("μ must be finite and ≥ 0, got {mu}")));
    }
    let (ch, sh) = (mu.cosh(), mu.sinh());
    let radicand = (even.value * ch).powi(2) - (odd.value * sh).powi(2);
    let scale = (even.value * ch).powi(2).max(1e-300);
    let radicand = if radicand < 0.0 && radicand > -1e-14 * scale {
        0.0
    } else {
        radicand
    };
    if radicand < 0.0 {
        return Err(QemError::NegativeRadicand(radicand));
    }
    let m0 = even.value.signum() * radicand.sqrt();
    // linearised propagation of the two sector errors
    let (de, dodd) = if m0 == 0.0 {
        (f64::INFINITY, f64::INFINITY)
    } else {
        (even.value * ch * ch / m0, odd.value * sh * sh / m0)
    };
    let gamma = if m0 == 0.0 { f64::INFINITY } else { de * de + dodd * dodd };
    let std = if even.std_error == 0.0 && odd.std_error == 0.0 {
        0.0
    } else {
        ((de * even.std_error).powi(2) + (dodd * odd.std_error).powi(2)).sqrt()
    };
    Ok(MitigatedEstimate::new("hyperbolic", m0, std, gamma.max(1.0), vec![even.value, odd.value])
        .with_detail("mu", mu))
}

/// Sector values of the single-Γ decay model with Poisson(μ) errors that
/// each flip the symmetry: M_e = M₀cosh(μ(1−Γ))/cosh μ and
/// M_o = M₀sinh(μ(1−Γ))/sinh μ.
pub fn hyperbolic_forward(m0: f64, gamma_d: f64, mu: f64) -> (f64, f64) {
    let x = mu * (1.0 - gamma_d);
    let even = m0 * x.cosh() / mu.cosh();
    let odd = if mu == 0.0 {
        m0 * (1.0 - gamma_d)
    } else {
        m0 * x.sinh() / mu.sinh()
    };
    (even, odd)
}

/// Coefficients and weights of a linear least-squares solve.
struct LinearSolve {
    coefficients: DVector<f64>,
    /// Row `k` of pinv(E): value_k = Σ_i w_ki y_i.
    pinv: DMatrix<f64>,
    residual: f64,
}

fn linear_solve(design: &DMatrix<f64>, y: &DVector<f64>) -> LinearSolve {
    let pinv = pinv_real(design, 1e-12);
    let coefficients = &pinv * y;
    let residual = (design * &coefficients - y).norm();
    LinearSolve {
        coefficients,
        pinv,
        residual,
    }
}

/// Σ w_i² σ_i² and γ = Σ w_i² · m / p for weights `w` over m points and p
/// fitted parameters; γ reduces to Σβ² when m = p.
fn propagate(w: &[f64], points: &[(f64, f64)], n_params: usize) -> (f64, f64) {
    let var: f64 = w.iter().zip(points).map(|(w, p)| (w * p.1).powi(2)).sum();
    let s2: f64 = w.iter().map(|w| w * w).sum();
    (var.sqrt(), s2 * w.len() as f64 / n_params as f64)
}

/// Result of a least-squares polynomial fit.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialFit {
    pub estimate: MitigatedEstimate,
    /// Exponent vectors of the monomials, constant term first.
    pub monomials: Vec<Vec<u32>>,
    pub coefficients: Vec<f64>,
    /// Order actually used (forced to 0 for identical points).
    pub order: usize,
}

/// One measurement at the error rates (ε_i, ν_i, …).
#[derive(Debug, Clone, PartialEq)]
pub struct FitPoint {
    pub rates: Vec<f64>,
    pub value: f64,
    pub std_error: f64,
}

impl FitPoint {
    pub fn new(rates: Vec<f64>, value: f64) -> Self {
        Self {
            rates,
            value,
            std_error: 0.0,
        }
    }
}

/// Exponent vectors of total degree ≤ `order` in `vars` variables, ordered
/// by degree and then lexicographically (highest power of the first
/// variable first).
pub fn monomials(vars: usize, order: usize) -> Vec<Vec<u32>> {
    fn fill(vars: usize, degree: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == vars {
            prefix.push(degree);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=degree).rev() {
            prefix.push(k);
            fill(vars, degree - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if vars == 0 {
        return vec![Vec::new()];
    }
    for d in 0..=order as u32 {
        fill(vars, d, &mut Vec::new(), &mut out);
    }
    out
}

/// Least-squares fit of a total-degree-`order` polynomial in the error
/// rates; the extrapolated value is the constant coefficient.
pub fn least_squares_fit(points: &[FitPoint], order: usize) -> Result<PolynomialFit> {
    let Some(first) = points.first() else {
        return Err(QemError::EmptyInput);
    };
    let vars = first.rates.len();
    if vars == 0 || points.iter().any(|p| p.rates.len() != vars) {
        return Err(QemError::InvalidRates(
            "every point needs the same number of rates (at least one)".into(),
        ));
    }
    let identical = points.iter().all(|p| p.rates == first.rates);
    let order = if identical { 0 } else { order };
    let monos = monomials(vars, order);
    if points.len() < monos.len() {
        return Err(QemError::TooFewPoints {
            needed: monos.len(),
            found: points.len(),
        });
    }
    let design = DMatrix::from_fn(points.len(), monos.len(), |i, j| {
        monos[j]
            .iter()
            .zip(&points[i].rates)
            .map(|(&e, &r)| r.powi(e as i32))
            .product()
    });
    let sv = design.clone().singular_values();
    let smax = sv.max();
    let rank = sv.iter().filter(|&&s| s > 1e-12 * smax).count();
    if rank < monos.len() {
        return Err(QemError::RankDeficient {
            rank,
            needed: monos.len(),
        });
    }
    let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.value));
    let solve = linear_solve(&design, &y);
    let w: Vec<f64> = solve.pinv.row(0).iter().copied().collect();
    let sig: Vec<(f64, f64)> = points.iter().map(|p| (p.value, p.std_error)).collect();
    let (std, gamma) = propagate(&w, &sig, monos.len());
    let mut estimate = MitigatedEstimate::new(
        "least_squares",
        solve.coefficients[0],
        std,
        gamma,
        points.iter().map(|p| p.value).collect(),
    )
    .with_detail("order", order as f64)
    .with_detail("residual", solve.residual);
    if identical && points.len() > 1 {
        estimate.flags.push("identical rates: order forced to 0".into());
    }
    Ok(PolynomialFit {
        estimate,
        monomials: monos,
        coefficients: solve.coefficients.iter().copied().collect(),
        order,
    })
}

/// Result of a Σ_k b_k exp(−Γ_k ε) fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialFit {
    pub estimate: MitigatedEstimate,
    pub amplitudes: Vec<f64>,
    pub rates: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
}

struct Projection {
    residual: DVector<f64>,
    solve: LinearSolve,
}

fn project(gammas: &[f64], eps: &[f64], y: &DVector<f64>) -> Projection {
    let e = DMatrix::from_fn(eps.len(), gammas.len(), |i, k| (-gammas[k] * eps[i]).exp());
    let solve = linear_solve(&e, y);
    Projection {
        residual: &e * &solve.coefficients - y,
        solve,
    }
}

fn cost(gammas: &[f64], eps: &[f64], y: &DVector<f64>) -> f64 {
    project(gammas, eps, y).residual.norm_squared()
}

/// Nonlinear least-squares fit of Σ_k b_k exp(−Γ_k ε) by variable
/// projection: the amplitudes are eliminated linearly, the rates start from
/// a grid search and are refined by Levenberg–Marquardt.
pub fn multi_exponential_fit(points: &[RatePoint], count: usize) -> Result<ExponentialFit> {
    if count == 0 {
        return Err(QemError::InvalidRates("need at least one exponential".into()));
    }
    if points.len() < 2 * count {
        return Err(QemError::TooFewPoints {
            needed: 2 * count,
            found: points.len(),
        });
    }
    let eps: Vec<f64> = points.iter().map(|p| p.rate).collect();
    let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.value));
    let sig: Vec<(f64, f64)> = points.iter().map(|p| (p.value, p.std_error)).collect();
    let inputs: Vec<f64> = points.iter().map(|p| p.value).collect();
    let ymax = y.amax();

    let constant = y.iter().all(|v| (v - y[0]).abs() <= 1e-14 * ymax.max(1e-300));
    if constant {
        let w = vec![1.0 / points.len() as f64; points.len()];
        let (std, gamma) = propagate(&w, &sig, 1);
        let estimate = MitigatedEstimate::new("multi_exponential", y[0], std, gamma, inputs)
            .with_detail("gamma_0", 0.0)
            .with_detail("b_0", y[0])
            .with_detail("residual", 0.0);
        return Ok(ExponentialFit {
            estimate,
            amplitudes: vec![y[0]],
            rates: vec![0.0],
            residual: 0.0,
            converged: true,
        });
    }

    let emax = eps.iter().fold(0.0f64, |a, e| a.max(e.abs())).max(1e-300);
    let mut grid = vec![0.0];
    let n_grid = 80;
    for i in 0..n_grid {
        let t = i as f64 / (n_grid - 1) as f64;
        grid.push(1e-3 / emax * (5e4f64).powf(t));
    }

    let mut gammas = vec![grid[1]; count];
    if count == 1 {
        gammas[0] = *grid
            .iter()
            .min_by(|a, b| cost(&[**a], &eps, &y).total_cmp(&cost(&[**b], &eps, &y)))
            .expect("grid is non-empty");
    } else if count == 2 {
        let mut best = f64::INFINITY;
        for i in 0..grid.len() {
            for j in (i + 1)..grid.len() {
                let c = cost(&[grid[i], grid[j]], &eps, &y);
                if c < best {
                    best = c;
                    gammas = vec![grid[i], grid[j]];
                }
            }
        }
    } else {
        // coordinate sweeps over the grid
        for (k, g) in gammas.iter_mut().enumerate() {
            *g = grid[(k * grid.len()) / count];
        }
        for _ in 0..3 {
            for k in 0..count {
                let mut best = (cost(&gammas, &eps, &y), gammas[k]);
                for &g in &grid {
                    let mut trial = gammas.clone();
                    trial[k] = g;
                    let c = cost(&trial, &eps, &y);
                    if c < best.0 {
                        best = (c, g);
                    }
                }
                gammas[k] = best.1;
            }
        }
    }

    let (gammas, converged) = levenberg_marquardt(gammas, &eps, &y);
    let proj = project(&gammas, &eps, &y);
    let amplitudes: Vec<f64> = proj.solve.coefficients.iter().copied().collect();
    let value: f64 = amplitudes.iter().sum();
    // value = 1ᵀ pinv(E) y with the rates held fixed
    let w: Vec<f64> = (0..points.len())
        .map(|i| proj.solve.pinv.column(i).sum())
        .collect();
    let (std, gamma) = propagate(&w, &sig, 2 * count);
    let residual = proj.residual.norm();
    let mut estimate = MitigatedEstimate::new("multi_exponential", value, std, gamma.max(1.0), inputs)
        .with_detail("residual", residual);
    for k in 0..count {
        estimate = estimate
            .with_detail(&format!("b_{k}"), amplitudes[k])
            .with_detail(&format!("gamma_{k}"), gammas[k]);
    }
    if !converged {
        estimate.flags.push("fit did not converge".into());
    }
    Ok(ExponentialFit {
        estimate,
        amplitudes,
        rates: gammas,
        residual,
        converged,
    })
}

fn levenberg_marquardt(mut g: Vec<f64>, eps: &[f64], y: &DVector<f64>) -> (Vec<f64>, bool) {
    let k = g.len();
    let scale = y.norm_squared().max(1e-300);
    let mut r = project(&g, eps, y).residual;
    let mut c = r.norm_squared();
    let mut lambda = 1e-3;
    for _ in 0..500 {
        if c <= 1e-30 * scale {
            return (g, true);
        }
        let mut jac = DMatrix::zeros(eps.len(), k);
        for j in 0..k {
            let h = 1e-7 * g[j].abs().max(1e-3);
            let mut gp = g.clone();
            gp[j] += h;
            let rp = project(&gp, eps, y).residual;
            gp[j] = g[j] - h;
            let rm = project(&gp, eps, y).residual;
            jac.set_column(j, &((rp - rm) / (2.0 * h)));
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        if jtr.norm() <= 1e-15 * scale.sqrt() {
            return (g, true);
        }
        let mut accepted = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for d in 0..k {
                a[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&(-&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = g.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rt = project(&trial, eps, y).residual;
            let ct = rt.norm_squared();
            if ct < c {
                let drop = c - ct;
                let small = step.norm() <= 1e-13 * (1.0 + g.iter().map(|v| v * v).sum::<f64>().sqrt());
                g = trial;
                r = rt;
                c = ct;
                lambda = (lambda / 3.0).max(1e-15);
                accepted = true;
                if drop <= 1e-16 * c || small {
                    return (g, true);
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // no further descent at this resolution: a stationary point
            return (g, lambda < 1e10 || jtr.norm() <= 1e-8 * scale.sqrt());
        }
    }
    (g, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bivariate_monomials() {
        let m = monomials(2, 2);
        assert_eq!(m.len(), 6);
        assert_eq!(m[0], vec![0, 0]);
        assert!(m.contains(&vec![1, 1]) && m.contains(&vec![0, 2]));
    }

    #[test]
    fn factors_validated() {
        assert_eq!(richardson_coefficients(&[1.0, 2.0, 2.0]), Err(QemError::DuplicateRate(2.0)));
        assert!(richardson_coefficients(&[1.5, 2.0]).is_err());
        assert!(richardson_coefficients(&[1.0, 3.0, 2.0]).is_err());
    }

    #[test]
    fn hyperbolic_forward_matches_sector_sums() {
        let (m0, g, mu) = (0.7f64, 0.3f64, 0.8f64);
        let mut even = (0.0, 0.0);
        let mut odd = (0.0, 0.0);
        let mut pk = (-mu).exp();
        for k in 0..60 {
            let v = m0 * (1.0 - g).powi(k);
            if k % 2 == 0 {
                even = (even.0 + pk * v, even.1 + pk);
            } else {
                odd = (odd.0 + pk * v, odd.1 + pk);
            }
            pk *= mu / (k + 1) as f64;
        }
        let (e, o) = hyperbolic_forward(m0, g, mu);
        assert!((e - even.0 / even.1).abs() < 1e-14);
        assert!((o - odd.0 / odd.1).abs() < 1e-14);
    }
}
