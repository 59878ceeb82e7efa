//! Combined mitigation pipelines evaluated on exact density matrices.

use nalgebra::DMatrix;
use serde::Serialize;
use vqlab_core::linalg::eigh;
use vqlab_core::{Circuit, DensityMatrix, PauliSum, C64};
use vqlab_noise::{NoiseModel, QuantumChannel};

use crate::error::{QemError, Result};
use crate::estimate::{Measured, MitigatedEstimate, RatePoint};
use crate::extrapolation::{
    exponential_extrapolate, hyperbolic_extrapolate, least_squares_fit, richardson, FitPoint,
};
use crate::quasi::{
    commuting_part, decompose_channel, invert_channel, mitigated_state, pauli_basis, BasisKind,
    NoiseDecompositions,
};
use crate::symmetry::{sector_values, SymmetryOperator, VerifyMode};

/// A circuit, its parameters, the noise it runs under and what is measured.
#[derive(Debug, Clone)]
pub struct NoisyExperiment {
    pub circuit: Circuit,
    pub params: Vec<f64>,
    pub noise: NoiseModel,
    pub observable: PauliSum,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Extrapolation {
    Richardson,
    /// Least-squares line through every boosted point.
    Linear,
    /// Two-point exponential; `mean_errors` is N_g·ε at the base rate.
    Exponential { mean_errors: f64 },
    /// Sector-based hyperbolic formula, μ taken from the acceptance rate.
    Hyperbolic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stage {
    /// Run at every boost factor (the first must be 1).
    Boost(Vec<f64>),
    /// Invert the noise after every gate; `partial` inverts only the errors
    /// that commute with the pipeline's symmetry.
    QuasiProbability { partial: bool },
    Symmetry { operator: SymmetryOperator, mode: VerifyMode },
    Extrapolate(Extrapolation),
}

impl Stage {
    fn rank(&self) -> usize {
        match self {
            Stage::Boost(_) => 0,
            Stage::QuasiProbability { .. } => 1,
            Stage::Symmetry { .. } => 2,
            Stage::Extrapolate(_) => 3,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Stage::Boost(_) => "boost".into(),
            Stage::QuasiProbability { partial: false } => "quasi_probability".into(),
            Stage::QuasiProbability { partial: true } => "quasi_probability_partial".into(),
            Stage::Symmetry { mode: VerifyMode::Postselect, .. } => "symmetry_postselect".into(),
            Stage::Symmetry { mode: VerifyMode::Postprocess, .. } => "symmetry_postprocess".into(),
            Stage::Extrapolate(Extrapolation::Richardson) => "richardson".into(),
            Stage::Extrapolate(Extrapolation::Linear) => "linear".into(),
            Stage::Extrapolate(Extrapolation::Exponential { .. }) => "exponential".into(),
            Stage::Extrapolate(Extrapolation::Hyperbolic) => "hyperbolic".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub stage: String,
    /// Value after this stage at each boost factor.
    pub values: Vec<f64>,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinedEstimate {
    pub estimate: MitigatedEstimate,
    pub rates: Vec<f64>,
    pub stages: Vec<StageReport>,
}

struct Plan<'a> {
    factors: Vec<f64>,
    qp: Option<bool>,
    symmetry: Option<(&'a SymmetryOperator, VerifyMode)>,
    extrapolation: Option<&'a Extrapolation>,
}

/// Check stage order and mutual requirements.
fn plan(strategy: &[Stage]) -> Result<Plan<'_>> {
    let bad = |m: &str| Err(QemError::IncompatibleStage(m.to_string()));
    if strategy.windows(2).any(|w| w[1].rank() <= w[0].rank()) {
        return bad("stages must appear once each, in the order boost, quasi-probability, symmetry, extrapolate");
    }
    let mut p = Plan {
        factors: vec![1.0],
        qp: None,
        symmetry: None,
        extrapolation: None,
    };
    for s in strategy {
        match s {
            Stage::Boost(f) => p.factors = f.clone(),
            Stage::QuasiProbability { partial } => p.qp = Some(*partial),
            Stage::Symmetry { operator, mode } => p.symmetry = Some((operator, *mode)),
            Stage::Extrapolate(e) => p.extrapolation = Some(e),
        }
    }
    crate::extrapolation::richardson_coefficients(&p.factors)?;
    let rates = p.factors.len();
    match p.extrapolation {
        None if rates > 1 => return bad("boosted runs need an extrapolation stage"),
        Some(Extrapolation::Hyperbolic) => {
            if p.symmetry.is_none() {
                return bad("hyperbolic extrapolation needs a symmetry stage");
            }
            if rates > 1 {
                return bad("hyperbolic extrapolation uses the unboosted run only");
            }
        }
        Some(Extrapolation::Exponential { .. }) if rates != 2 => {
            return bad("exponential extrapolation needs exactly two boost factors");
        }
        Some(Extrapolation::Richardson | Extrapolation::Linear) if rates < 2 => {
            return bad("extrapolation needs at least two effective noise rates");
        }
        _ => {}
    }
    if p.qp == Some(true) && p.symmetry.is_none() {
        return bad("partial quasi-probability needs a symmetry stage");
    }
    Ok(p)
}

/// Choi matrix of a row-major superoperator.
fn choi(s: &DMatrix<C64>) -> DMatrix<C64> {
    let d2 = s.nrows();
    let d = (d2 as f64).sqrt().round() as usize;
    let mut c = DMatrix::zeros(d2, d2);
    for i in 0..d {
        for j in 0..d {
            for a in 0..d {
                for b in 0..d {
                    c[(i * d + a, j * d + b)] = s[(a * d + b, i * d + j)];
                }
            }
        }
    }
    c
}

/// (1 − α)·id + α·E. Fails when the result is not completely positive.
pub fn boost_channel(channel: &QuantumChannel, alpha: f64) -> Result<QuantumChannel> {
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(QemError::InvalidFactor(alpha));
    }
    if alpha == 1.0 {
        return Ok(channel.clone());
    }
    let s = channel.superoperator();
    let d2 = s.nrows();
    let boosted = DMatrix::<C64>::identity(d2, d2) * C64::new(1.0 - alpha, 0.0) + s * C64::new(alpha, 0.0);
    let (vals, _) = eigh(&choi(&boosted));
    if vals[0] < -1e-10 {
        return Err(QemError::InvalidFactor(alpha));
    }
    Ok(QuantumChannel::from_superoperator(channel.label(), &boosted)?)
}

/// Noise model with every discrete channel boosted by α and the continuous
/// noise run for ατ. Readout errors are left alone.
pub fn boost_noise(noise: &NoiseModel, alpha: f64) -> Result<NoiseModel> {
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(QemError::InvalidFactor(alpha));
    }
    let mut out = noise.clone();
    if alpha == 1.0 {
        return Ok(out);
    }
    if let Some(ch) = &noise.single_qubit {
        out.single_qubit = Some(boost_channel(ch, alpha)?);
    }
    if let Some(ch) = &noise.two_qubit {
        out.two_qubit = Some(boost_channel(ch, alpha)?);
    }
    for (name, ch) in &noise.by_name {
        out.by_name.insert(name.clone(), boost_channel(ch, alpha)?);
    }
    if let Some(c) = &mut out.continuous {
        c.tau *= alpha;
    }
    Ok(out)
}

fn decompositions(
    exp: &NoisyExperiment,
    noise: &NoiseModel,
    partial: bool,
    symmetry: Option<&SymmetryOperator>,
) -> Result<NoiseDecompositions> {
    noise
        .circuit_noise(&exp.circuit)?
        .iter()
        .map(|slots| {
            slots
                .iter()
                .map(|(ch, targets)| match (partial, symmetry) {
                    (true, Some(sym)) => {
                        let kept = commuting_part(ch, targets, sym.pauli())?;
                        invert_channel(&kept, &pauli_basis(ch.n_qubits()))
                    }
                    _ => decompose_channel(ch, BasisKind::Auto),
                })
                .collect()
        })
        .collect()
}

fn noisy_state(exp: &NoisyExperiment, noise: &NoiseModel) -> Result<DensityMatrix> {
    Ok(vqlab_noise::run_noisy(&exp.circuit, &exp.params, noise)?)
}

/// Run the stages in order on exact density matrices. γ multiplies across
/// stages; each stage's values are reported per boost factor.
pub fn combine(exp: &NoisyExperiment, strategy: &[Stage]) -> Result<CombinedEstimate> {
    let plan = plan(strategy)?;
    exp.observable.ensure_hermitian()?;
    if let Some((sym, _)) = plan.symmetry {
        sym.check_commutes(&exp.observable)?;
    }
    let sym = plan.symmetry.map(|s| s.0);
    let mut stages = Vec::new();
    let mut raw = Vec::new();
    let mut after_qp = Vec::new();
    let mut qp_gamma: f64 = 1.0;
    let mut sectors = Vec::new();
    let mut sym_gamma: f64 = 1.0;
    for &alpha in &plan.factors {
        let noise = boost_noise(&exp.noise, alpha)?;
        let rho = noisy_state(exp, &noise)?;
        raw.push(exp.observable.trace_with(rho.data()).re);
        let rho = match plan.qp {
            Some(partial) => {
                let dec = decompositions(exp, &noise, partial, sym)?;
                let c: f64 = dec.iter().flatten().map(|d| d.cost()).product();
                qp_gamma = qp_gamma.max(c * c);
                let m = mitigated_state(&exp.circuit, &exp.params, &noise, &exp.observable, &dec)?;
                after_qp.push(exp.observable.trace_with(m.data()).re);
                m
            }
            None => rho,
        };
        if let Some((op, mode)) = plan.symmetry {
            let s = sector_values(&rho, op, &exp.observable)?;
            if !(s.acceptance >= 1e-12) {
                return Err(QemError::LowAcceptance(s.acceptance));
            }
            let g = match mode {
                VerifyMode::Postselect => 1.0 / s.acceptance,
                VerifyMode::Postprocess => 1.0 / (s.acceptance * s.acceptance),
            };
            sym_gamma = sym_gamma.max(g);
            sectors.push(s);
        }
    }
    for s in strategy {
        match s {
            Stage::Boost(_) => stages.push(StageReport {
                stage: s.name(),
                values: raw.clone(),
                gamma: 1.0,
            }),
            Stage::QuasiProbability { .. } => stages.push(StageReport {
                stage: s.name(),
                values: after_qp.clone(),
                gamma: qp_gamma,
            }),
            Stage::Symmetry { .. } => stages.push(StageReport {
                stage: s.name(),
                values: sectors.iter().map(|s| s.expected).collect(),
                gamma: sym_gamma,
            }),
            Stage::Extrapolate(_) => {}
        }
    }
    let values: Vec<f64> = stages.last().map(|s| s.values.clone()).unwrap_or_else(|| raw.clone());
    let gamma_before: f64 = stages.iter().map(|s| s.gamma).product();

    let mut estimate = match plan.extrapolation {
        None => MitigatedEstimate::new("unmitigated", values[0], 0.0, 1.0, values.clone()),
        Some(Extrapolation::Richardson) => {
            let pts: Vec<RatePoint> = plan
                .factors
                .iter()
                .zip(&values)
                .map(|(&a, &v)| RatePoint::new(a, v))
                .collect();
            richardson(&pts)?
        }
        Some(Extrapolation::Linear) => {
            let pts: Vec<FitPoint> = plan
                .factors
                .iter()
                .zip(&values)
                .map(|(&a, &v)| FitPoint::new(vec![a], v))
                .collect();
            least_squares_fit(&pts, 1)?.estimate
        }
        Some(Extrapolation::Exponential { mean_errors }) => exponential_extrapolate(
            *mean_errors,
            plan.factors[1],
            Measured::exact(values[0]),
            Measured::exact(values[1]),
            1.0,
        )?,
        Some(Extrapolation::Hyperbolic) => {
            let s = sectors[0];
            if !(s.acceptance > 0.5) {
                return Err(QemError::NegativeRadicand(2.0 * s.acceptance - 1.0));
            }
            let mu = -0.5 * (2.0 * s.acceptance - 1.0).ln();
            hyperbolic_extrapolate(Measured::exact(s.expected), Measured::exact(s.opposite), mu)?
        }
    };
    if let Some(e) = plan.extrapolation {
        let name = Stage::Extrapolate(e.clone()).name();
        stages.push(StageReport {
            stage: name,
            values: vec![estimate.value],
            gamma: estimate.gamma,
        });
    }
    let method: Vec<String> = stages.iter().map(|s| s.stage.clone()).collect();
    estimate.method = if method.is_empty() {
        "unmitigated".into()
    } else {
        method.join("+")
    };
    estimate.gamma *= gamma_before;
    estimate.inputs = raw;
    if let Some(s) = sectors.first() {
        estimate = estimate.with_detail("acceptance", s.acceptance);
    }
    Ok(CombinedEstimate {
        estimate,
        rates: plan.factors,
        stages,
    })
}
