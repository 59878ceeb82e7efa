use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vqlab_core::ansatz::hardware_efficient;
use vqlab_core::linalg::eigh;
use vqlab_core::models::transverse_ising;
use vqlab_core::{PauliString, PauliSum, ShotSettings};
use vqlab_noise::{NoiseModel, QuantumChannel};
use vqlab_qem::*;
use vqlab_solvers::{vqe, OptimizerConfig};

struct Instance {
    exp: NoisyExperiment,
    ideal: f64,
    symmetry: SymmetryOperator,
}

fn ising_vqe() -> (vqlab_core::Circuit, Vec<f64>, PauliSum, f64) {
    let h = transverse_ising(2, 1.0, 0.5).unwrap();
    let circ = hardware_efficient(2, 1).unwrap();
    let x0: Vec<f64> = (0..circ.n_params()).map(|k| 0.1 * (k as f64 + 1.0)).collect();
    let cfg = OptimizerConfig {
        restarts: 4,
        seed: 3,
        ..OptimizerConfig::default()
    };
    let r = vqe(&h, &circ, &x0, &cfg).unwrap();
    (circ, r.params, h, r.energy)
}

fn instances(count: u64) -> Vec<Instance> {
    let (circ, params, h, energy) = ising_vqe();
    let (vals, _) = eigh(&h.to_dense());
    assert!((energy - vals[0]).abs() < 1e-6, "VQE reached {energy}, ground {}", vals[0]);
    let xx: PauliString = "XX".parse().unwrap();
    let psi = circ.prepare(&params).unwrap();
    let sector = xx.expectation(psi.amplitudes()).re;
    assert!((sector.abs() - 1.0).abs() < 1e-6);
    let symmetry = SymmetryOperator::new(xx, sector.signum() as i8).unwrap();
    (0..count)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut probs = [0.0; 4];
            for p in probs.iter_mut().skip(1) {
                *p = rng.random_range(0.003..0.02);
            }
            probs[0] = 1.0 - probs[1..].iter().sum::<f64>();
            let one = QuantumChannel::pauli("pauli", 1, &probs).unwrap();
            let noise = NoiseModel::noiseless()
                .with_single_qubit(one.clone())
                .with_two_qubit(one.tensor(&one).unwrap());
            Instance {
                exp: NoisyExperiment {
                    circuit: circ.clone(),
                    params: params.clone(),
                    noise,
                    observable: h.clone(),
                },
                ideal: energy,
                symmetry: symmetry.clone(),
            }
        })
        .collect()
}

fn sym(i: &Instance) -> Stage {
    Stage::Symmetry {
        operator: i.symmetry.clone(),
        mode: VerifyMode::Postselect,
    }
}

fn bias(i: &Instance, strategy: &[Stage]) -> f64 {
    (combine(&i.exp, strategy).unwrap().estimate.value - i.ideal).abs()
}

fn partial_qp() -> Stage {
    Stage::QuasiProbability { partial: true }
}

fn hyperbolic() -> Stage {
    Stage::Extrapolate(Extrapolation::Hyperbolic)
}

#[test]
fn symmetry_with_linear_extrapolation_beats_symmetry_alone() {
    for i in instances(20) {
        let s = bias(&i, &[sym(&i)]);
        let sl = bias(
            &i,
            &[Stage::Boost(vec![1.0, 2.0]), sym(&i), Stage::Extrapolate(Extrapolation::Linear)],
        );
        assert!(sl < s, "{sl} vs {s}");
    }
}

#[test]
fn three_stage_pipeline_beats_each_pair() {
    for i in instances(20) {
        let all = bias(&i, &[partial_qp(), sym(&i), hyperbolic()]);
        let qs = bias(&i, &[partial_qp(), sym(&i)]);
        let sh = bias(&i, &[sym(&i), hyperbolic()]);
        assert!(all < qs && all < sh, "{all} vs {qs}, {sh}");
    }
}

#[test]
fn full_quasi_probability_stage_matches_estimator() {
    let i = instances(1).pop().unwrap();
    let out = combine(&i.exp, &[Stage::QuasiProbability { partial: false }]).unwrap();
    let e = &i.exp;
    let dec = decompose_noise(&e.circuit, &e.noise, BasisKind::Auto).unwrap();
    let mean = quasi_probability_mean(&e.circuit, &e.params, &e.noise, &e.observable, &dec).unwrap();
    assert!((out.estimate.value - mean).abs() < 1e-12);
    assert!((out.estimate.value - i.ideal).abs() < 1e-10);
    let mc = quasi_probability_estimate(&e.circuit, &e.params, &e.noise, &e.observable, &dec, &ShotSettings::new(20_000, 4))
        .unwrap();
    assert!((mc.value - mean).abs() < 3.0 * mc.std_error);
    assert!((mc.gamma - out.estimate.gamma).abs() < 1e-9 * mc.gamma);
}

#[test]
fn gamma_composes_across_stages() {
    let i = instances(1).pop().unwrap();
    let out = combine(&i.exp, &[partial_qp(), sym(&i), hyperbolic()]).unwrap();
    assert_eq!(out.stages.len(), 3);
    let product: f64 = out.stages.iter().map(|s| s.gamma).product();
    assert!((out.estimate.gamma - product).abs() < 1e-12 * product);
    assert!(out.stages.iter().all(|s| s.gamma >= 1.0));
    assert_eq!(out.estimate.method, "quasi_probability_partial+symmetry_postselect+hyperbolic");
}

#[test]
fn richardson_and_exponential_pipelines() {
    let i = instances(1).pop().unwrap();
    let raw = bias(&i, &[]);
    let ric = combine(
        &i.exp,
        &[Stage::Boost(vec![1.0, 1.5, 2.0]), Stage::Extrapolate(Extrapolation::Richardson)],
    )
    .unwrap();
    assert_eq!(ric.stages[0].values.len(), 3);
    assert!((ric.estimate.value - i.ideal).abs() < raw);
    // boosted values must move away from the ideal
    let v = &ric.stages[0].values;
    assert!((v[2] - i.ideal).abs() > (v[0] - i.ideal).abs());
    let exp = combine(
        &i.exp,
        &[
            Stage::Boost(vec![1.0, 2.0]),
            Stage::Extrapolate(Extrapolation::Exponential { mean_errors: 0.3 }),
        ],
    )
    .unwrap();
    assert!(exp.estimate.value.is_finite() && exp.estimate.gamma > 1.0);
}

#[test]
fn pipeline_validation() {
    let i = instances(1).pop().unwrap();
    let bad = [
        vec![sym(&i), partial_qp()],
        vec![hyperbolic()],
        vec![Stage::Boost(vec![1.0, 2.0])],
        vec![Stage::Boost(vec![1.0, 2.0, 3.0]), Stage::Extrapolate(Extrapolation::Exponential { mean_errors: 0.1 })],
        vec![Stage::Boost(vec![1.0, 2.0]), sym(&i), hyperbolic()],
    ];
    for s in bad {
        assert!(matches!(combine(&i.exp, &s), Err(QemError::IncompatibleStage(_))), "{s:?}");
    }
    let dup = [Stage::Boost(vec![1.0, 2.0, 2.0]), Stage::Extrapolate(Extrapolation::Richardson)];
    assert_eq!(combine(&i.exp, &dup).unwrap_err(), QemError::DuplicateRate(2.0));
}

#[test]
fn empty_pipeline_is_raw() {
    let i = instances(1).pop().unwrap();
    let out = combine(&i.exp, &[]).unwrap();
    let rho = vqlab_noise::run_noisy(&i.exp.circuit, &i.exp.params, &i.exp.noise).unwrap();
    let raw = i.exp.observable.trace_with(rho.data()).re;
    assert!((out.estimate.value - raw).abs() < 1e-14);
    assert_eq!(out.estimate.gamma, 1.0);
}

#[test]
fn boosted_continuous_noise_runs_longer() {
    let mut noise = NoiseModel::noiseless();
    noise.continuous = Some(vqlab_noise::ContinuousNoise {
        jumps: vec![vqlab_noise::lowering()],
        tau: 0.1,
    });
    let b = boost_noise(&noise, 3.0).unwrap();
    assert!((b.continuous.unwrap().tau - 0.3).abs() < 1e-15);
    assert_eq!(boost_noise(&noise, 0.5).unwrap_err(), QemError::InvalidFactor(0.5));
}

#[test]
fn estimate_serialises() {
    let r = richardson(&[RatePoint::new(1.0, 0.9), RatePoint::new(2.0, 0.8)]).unwrap();
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    for key in ["method", "value", "std_error", "gamma", "inputs"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["method"], "richardson");
}
