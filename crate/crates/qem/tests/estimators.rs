use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vqlab_core::ansatz::hardware_efficient;
use vqlab_core::linalg::eigh;
use vqlab_core::{Angle, Circuit, DensityMatrix, GateOp, PauliString, PauliSum, Statevector, C64};
use vqlab_noise::{ConfusionMatrix, ContinuousNoise, NoiseModel, QuantumChannel};
use vqlab_qem::*;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn random_density(n: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let d = 1 << n;
    let a = DMatrix::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let m = &a * a.adjoint();
    let tr = m.trace();
    DensityMatrix::from_matrix(&(m / tr)).unwrap()
}

fn dense_expectation(h: &DMatrix<C64>, rho: &DMatrix<C64>) -> f64 {
    (h * rho).trace().re
}

// ---------- symmetry verification

#[test]
fn state_in_sector_is_untouched() {
    let sym = SymmetryOperator::new("ZZ".parse().unwrap(), 1).unwrap();
    let h = PauliSum::from_real_terms(&[(1.0, "ZZ"), (0.4, "XX"), (-0.2, "ZI")]).unwrap();
    let psi = Statevector::from_amplitudes(vec![c(0.6), c(0.0), c(0.0), C64::new(0.0, 0.8)]).unwrap();
    let rho = psi.to_density().unwrap();
    for mode in [VerifyMode::Postselect, VerifyMode::Postprocess] {
        let r = symmetry_verify(&rho, &sym, &h, mode).unwrap();
        let raw = dense_expectation(&h.to_dense(), &rho.to_matrix());
        assert!((r.value - raw).abs() < 1e-12);
        assert!((r.detail("acceptance").unwrap() - 1.0).abs() < 1e-12);
        assert!((r.gamma - 1.0).abs() < 1e-12);
    }
}

#[test]
fn wrong_sector_half_is_removed() {
    let sym = SymmetryOperator::new("ZZ".parse().unwrap(), 1).unwrap();
    let h = PauliSum::from_real_terms(&[(1.0, "ZZ"), (0.4, "XX"), (-0.2, "ZI")]).unwrap();
    let good = Statevector::from_amplitudes(vec![c(0.6), c(0.0), c(0.0), c(0.8)]).unwrap();
    let bad = Statevector::from_amplitudes(vec![c(0.0), c(1.0), c(0.0), c(0.0)]).unwrap();
    let rg = good.to_density().unwrap();
    let rho = rg.mix(&bad.to_density().unwrap(), 0.5);
    let want = dense_expectation(&h.to_dense(), &rg.to_matrix());
    for mode in [VerifyMode::Postselect, VerifyMode::Postprocess] {
        let r = symmetry_verify(&rho, &sym, &h, mode).unwrap();
        assert!((r.value - want).abs() < 1e-12);
        assert!((r.detail("acceptance").unwrap() - 0.5).abs() < 1e-12);
    }
    let s = sector_values(&rho, &sym, &h).unwrap();
    let wrong = dense_expectation(&h.to_dense(), &bad.to_density().unwrap().to_matrix());
    assert!((s.opposite - wrong).abs() < 1e-12);
}

#[test]
fn postprocess_equals_postselect() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let n = rng.random_range(2..=3);
        let all = PauliString::all(n);
        let p = all[rng.random_range(1..all.len())].clone();
        let sector = if rng.random::<bool>() { 1 } else { -1 };
        let sym = SymmetryOperator::new(p.clone(), sector).unwrap();
        let commuting: Vec<&PauliString> = all.iter().filter(|q| q.commutes_with(&p)).collect();
        let mut h = PauliSum::zero(n);
        for _ in 0..4 {
            let q = commuting[rng.random_range(0..commuting.len())];
            h.push(c(rng.random_range(-1.0..1.0)), q.clone());
        }
        let rho = random_density(n, &mut rng);
        let a = symmetry_verify(&rho, &sym, &h, VerifyMode::Postselect).unwrap();
        let b = symmetry_verify(&rho, &sym, &h, VerifyMode::Postprocess).unwrap();
        assert!((a.value - b.value).abs() < 1e-10, "{} vs {}", a.value, b.value);
        assert!(a.gamma >= 1.0 && b.gamma >= a.gamma);
    }
}

#[test]
fn symmetry_errors() {
    let h = PauliSum::from_real_terms(&[(1.0, "XI")]).unwrap();
    let sym = SymmetryOperator::new("ZZ".parse().unwrap(), 1).unwrap();
    let rho = DensityMatrix::zero_state(2).unwrap();
    assert!(matches!(
        symmetry_verify(&rho, &sym, &h, VerifyMode::Postprocess),
        Err(QemError::NonCommuting(_))
    ));
    let zz = PauliSum::from_real_terms(&[(1.0, "ZZ")]).unwrap();
    let odd = SymmetryOperator::new("ZZ".parse().unwrap(), -1).unwrap();
    assert!(matches!(
        symmetry_verify(&rho, &odd, &zz, VerifyMode::Postselect),
        Err(QemError::LowAcceptance(_))
    ));
    assert!(SymmetryOperator::new("II".parse().unwrap(), 1).is_err());
    assert!(SymmetryOperator::new("ZZ".parse().unwrap(), 0).is_err());
}

// ---------- subspace expansion

#[test]
fn qse_keeps_exact_ground_state() {
    let h = PauliSum::from_real_terms(&[(1.0, "ZZ"), (0.5, "XI"), (0.5, "IX")]).unwrap();
    let (vals, vecs) = eigh(&h.to_dense());
    let g = Statevector::from_amplitudes(vecs.column(0).iter().copied().collect()).unwrap();
    let rho = g.to_density().unwrap();
    let s: Vec<PauliString> = ["II", "XI", "ZZ", "YY"].iter().map(|t| t.parse().unwrap()).collect();
    let r = qse_mitigate(&rho, &h, &s).unwrap();
    assert!((r.value - vals[0]).abs() < 1e-10);
    assert!(r.gamma >= 1.0);
}

#[test]
fn qse_corrects_coherent_over_rotation() {
    // |ψ⟩ = Ry(0.3)|1⟩; with S = {I, Z}: H̃ = [[z, 1], [1, z]], S̃ = [[1, z], [z, 1]],
    // whose pencil roots are exactly ±1
    let h = PauliSum::from_real_terms(&[(1.0, "Z")]).unwrap();
    let t: f64 = 0.3;
    let psi = Statevector::from_amplitudes(vec![c(-(t / 2.0).sin()), c((t / 2.0).cos())]).unwrap();
    let rho = psi.to_density().unwrap();
    let s: Vec<PauliString> = ["I", "Z"].iter().map(|t| t.parse().unwrap()).collect();
    let r = qse_mitigate(&rho, &h, &s).unwrap();
    assert!((r.value + 1.0).abs() < 1e-10, "{}", r.value);
    assert!(r.inputs[0] > -1.0 + 1e-3);
}

#[test]
fn qse_with_identity_only_sees_depolarized_energy() {
    let h = PauliSum::from_real_terms(&[(1.0, "ZZ"), (0.5, "XI"), (0.5, "IX"), (0.3, "II")]).unwrap();
    let (vals, vecs) = eigh(&h.to_dense());
    let g = Statevector::from_amplitudes(vecs.column(0).iter().copied().collect()).unwrap();
    let p = 0.2;
    let rho = g.to_density().unwrap().mix(&DensityMatrix::maximally_mixed(2).unwrap(), p);
    let r = qse_mitigate(&rho, &h, &["II".parse().unwrap()]).unwrap();
    let want = (1.0 - p) * vals[0] + p * 0.3;
    assert!((r.value - want).abs() < 1e-10);
    assert!(r.value > vals[0] + 0.1);
}

#[test]
fn qse_requires_identity() {
    let h = PauliSum::from_real_terms(&[(1.0, "Z")]).unwrap();
    let rho = DensityMatrix::zero_state(1).unwrap();
    assert!(matches!(
        qse_mitigate(&rho, &h, &["Z".parse().unwrap()]),
        Err(QemError::Solver(_))
    ));
}

// ---------- readout mitigation

#[test]
fn identity_confusion() {
    let p = [0.1, 0.2, 0.3, 0.4];
    let r = mitigate_measurement(&p, &ConfusionMatrix::identity(2)).unwrap();
    for (a, b) in r.probabilities.iter().zip(p) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn two_outcome_inversion() {
    let n = ConfusionMatrix::from_row_major(2, &[0.9, 0.2, 0.1, 0.8]).unwrap();
    let noisy = n.apply(&[1.0, 0.0]);
    assert!((noisy[0] - 0.9).abs() < 1e-15);
    let r = mitigate_measurement(&noisy, &n).unwrap();
    assert_eq!(r.method, MeasurementMethod::Inverse);
    assert!((r.probabilities[0] - 1.0).abs() < 1e-12 && r.probabilities[1].abs() < 1e-12);
}

#[test]
fn outside_image_cone_is_projected() {
    let n = ConfusionMatrix::from_row_major(2, &[0.9, 0.2, 0.1, 0.8]).unwrap();
    let noisy = [0.97, 0.03];
    let r = mitigate_measurement(&noisy, &n).unwrap();
    assert_eq!(r.method, MeasurementMethod::Constrained);
    assert!(r.probabilities.iter().all(|v| *v >= 0.0));
    assert!((r.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    // fine grid over the simplex
    let mut best = f64::INFINITY;
    for i in 0..=100_000 {
        let t = i as f64 / 100_000.0;
        let q = n.apply(&[1.0 - t, t]);
        best = best.min(((q[0] - noisy[0]).powi(2) + (q[1] - noisy[1]).powi(2)).sqrt());
    }
    assert!(r.residual <= best + 1e-9, "{} vs {best}", r.residual);
}

#[test]
fn readout_errors() {
    let singular = ConfusionMatrix::from_flip_rates(&[0.5], &[0.5]).unwrap();
    assert!(matches!(mitigate_measurement(&[0.5, 0.5], &singular), Err(QemError::SingularConfusion(_))));
    let n = ConfusionMatrix::identity(1);
    assert!(matches!(mitigate_measurement(&[0.5, 0.6], &n), Err(QemError::InvalidDistribution(_))));
    assert!(matches!(mitigate_measurement(&[1.2, -0.2], &n), Err(QemError::InvalidDistribution(_))));
}

proptest! {
    #[test]
    fn readout_output_is_a_distribution(
        flips in prop::collection::vec((0.0f64..0.3, 0.0f64..0.3), 1..=3),
        raw in prop::collection::vec(0.0f64..1.0, 8),
    ) {
        let n = flips.len();
        let (p10, p01): (Vec<f64>, Vec<f64>) = flips.into_iter().unzip();
        let conf = ConfusionMatrix::from_flip_rates(&p10, &p01).unwrap();
        let dim = 1 << n;
        let total: f64 = raw[..dim].iter().sum::<f64>() + 1e-9;
        let p: Vec<f64> = raw[..dim].iter().map(|v| (v + 1e-9 / dim as f64) / total).collect();
        let r = mitigate_measurement(&p, &conf).unwrap();
        prop_assert!(r.probabilities.iter().all(|v| *v >= 0.0));
        prop_assert!((r.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

// ---------- Clifford data regression

fn one_qubit_circuit() -> Circuit {
    let mut c = Circuit::new(1).unwrap().with_params(3);
    c.push(GateOp::ry(1, 0, Angle::Param(0))).unwrap();
    c.push(GateOp::rz(1, 0, Angle::Param(1))).unwrap();
    c.push(GateOp::ry(1, 0, Angle::Param(2))).unwrap();
    c
}

#[test]
fn cdr_without_noise_is_identity() {
    let circ = one_qubit_circuit();
    let p = [0.4, 1.0, -0.3];
    let obs = PauliSum::from_real_terms(&[(1.0, "Z")]).unwrap();
    let fit = clifford_data_regression(&circ, &p, &NoiseModel::noiseless(), &obs, &CdrOptions::default()).unwrap();
    assert!((fit.slope - 1.0).abs() < 1e-12 && fit.intercept.abs() < 1e-12);
    assert!((fit.estimate.value - fit.estimate.inputs[0]).abs() < 1e-12);
}

#[test]
fn cdr_undoes_uniform_shrinking() {
    // single-qubit depolarizing commutes with every gate, so ⟨Z⟩ shrinks by
    // λ = (1 − p)³ on every circuit
    let circ = one_qubit_circuit();
    let p = [0.4, 1.0, -0.3];
    let obs = PauliSum::from_real_terms(&[(1.0, "Z")]).unwrap();
    let dep = 0.05;
    let noise = NoiseModel::noiseless().with_single_qubit(QuantumChannel::depolarizing(dep).unwrap());
    let fit = clifford_data_regression(&circ, &p, &noise, &obs, &CdrOptions::default()).unwrap();
    let lambda = (1.0f64 - dep).powi(3);
    assert!((fit.slope - 1.0 / lambda).abs() < 1e-10);
    assert!(fit.intercept.abs() < 1e-10);
    let ideal = obs.expectation_complex(circ.prepare(&p).unwrap().amplitudes()).re;
    assert!((fit.estimate.value - ideal).abs() < 1e-10);
}

#[test]
fn cdr_beats_raw_on_random_circuits() {
    let circ = hardware_efficient(2, 1).unwrap();
    let obs = PauliSum::from_real_terms(&[(1.0, "ZZ"), (0.5, "ZI")]).unwrap();
    let noise = NoiseModel::noiseless()
        .with_single_qubit(QuantumChannel::depolarizing(0.02).unwrap())
        .with_two_qubit(QuantumChannel::depolarizing(0.02).unwrap().tensor(&QuantumChannel::depolarizing(0.02).unwrap()).unwrap());
    let mut wins = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p: Vec<f64> = (0..circ.n_params()).map(|_| rng.random_range(-PI..PI)).collect();
        let ideal = obs.expectation_complex(circ.prepare(&p).unwrap().amplitudes()).re;
        let opts = CdrOptions {
            seed,
            ..CdrOptions::default()
        };
        // a degenerate training draw counts as a loss
        let Ok(fit) = clifford_data_regression(&circ, &p, &noise, &obs, &opts) else {
            continue;
        };
        if (fit.estimate.value - ideal).abs() < (fit.estimate.inputs[0] - ideal).abs() {
            wins += 1;
        }
    }
    assert!(wins >= 90, "{wins}/100");
}

#[test]
fn cdr_degenerate_training() {
    let circ = Circuit::new(1).unwrap().then(GateOp::h(0)).unwrap();
    let obs = PauliSum::from_real_terms(&[(1.0, "X")]).unwrap();
    let noise = NoiseModel::noiseless().with_single_qubit(QuantumChannel::depolarizing(0.05).unwrap());
    assert_eq!(
        clifford_data_regression(&circ, &[], &noise, &obs, &CdrOptions::default()).unwrap_err(),
        QemError::DegenerateTraining
    );
}

// ---------- individual error reduction

fn damping(tau: f64) -> NoiseModel {
    let lower = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
    let dephase = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(-0.5)]);
    NoiseModel::noiseless().with_continuous(ContinuousNoise {
        jumps: vec![lower, dephase],
        tau,
    })
}

fn ier_circuit() -> (Circuit, Vec<f64>, PauliSum) {
    let circ = hardware_efficient(2, 1).unwrap();
    let p: Vec<f64> = (0..circ.n_params()).map(|k| 0.37 * k as f64 - 0.9).collect();
    let obs = PauliSum::from_real_terms(&[(1.0, "ZZ"), (0.6, "XI"), (-0.4, "IY")]).unwrap();
    (circ, p, obs)
}

fn ideal_of(circ: &Circuit, p: &[f64], obs: &PauliSum) -> f64 {
    obs.expectation_complex(circ.prepare(p).unwrap().amplitudes()).re
}

#[test]
fn ier_noise_free() {
    let (circ, p, obs) = ier_circuit();
    let r = individual_error_reduction(&circ, &p, &NoiseModel::noiseless(), &obs, &[2.0, 3.0]).unwrap();
    assert!((r.value - ideal_of(&circ, &p, &obs)).abs() < 1e-12);
    assert!((r.value - r.inputs[0]).abs() < 1e-12);
}

#[test]
fn ier_single_qubit_infinite_divisor_is_exact() {
    let lower = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
    let noise = NoiseModel::noiseless().with_continuous(ContinuousNoise {
        jumps: vec![lower],
        tau: 0.2,
    });
    let circ = one_qubit_circuit();
    let p = [0.4, 1.0, -0.3];
    let obs = PauliSum::from_real_terms(&[(1.0, "Z"), (0.5, "X")]).unwrap();
    let r = individual_error_reduction(&circ, &p, &noise, &obs, &[f64::INFINITY]).unwrap();
    assert!((r.value - ideal_of(&circ, &p, &obs)).abs() < 1e-12);
    assert!((r.inputs[0] - r.value).abs() > 1e-3);
    assert!((r.gamma - 1.0).abs() < 1e-15);
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn ier_bias_is_second_order() {
    let (circ, p, obs) = ier_circuit();
    let ideal = ideal_of(&circ, &p, &obs);
    let taus: Vec<f64> = (0..5).map(|k| 1e-3 * 10f64.powf(k as f64 / 2.0)).collect();
    let (mut lt, mut lraw, mut lmit) = (Vec::new(), Vec::new(), Vec::new());
    for &tau in &taus {
        let r = individual_error_reduction(&circ, &p, &damping(tau), &obs, &[2.0, 4.0]).unwrap();
        lt.push(tau.ln());
        lraw.push((r.inputs[0] - ideal).abs().ln());
        lmit.push((r.value - ideal).abs().ln());
    }
    let s_raw = slope(&lt, &lraw);
    let s_mit = slope(&lt, &lmit);
    assert!((s_raw - 1.0).abs() < 0.3, "raw slope {s_raw}");
    assert!((s_mit - 2.0).abs() < 0.3, "mitigated slope {s_mit}");
}

#[test]
fn ier_rejects_small_divisor() {
    let (circ, p, obs) = ier_circuit();
    assert_eq!(
        individual_error_reduction(&circ, &p, &damping(0.01), &obs, &[2.0, 1.0]).unwrap_err(),
        QemError::InvalidDivisor { qubit: 1, value: 1.0 }
    );
}
