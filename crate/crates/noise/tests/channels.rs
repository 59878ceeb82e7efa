use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vqlab_core::linalg;
use vqlab_core::{Angle, Circuit, DensityMatrix, GateOp, PauliSum, QuantumState, Statevector, C64};
use vqlab_noise::*;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn random_density(n: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let dim = 1usize << n;
    let a = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let m = &a * a.adjoint();
    let tr = m.trace();
    DensityMatrix::from_matrix(&(m / tr)).unwrap()
}

fn random_channel(rng: &mut ChaCha8Rng) -> QuantumChannel {
    // random Stiefel isometry split into Kraus blocks
    let k = 3;
    let a = DMatrix::from_fn(2 * k, 2, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let q = a.qr().q();
    let kraus = (0..k).map(|j| q.rows(2 * j, 2).into_owned()).collect();
    QuantumChannel::new("random", kraus).unwrap()
}

#[test]
fn depolarizing_examples() {
    let zero = DensityMatrix::zero_state(1).unwrap().to_matrix();
    let id = QuantumChannel::depolarizing(0.0).unwrap();
    assert!((id.apply_matrix(&zero) - &zero).iter().all(|z| z.norm() < 1e-15));

    // direct evaluation of (1 − 3p/4)ρ + (p/4)(XρX + YρY + ZρZ) on |0⟩⟨0|:
    // ρ₀₀ = 1 − p/2, ρ₁₁ = p/2
    for p in [0.25, 0.5, 1.0, 4.0 / 3.0] {
        let out = QuantumChannel::depolarizing(p).unwrap().apply_matrix(&zero);
        assert!((out[(0, 0)].re - (1.0 - p / 2.0)).abs() < 1e-15);
        assert!((out[(1, 1)].re - p / 2.0).abs() < 1e-15);
    }

    // p = 1 is the fully depolarizing point of this parametrisation
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rho = random_density(1, &mut rng).to_matrix();
    let full = QuantumChannel::depolarizing(1.0).unwrap().apply_matrix(&rho);
    let half = DMatrix::<C64>::identity(2, 2) * c(0.5);
    assert!((full - half).iter().all(|z| z.norm() < 1e-15));
}

#[test]
fn noiseless_model_matches_ideal_circuit() {
    let mut circ = Circuit::new(2).unwrap();
    circ.push(GateOp::h(0)).unwrap();
    circ.push(GateOp::cnot(0, 1)).unwrap();
    circ.push(GateOp::ry(2, 1, Angle::Param(0))).unwrap();
    let ideal = circ.prepare(&[0.3]).unwrap().to_density().unwrap();
    let model = NoiseModel::noiseless()
        .with_single_qubit(QuantumChannel::identity(1))
        .with_two_qubit(QuantumChannel::identity(2))
        .strict(true);
    let noisy = run_noisy(&circ, &[0.3], &model).unwrap();
    assert!(noisy.trace_distance(&ideal) < 1e-14);
}

#[test]
fn x_gate_then_depolarizing() {
    let p = 0.2;
    let circ = Circuit::new(1).unwrap().then(GateOp::x(0)).unwrap();
    let model = NoiseModel::noiseless().with_single_qubit(QuantumChannel::depolarizing(p).unwrap());
    let out = run_noisy(&circ, &[], &model).unwrap();
    assert!((out.get(1, 1).re - (1.0 - p / 2.0)).abs() < 1e-15);
    assert!((out.get(0, 0).re - p / 2.0).abs() < 1e-15);
}

#[test]
fn random_noisy_circuit_keeps_unit_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut circ = Circuit::new(3).unwrap();
    for k in 0..10 {
        let g = if k % 3 == 0 {
            GateOp::cnot(rng.random_range(0..2), 2)
        } else {
            GateOp::rx(3, rng.random_range(0..3), Angle::Fixed(rng.random_range(-3.0..3.0)))
        };
        circ.push(g).unwrap();
    }
    let model = NoiseModel::noiseless()
        .with_single_qubit(QuantumChannel::depolarizing(0.01).unwrap())
        .with_two_qubit(parse_channel("depolarizing 0.01", 2).unwrap());
    let out = run_noisy(&circ, &[], &model).unwrap();
    assert!((out.trace().re - 1.0).abs() < 1e-10);
    out.validate(1e-10).unwrap();
}

#[test]
fn lindblad_without_jumps_is_unitary() {
    let h = PauliSum::from_real_terms(&[(0.7, "XZ"), (0.4, "ZI"), (-0.2, "IY")]).unwrap();
    let sys = LindbladSystem::new(&h, vec![]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rho0 = random_density(2, &mut rng);
    let out = lindblad_evolve(&sys, &rho0, 1.3, 1e-3).unwrap();
    let u = linalg::unitary_propagator(&h.to_dense(), 1.3);
    let want = &u * rho0.to_matrix() * u.adjoint();
    assert!((out.to_matrix() - want).iter().all(|z| z.norm() < 1e-10));
}

#[test]
fn amplitude_damping_decays_at_twice_the_rate() {
    let gamma: f64 = 0.35;
    let h = PauliSum::from_real_terms(&[(0.0, "I")]).unwrap();
    let sys = LindbladSystem::new(&h, vec![lowering() * c(gamma.sqrt())]).unwrap();
    let rho0 = Statevector::basis(1, 1).unwrap().to_density().unwrap();
    let times = [0.25, 0.5, 1.0, 2.0];
    let snaps = lindblad_snapshots(&sys, &rho0, &times, 1e-3).unwrap();
    for (t, rho) in times.iter().zip(&snaps) {
        assert!((rho.get(1, 1).re - (-2.0 * gamma * t).exp()).abs() < 1e-10);
        assert!((rho.trace().re - 1.0).abs() < 1e-8);
    }
    // exact channel agrees with the integrator
    let ch = sys.channel(1.0).unwrap();
    let exact = ch.apply_matrix(&rho0.to_matrix());
    assert!((exact - snaps[2].to_matrix()).iter().all(|z| z.norm() < 1e-10));
}

#[test]
fn trajectories_without_jump_operators_are_schrodinger() {
    let h = PauliSum::from_real_terms(&[(0.8, "X"), (0.3, "Z")]).unwrap();
    let sys = LindbladSystem::new(&h, vec![]).unwrap();
    let psi0 = Statevector::zero(1).unwrap();
    let traj = sse_trajectory(&sys, &psi0, 1.0, 1e-2, 4).unwrap();
    assert!(traj.jumps.is_empty());
    let u = linalg::unitary_propagator(&h.to_dense(), 1.0);
    let want = &u * psi0.to_dvector();
    let got = traj.states.last().unwrap().to_dvector();
    assert!((got - want).iter().all(|z| z.norm() < 1e-10));
}

#[test]
fn trajectory_invariants() {
    let gamma: f64 = 0.5;
    let h = PauliSum::from_real_terms(&[(0.3, "X")]).unwrap();
    let sys = LindbladSystem::new(&h, vec![lowering() * c(gamma.sqrt())]).unwrap();
    let psi0 = Statevector::basis(1, 1).unwrap();
    for seed in 0..20 {
        let traj = sse_trajectory(&sys, &psi0, 2.0, 1e-3, seed).unwrap();
        for s in &traj.states {
            assert!((s.norm() - 1.0).abs() < 1e-12);
        }
        assert!(traj.jumps.windows(2).all(|w| w[0].0 < w[1].0));
        if traj.jumps.is_empty() {
            let drift = no_jump_state(&sys, &psi0, 1e-3, traj.times.len() - 1).unwrap();
            assert!((drift.fidelity(traj.states.last().unwrap()) - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn jump_step_bound_is_enforced() {
    let h = PauliSum::from_real_terms(&[(0.0, "I")]).unwrap();
    let sys = LindbladSystem::new(&h, vec![lowering() * c(10.0)]).unwrap();
    let psi0 = Statevector::basis(1, 1).unwrap();
    assert!(matches!(
        sse_trajectory(&sys, &psi0, 1.0, 1e-2, 0),
        Err(NoiseError::StepTooLarge { .. })
    ));
}

#[test]
fn trajectory_average_tracks_master_equation() {
    let gamma: f64 = 0.5;
    let h = PauliSum::from_real_terms(&[(0.0, "I")]).unwrap();
    let sys = LindbladSystem::new(&h, vec![lowering() * c(gamma.sqrt())]).unwrap();
    let psi0 = Statevector::basis(1, 1).unwrap();
    let dt = 1e-3;
    let steps = [250, 500, 1000];
    let avg = sse_ensemble(&sys, &psi0, dt, &steps, 3000, 77).unwrap();
    for (j, t) in avg.times.iter().enumerate() {
        let want = (-2.0 * gamma * t).exp();
        let got = avg.densities[j][(1, 1)].re;
        let se = avg.population_std_error[j][1];
        assert!((got - want).abs() < 3.0 * se + 1e-3, "t={t}: {got} vs {want} ± {se}");
    }
    let again = sse_ensemble(&sys, &psi0, dt, &steps, 3000, 77).unwrap();
    assert_eq!(avg, again);
}

#[test]
fn twirl_of_small_z_rotation() {
    let eps: f64 = 0.3;
    let u = linalg::unitary_propagator(&vqlab_core::Pauli::Z.matrix(), eps / 2.0);
    let ch = QuantumChannel::unitary("rz", u).unwrap();
    let tw = pauli_twirl(&ch).unwrap();
    let r = tw.ptm();
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                assert!(r[(i, j)].abs() < 1e-12);
            }
        }
    }
    // PTM diagonal of a Pauli channel with p_Z: X,Y entries 1 − 2p_Z
    let pz = (eps / 2.0).sin().powi(2);
    assert!((r[(1, 1)] - (1.0 - 2.0 * pz)).abs() < 1e-12);
    assert!((r[(3, 3)] - 1.0).abs() < 1e-12);
}

#[test]
fn pauli_channel_is_a_twirl_fixed_point() {
    let ch = QuantumChannel::pauli("p", 1, &[0.7, 0.1, 0.05, 0.15]).unwrap();
    let tw = pauli_twirl(&ch).unwrap();
    assert!((tw.ptm() - ch.ptm()).abs().max() < 1e-14);
    let two = parse_channel("depolarizing 0.03", 2).unwrap();
    assert!((pauli_twirl(&two).unwrap().ptm() - two.ptm()).abs().max() < 1e-14);
}

#[test]
fn boost_examples() {
    let circ = Circuit::new(2).unwrap().then(GateOp::cnot(0, 1)).unwrap();
    let once = boost_error_rate(&circ, 1.0).unwrap();
    assert_eq!(once.variants.len(), 1);
    assert_eq!(once.variants[0].2, circ);

    let p = 0.01;
    let noise = QuantumChannel::global_depolarizing(p, 2).unwrap();
    let cnot = match GateOp::cnot(0, 1) {
        GateOp::Fixed { matrix, .. } => matrix,
        _ => unreachable!(),
    };
    let three = boost_error_rate(&circ, 3.0).unwrap();
    let rate = effective_error_rate(&cnot, &noise, 1);
    assert!((rate - (1.0 - (1.0 - p).powi(3))).abs() < 1e-14);
    assert!((rate - 0.029701).abs() < 1e-12);
    assert!((three.realised_factor(&cnot, &noise) - 2.9701).abs() < 1e-10);

    // α = 2: realised factor is the mixture mean of folds 1 and 3
    let two = boost_error_rate(&circ, 2.0).unwrap();
    let mix = two.realised_factor(&cnot, &noise);
    let want = 0.5 * (1.0 + 2.9701);
    assert!((mix - want).abs() < 1e-10);
    assert!((mix - 2.0).abs() < 0.02);
}

#[test]
fn boosted_mixture_output_matches_manual_mixture() {
    let mut circ = Circuit::new(2).unwrap();
    circ.push(GateOp::h(0)).unwrap();
    circ.push(GateOp::cnot(0, 1)).unwrap();
    let model = NoiseModel::noiseless().with_two_qubit(QuantumChannel::global_depolarizing(0.05, 2).unwrap());
    let input = QuantumState::Pure(Statevector::zero(2).unwrap());
    let b = boost_error_rate(&circ, 2.0).unwrap();
    let mixed = b.run(&[], &model, &input).unwrap();
    let r1 = run_noisy_circuit(&b.variants[0].2, &[], &model, &input).unwrap();
    let r3 = run_noisy_circuit(&b.variants[1].2, &[], &model, &input).unwrap();
    assert!(mixed.trace_distance(&r1.mix(&r3, 0.5)) < 1e-14);
}

#[test]
fn infinite_scale_removes_continuous_noise_on_that_qubit() {
    let circ = Circuit::new(1)
        .unwrap()
        .then(GateOp::rx(1, 0, Angle::Fixed(0.7)))
        .unwrap();
    let cont = ContinuousNoise {
        jumps: vec![lowering() * c(0.2)],
        tau: 0.5,
    };
    let model = NoiseModel::noiseless().with_continuous(cont).with_scale(0, f64::INFINITY).unwrap();
    let out = run_noisy(&circ, &[], &model).unwrap();
    let ideal = circ.prepare(&[]).unwrap().to_density().unwrap();
    assert!(out.trace_distance(&ideal) < 1e-14);
}

#[test]
fn scaled_continuous_noise_reduces_error() {
    let circ = Circuit::new(1).unwrap().then(GateOp::x(0)).unwrap();
    let cont = ContinuousNoise {
        jumps: vec![lowering() * c(0.2)],
        tau: 0.5,
    };
    let full = run_noisy(&circ, &[], &NoiseModel::noiseless().with_continuous(cont.clone())).unwrap();
    let halved = run_noisy(
        &circ,
        &[],
        &NoiseModel::noiseless().with_continuous(cont).with_scale(0, 2.0).unwrap(),
    )
    .unwrap();
    assert!((full.get(1, 1).re - (-2.0 * 0.04 * 0.5f64).exp()).abs() < 1e-10);
    assert!((halved.get(1, 1).re - (-0.04 * 0.5f64).exp()).abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn constructed_channels_are_trace_preserving(p in 0.0f64..=1.0) {
        for ch in [
            QuantumChannel::depolarizing(p).unwrap(),
            QuantumChannel::amplitude_damping(p).unwrap(),
            QuantumChannel::phase_damping(p).unwrap(),
            QuantumChannel::bit_flip(p).unwrap(),
            QuantumChannel::global_depolarizing(p, 2).unwrap(),
            parse_channel(&format!("depolarizing {p}"), 2).unwrap(),
        ] {
            prop_assert!(ch.trace_preservation_error() < 1e-10);
        }
    }

    #[test]
    fn twirling_is_idempotent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = random_channel(&mut rng);
        let once = pauli_twirl(&ch).unwrap();
        let twice = pauli_twirl(&once).unwrap();
        prop_assert!((once.ptm() - twice.ptm()).abs().max() < 1e-12);
        let r = once.ptm();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    prop_assert!(r[(i, j)].abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lindblad_generator_is_traceless(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = PauliSum::from_real_terms(&[(rng.random_range(-1.0..1.0), "XZ"), (rng.random_range(-1.0..1.0), "YY")]).unwrap();
        let l = DMatrix::from_fn(4, 4, |_, _| C64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)));
        let sys = LindbladSystem::new(&h, vec![l]).unwrap();
        let rho = random_density(2, &mut rng).to_matrix();
        prop_assert!(sys.derivative(&rho).trace().norm() < 1e-12);
    }
}
