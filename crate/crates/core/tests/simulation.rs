use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vqlab_core::fermion::{jordan_wigner, LadderKind};
use vqlab_core::linalg;
use vqlab_core::trotter::trotterize;
use vqlab_core::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> Statevector {
    let amps = (0..1usize << n)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    Statevector::normalised(amps).unwrap()
}

fn random_density(n: usize, rank: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let dim = 1usize << n;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    let weights: Vec<f64> = (0..rank).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in weights {
        let v = random_state(n, rng).to_dvector();
        m += &v * v.adjoint() * c(w / total, 0.0);
    }
    DensityMatrix::from_matrix(&m).unwrap()
}

fn random_pauli(n: usize, rng: &mut ChaCha8Rng) -> PauliString {
    PauliString::new((0..n).map(|_| Pauli::ALL[rng.random_range(0..4)]).collect())
}

fn random_circuit(n: usize, n_params: usize, n_gates: usize, rng: &mut ChaCha8Rng) -> Circuit {
    let mut circ = Circuit::new(n).unwrap().with_params(n_params);
    for k in 0..n_gates {
        let roll = rng.random_range(0..10);
        let g = if roll < 2 && n > 1 {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n);
            while b == a {
                b = rng.random_range(0..n);
            }
            GateOp::cnot(a, b)
        } else if roll < 3 {
            GateOp::h(rng.random_range(0..n))
        } else {
            let mut p = random_pauli(n, rng);
            while p.is_identity() {
                p = random_pauli(n, rng);
            }
            let scale = if roll < 6 { 0.5 } else { 1.0 };
            GateOp::rotation("r", vec![(scale, p)], Angle::Param(k % n_params)).unwrap()
        };
        circ.push(g).unwrap();
    }
    circ
}

#[test]
fn empty_circuit_is_identity() {
    let circ = Circuit::new(1).unwrap();
    let psi = circ.prepare(&[]).unwrap();
    assert_eq!(psi, Statevector::zero(1).unwrap());
}

#[test]
fn rx_pi_on_zero() {
    let circ = Circuit::new(1)
        .unwrap()
        .then(GateOp::rx(1, 0, Angle::Param(0)))
        .unwrap();
    let psi = circ.prepare(&[std::f64::consts::PI]).unwrap();
    let x = Pauli::X.matrix();
    let oracle = linalg::expm(&(x * c(0.0, -std::f64::consts::FRAC_PI_2)));
    let want = oracle.column(0);
    for (a, b) in psi.amplitudes().iter().zip(want.iter()) {
        assert!((a - b).norm() < 1e-15);
    }
    assert!((psi.amplitudes()[1] - c(0.0, -1.0)).norm() < 1e-15);
}

#[test]
fn bell_preparation() {
    let circ = Circuit::new(2)
        .unwrap()
        .then(GateOp::h(0))
        .unwrap()
        .then(GateOp::cnot(0, 1))
        .unwrap();
    let psi = circ.prepare(&[]).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let want = [s, 0.0, 0.0, s];
    for (a, b) in psi.amplitudes().iter().zip(want) {
        assert!((a - c(b, 0.0)).norm() < 1e-15);
    }
}

#[test]
fn basis_expectations() {
    let z = PauliSum::from_real_terms(&[(1.0, "Z")]).unwrap();
    let zz = PauliSum::from_real_terms(&[(1.0, "ZZ")]).unwrap();
    let zero = QuantumState::Pure(Statevector::zero(1).unwrap());
    let s01 = QuantumState::Pure(Statevector::basis(2, 1).unwrap());
    assert_eq!(expectation(&zero, &z).unwrap(), 1.0);
    assert_eq!(expectation(&s01, &zz).unwrap(), -1.0);
}

#[test]
fn expectation_matches_dense_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let psi = random_state(3, &mut rng);
        let terms: Vec<(C64, PauliString)> = (0..5)
            .map(|_| (c(rng.random_range(-1.0..1.0), 0.0), random_pauli(3, &mut rng)))
            .collect();
        let h = PauliSum::new(3, terms).unwrap();
        let v = psi.to_dvector();
        let dense = (v.adjoint() * h.to_dense() * &v)[(0, 0)].re;
        let got = expectation(&QuantumState::Pure(psi.clone()), &h).unwrap();
        assert!((got - dense).abs() < 1e-12);
        let rho = psi.to_density().unwrap();
        let got_mixed = expectation(&QuantumState::Mixed(rho), &h).unwrap();
        assert!((got_mixed - dense).abs() < 1e-12);
    }
}

#[test]
fn non_hermitian_observable_rejected() {
    let bad = PauliSum::new(1, vec![(c(0.0, 1.0), "Z".parse().unwrap())]).unwrap();
    let psi = QuantumState::Pure(Statevector::zero(1).unwrap());
    assert!(matches!(
        expectation(&psi, &bad),
        Err(QuantumError::NonHermitian { .. })
    ));
}

#[test]
fn sampled_expectation_binomial_window_and_determinism() {
    let x = PauliSum::from_real_terms(&[(1.0, "X")]).unwrap();
    let zero = QuantumState::Pure(Statevector::zero(1).unwrap());
    let settings = ShotSettings::new(10_000, 1234);
    let (e, se) = sampled_expectation(&zero, &x, settings).unwrap();
    // binomial σ of the ±1 mean at p = ½ is 1/√shots = 0.01
    assert!(e.abs() <= 0.03, "estimate {e}");
    assert!((se - 0.01).abs() < 1e-3);
    let again = sampled_expectation(&zero, &x, settings).unwrap();
    assert_eq!((e, se), again);
}

#[test]
fn hadamard_test_agrees_with_ancilla_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let n = rng.random_range(1..=2);
        let u = random_circuit(n, 3, 5, &mut rng);
        let v = random_circuit(n, 2, 4, &mut rng);
        let pu: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
        let pv: Vec<f64> = (0..2).map(|_| rng.random_range(-3.0..3.0)).collect();
        let psi = random_state(n, &mut rng);
        let theta = rng.random_range(-3.0..3.0);
        let exact = hadamard_test(&u, &pu, &v, &pv, theta, &psi).unwrap();
        let anc = hadamard_test_ancilla(&u, &pu, &v, &pv, theta, &psi).unwrap();
        assert!((exact - anc).abs() < 1e-10, "{exact} vs {anc}");
        let du = u.unitary(&pu).unwrap();
        let dv = v.unitary(&pv).unwrap();
        let p = psi.to_dvector();
        let oracle = (C64::from_polar(1.0, theta) * (p.adjoint() * dv.adjoint() * du * &p)[(0, 0)]).re;
        assert!((exact - oracle).abs() < 1e-12);
    }
}

#[test]
fn hadamard_register_mismatch() {
    let a = Circuit::new(1).unwrap();
    let b = Circuit::new(2).unwrap();
    let psi = Statevector::zero(1).unwrap();
    assert!(hadamard_test(&a, &[], &b, &[], 0.0, &psi).is_err());
}

#[test]
fn swap_test_on_random_mixed_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..10 {
        let rho = random_density(2, 3, &mut rng);
        let sigma = random_density(2, 2, &mut rng);
        let oracle = (rho.to_matrix() * sigma.to_matrix()).trace().re;
        for mode in [SwapMode::Ancilla, SwapMode::Destructive] {
            let exact = swap_test(&rho, &sigma, mode).unwrap();
            assert!((exact - oracle).abs() < 1e-12);
            let (est, se) =
                swap_test_sampled(&rho, &sigma, mode, ShotSettings::new(20_000, trial)).unwrap();
            assert!((est - oracle).abs() <= 3.0 * se + 1e-12, "{est} vs {oracle} ({se})");
        }
        let purity = swap_test(&rho, &rho, SwapMode::Ancilla).unwrap();
        assert!((purity - rho.purity()).abs() < 1e-12);
    }
}

#[test]
fn swap_test_dimension_mismatch() {
    let a = DensityMatrix::zero_state(1).unwrap();
    let b = DensityMatrix::zero_state(2).unwrap();
    assert!(swap_test(&a, &b, SwapMode::Destructive).is_err());
}

#[test]
fn jordan_wigner_examples() {
    let a1 = jordan_wigner(1, 1, LadderKind::Create).unwrap().to_dense();
    let want = (Pauli::X.matrix() + Pauli::Y.matrix() * c(0.0, 1.0)) * c(0.5, 0.0);
    assert!((a1 - want).iter().all(|z| z.norm() < 1e-15));

    let a12 = jordan_wigner(1, 2, LadderKind::Create).unwrap();
    let want = PauliSum::new(
        2,
        vec![(c(0.5, 0.0), "XZ".parse().unwrap()), (c(0.0, 0.5), "YZ".parse().unwrap())],
    )
    .unwrap();
    assert_eq!(a12, want);
}

#[test]
fn jordan_wigner_anticommutators() {
    let n = 3;
    let dim = 1 << n;
    for i in 1..=n {
        for j in 1..=n {
            let a = jordan_wigner(i, n, LadderKind::Annihilate).unwrap().to_dense();
            let b = jordan_wigner(j, n, LadderKind::Create).unwrap().to_dense();
            let anti = &a * &b + &b * &a;
            let want = if i == j {
                DMatrix::<C64>::identity(dim, dim)
            } else {
                DMatrix::zeros(dim, dim)
            };
            assert!((anti - want).iter().all(|z| z.norm() < 1e-14), "{i},{j}");
            let aa = jordan_wigner(j, n, LadderKind::Annihilate).unwrap().to_dense();
            let anti2 = &a * &aa + &aa * &a;
            assert!(anti2.iter().all(|z| z.norm() < 1e-14));
        }
    }
}

#[test]
fn trotter_error_and_first_order_scaling() {
    let h = PauliSum::from_real_terms(&[(1.0, "X"), (1.0, "Z")]).unwrap();
    let exact = linalg::unitary_propagator(&h.to_dense(), 1.0);
    let err = |steps: usize| {
        let u = trotterize(&h, 1.0, steps).unwrap().unitary(&[]).unwrap();
        linalg::operator_norm(&(u - &exact))
    };
    assert!(err(100) < 1e-2);
    let ratio = err(100) / err(200);
    assert!((ratio - 2.0).abs() < 0.05, "ratio {ratio}");
    let bad = PauliSum::new(1, vec![(c(0.0, 1.0), "X".parse().unwrap())]).unwrap();
    assert!(trotterize(&bad, 1.0, 4).is_err());
}

#[test]
fn text_format_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let terms: Vec<(C64, PauliString)> = (0..12)
        .map(|_| {
            (
                c(rng.random_range(-5.0..5.0), rng.random_range(-1.0..1.0)),
                random_pauli(4, &mut rng),
            )
        })
        .collect();
    let h = PauliSum::new(4, terms).unwrap();
    let back = PauliSum::parse_text(&h.to_text()).unwrap();
    assert_eq!(back, h);
    assert!(PauliSum::parse_text("inf 0 X").is_err());
    assert!(PauliSum::parse_text("NaN 0 X").is_err());
}

#[test]
fn dense_representation_caps() {
    assert!(matches!(
        Circuit::new(20),
        Err(QuantumError::QubitCapExceeded { .. })
    ));
}

fn finite_difference_derivatives(circ: &Circuit, params: &[f64], h: f64) -> Vec<DVector<C64>> {
    (0..params.len())
        .map(|k| {
            let mut plus = params.to_vec();
            let mut minus = params.to_vec();
            plus[k] += h;
            minus[k] -= h;
            let a = circ.prepare(&plus).unwrap().to_dvector();
            let b = circ.prepare(&minus).unwrap().to_dvector();
            (a - b) / c(2.0 * h, 0.0)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pauli_products_associate_like_matrices(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = PauliString::with_phase(random_pauli(n, &mut rng).letters().to_vec(), rng.random_range(0..4));
        let q = random_pauli(n, &mut rng);
        let r = random_pauli(n, &mut rng);
        let left = p.mul(&q).mul(&r);
        let right = p.mul(&q.mul(&r));
        prop_assert_eq!(&left, &right);
        let dense = p.to_dense() * q.to_dense() * r.to_dense();
        prop_assert!((left.to_dense() - dense).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn circuits_preserve_norm(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let circ = random_circuit(n, 4, 12, &mut rng);
        let params: Vec<f64> = (0..4).map(|_| rng.random_range(-6.0..6.0)).collect();
        let input = random_state(n, &mut rng);
        let out = circ.apply_pure(&params, &input).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn derivative_states_match_central_differences(seed in any::<u64>(), n in 1usize..=4, np in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let circ = random_circuit(n, np, 10, &mut rng);
        let params: Vec<f64> = (0..np).map(|_| rng.random_range(-3.0..3.0)).collect();
        let analytic = circ.derivative_states(&params).unwrap();
        let numeric = finite_difference_derivatives(&circ, &params, 1e-5);
        for (a, b) in analytic.iter().zip(&numeric) {
            for (x, y) in a.amplitudes().iter().zip(b.iter()) {
                prop_assert!((x - y).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn density_evolution_matches_pure(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let circ = random_circuit(n, 3, 8, &mut rng);
        let params: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
        let psi = random_state(n, &mut rng);
        let pure = circ.apply_pure(&params, &psi).unwrap().to_density().unwrap();
        let mixed = circ.apply_mixed(&params, &psi.to_density().unwrap()).unwrap();
        prop_assert!(pure.data().iter().zip(mixed.data()).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn swap_of_state_with_itself_is_purity(seed in any::<u64>(), rank in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(2, rank, &mut rng);
        for mode in [SwapMode::Ancilla, SwapMode::Destructive] {
            prop_assert!((swap_test(&rho, &rho, mode).unwrap() - rho.purity()).abs() < 1e-12);
        }
    }
}
