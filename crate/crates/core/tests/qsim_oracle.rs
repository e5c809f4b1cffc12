use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use quiko::qsim::{
    apply_qft, exact_probabilities, oracle_final_state, qpe_circuit, random_unitary_circuit, run_shots,
    simulate_unitary, Circuit, GateOp, NoiseConfig, StateVector,
};
use quiko::rng;
use rand::Rng;

fn random_state(rng: &mut impl Rng, n: usize) -> StateVector {
    let amps: Vec<Complex64> =
        (0..1 << n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

#[test]
fn seeded_random_circuits_match_brute_force() {
    let mut rng = rng::seeded(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(1..=4);
        let c = random_unitary_circuit(&mut rng, n, 30).unwrap();
        let fast = simulate_unitary(&c).unwrap();
        let slow = oracle_final_state(&c).unwrap();
        worst = worst.max(fast.max_abs_diff(&slow));
    }
    assert!(worst < 1e-10, "max amplitude error {worst}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn random_circuits_match_brute_force(seed in any::<u64>(), n in 1usize..=5) {
        let c = random_unitary_circuit(&mut rng::seeded(seed), n, 20).unwrap();
        let err = simulate_unitary(&c).unwrap().max_abs_diff(&oracle_final_state(&c).unwrap());
        prop_assert!(err < 1e-10, "{}", err);
    }
}

#[test]
fn qft_round_trip_on_random_states() {
    let mut rng = rng::seeded(5);
    let qubits = [0, 1, 2, 3, 4];
    for _ in 0..100 {
        let s = random_state(&mut rng, 5);
        let back = apply_qft(apply_qft(s.clone(), &qubits, false).unwrap(), &qubits, true).unwrap();
        assert!(back.max_abs_diff(&s) < 1e-10);
    }
}

#[test]
fn qft_matches_dft_definition() {
    let mut rng = rng::seeded(6);
    let n = 4;
    let dim = 1usize << n;
    let s = random_state(&mut rng, n);
    let out = apply_qft(s.clone(), &[0, 1, 2, 3], false).unwrap();
    for k in 0..dim {
        let want: Complex64 = (0..dim)
            .map(|j| s.amplitudes()[j] * Complex64::cis(2.0 * PI * (j * k) as f64 / dim as f64))
            .sum::<Complex64>()
            / (dim as f64).sqrt();
        assert!((out.amplitudes()[k] - want).norm() < 1e-12);
    }
}

#[test]
fn qpe_on_grid_phase_is_exact() {
    let c = qpe_circuit(PI / 4.0, 3).unwrap();
    let p = exact_probabilities(&c).unwrap();
    assert!((p.get("001").unwrap() - 1.0).abs() < 1e-9);
    let hist = run_shots(&c, 1024, &NoiseConfig::noiseless(), 1).unwrap();
    assert_eq!(hist.get("001"), 1024);
    assert_eq!(hist.counts().len(), 1);
}

/// `|1/N Σ_j e^{2πi j (x − k/N)}|²` for phase fraction `x`.
fn fejer(x: f64, k: usize, n_bits: usize) -> f64 {
    let n = (1usize << n_bits) as f64;
    let delta = x - k as f64 / n;
    let s: Complex64 = (0..1usize << n_bits).map(|j| Complex64::cis(2.0 * PI * j as f64 * delta)).sum();
    (s / n).norm_sqr()
}

#[test]
fn qpe_off_grid_phase_follows_fejer_kernel() {
    let angle = PI / 3.0;
    let p = exact_probabilities(&qpe_circuit(angle, 3).unwrap()).unwrap();
    for k in 0..8 {
        let want = fejer(angle / (2.0 * PI), k, 3);
        assert!((p.probs()[k] - want).abs() < 1e-9, "outcome {k}: {} vs {want}", p.probs()[k]);
    }
    let (mode, pm) = p.mode();
    assert_eq!(mode, 1);
    assert!(pm >= 0.405);
}

#[test]
fn mid_circuit_measure_and_reset() {
    // H, measure into c0, reset, X, measure into c1: c1 is always 1.
    let mut c = Circuit::new(1, 2).unwrap();
    c.extend([GateOp::h(0), GateOp::measure(0, 0), GateOp::reset(0), GateOp::x(0), GateOp::measure(0, 1)])
        .unwrap();
    let p = exact_probabilities(&c).unwrap();
    assert!((p.get("10").unwrap() - 0.5).abs() < 1e-12);
    assert!((p.get("11").unwrap() - 0.5).abs() < 1e-12);
    let hist = run_shots(&c, 2000, &NoiseConfig::noiseless(), 3).unwrap();
    assert_eq!(hist.get("00") + hist.get("01"), 0);
}

#[test]
fn noisy_qpe_spreads_mass() {
    let c = qpe_circuit(PI / 4.0, 3).unwrap();
    let hist = run_shots(&c, 2000, &NoiseConfig::enabled_default(), 9).unwrap();
    assert!(hist.get("001") < 2000);
    let again = run_shots(&c, 2000, &NoiseConfig::enabled_default(), 9).unwrap();
    assert_eq!(hist, again);
}
