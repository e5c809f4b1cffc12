//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use quiko::analysis::{expressibility_curve, kld, ExpressibilityConfig};
use quiko::audio::{hpss, lambda_from_harmonic, synth, EncodingMatrix, FeatureTriple, HpssKernel, StftConfig};
use quiko::decode::{conditional_timbre_exact, fidelity, BeatSchedule};
use quiko::encoding::{accumulate_half, pkbse_circuit, pkbse_matrix, static_circuit, EncoderKind, InternalPulse, RegisterLayout};
use quiko::qcompare::{build_comparator, compare_tracks, quiko_block, CompareRun, ComparatorConfig, ComparatorPlan, TrackSpec};
use quiko::qsim::{
    apply_qft, exact_probabilities, oracle_final_state, qpe_circuit, random_unitary_circuit, run_shots,
    simulate_unitary, GateOp, NoiseConfig, StateVector,
};
use quiko::rng;
use rand::Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn qpe_exact() -> Outcome {
    let ((p, hist), dt) = timed(|| {
        let c = qpe_circuit(PI / 4.0, 3).unwrap();
        (exact_probabilities(&c).unwrap().get("001").unwrap(), run_shots(&c, 1024, &NoiseConfig::noiseless(), 0).unwrap())
    });
    let counts_ok = hist.counts().len() == 1 && hist.get("001") == 1024;
    check(
        (p - 1.0).abs() <= 1e-9 && counts_ok && dt < Duration::from_secs(1),
        format!("P(001) = {p:.12}, counts {:?}, {dt:.2?}", hist.counts()),
    )
}

fn fejer(x: f64, k: usize, n: usize) -> f64 {
    let big_n = (1usize << n) as f64;
    let delta = x - k as f64 / big_n;
    let s: Complex64 = (0..1usize << n).map(|j| Complex64::cis(2.0 * PI * j as f64 * delta)).sum();
    (s / big_n).norm_sqr()
}

fn qpe_off_grid() -> Outcome {
    let p = exact_probabilities(&qpe_circuit(PI / 3.0, 3).unwrap()).unwrap();
    let err = (0..8).map(|k| (p.probs()[k] - fejer(1.0 / 6.0, k, 3)).abs()).fold(0.0, f64::max);
    let (mode, pm) = p.mode();
    check(err <= 1e-9 && mode == 1 && pm >= 0.405, format!("max |Δ| = {err:.2e}, mode {mode:03b} at {pm:.4}"))
}

fn oracle_equivalence() -> Outcome {
    let (worst, dt) = timed(|| {
        let mut rng = rng::seeded(2024);
        (0..200)
            .map(|_| {
                let n = rng.random_range(1..=4);
                let c = random_unitary_circuit(&mut rng, n, 30).unwrap();
                simulate_unitary(&c).unwrap().max_abs_diff(&oracle_final_state(&c).unwrap())
            })
            .fold(0.0, f64::max)
    });
    check(worst < 1e-10 && dt < Duration::from_secs(30), format!("max amplitude error {worst:.2e} over 200 circuits, {dt:.2?}"))
}

fn random_state(rng: &mut impl Rng, n: usize) -> StateVector {
    let amps: Vec<Complex64> =
        (0..1 << n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

fn qft_round_trip() -> Outcome {
    let mut rng = rng::seeded(5);
    let q = [0, 1, 2, 3, 4];
    let worst = (0..100)
        .map(|_| {
            let s = random_state(&mut rng, 5);
            let back = apply_qft(apply_qft(s.clone(), &q, false).unwrap(), &q, true).unwrap();
            back.max_abs_diff(&s)
        })
        .fold(0.0, f64::max);
    check(worst < 1e-10, format!("max error {worst:.2e}"))
}

fn zero_encoder_baseline() -> Outcome {
    let zero = EncodingMatrix::zeros("zero", 3, 8);
    let s = exact_probabilities(&static_circuit(&zero).unwrap().circuit).unwrap();
    let p = exact_probabilities(&pkbse_circuit(&pkbse_matrix(&zero).unwrap()).unwrap().circuit).unwrap();
    let mut worst: f64 = 0.0;
    for dist in [&s, &p] {
        let spinal0: f64 = dist.probs()[..8].iter().sum();
        worst = worst.max((spinal0 - 1.0).abs());
        let cond = conditional_timbre_exact(dist, 3).unwrap();
        worst = cond[0].probs.iter().map(|x| (x - 0.125).abs()).fold(worst, f64::max);
    }
    let agree = s.probs().iter().zip(p.probs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    check(worst < 1e-10 && agree < 1e-10, format!("baseline error {worst:.2e}, encoder disagreement {agree:.2e}"))
}

fn pkbse_construction() -> Outcome {
    let hand = accumulate_half(&[1.0, 2.0, 3.0, 4.0]);
    let mut rng = rng::seeded(1000);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let len = rng.random_range(1..=8);
        let half: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        let acc = accumulate_half(&half);
        let mut prev = 0.0;
        for j in 0..len - 1 {
            worst = worst.max((-acc[j] - prev - half[j]).abs());
            prev = -acc[j];
        }
        worst = worst.max((acc[len - 1] - half.iter().sum::<f64>()).abs());
    }
    check(hand == [-1.0, -3.0, -6.0, 10.0] && worst < 1e-12, format!("{hand:?}, telescoping error {worst:.2e}"))
}

fn random_dist(rng: &mut impl Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..8).map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() }).collect();
    let z: f64 = w.iter().sum();
    if z == 0.0 {
        return vec![0.125; 8];
    }
    w.iter().map(|x| x / z).collect()
}

fn fidelity_kld() -> Outcome {
    let uniform = vec![0.125; 8];
    let mut point = vec![0.0; 8];
    point[2] = 1.0;
    let f = fidelity(&uniform, &point).unwrap();
    let d = kld(&point, &uniform).unwrap();
    let mut rng = rng::seeded(10_000);
    let (mut asym, mut bounded) = (0.0f64, true);
    for _ in 0..10_000 {
        let (p, q) = (random_dist(&mut rng), random_dist(&mut rng));
        let (a, b) = (fidelity(&p, &q).unwrap(), fidelity(&q, &p).unwrap());
        asym = asym.max((a - b).abs());
        bounded &= (0.0..=1.0).contains(&a);
    }
    check(
        (f - 0.125).abs() <= 1e-12 && (d - 8f64.ln()).abs() <= 1e-12 && asym <= 1e-12 && bounded,
        format!("F = {f}, KLD = {d:.12}, max asymmetry {asym:.1e}, bounded {bounded}"),
    )
}

fn expressibility() -> Outcome {
    let clones = expressibility_curve(&ExpressibilityConfig { clone_database: true, seed: 1, ..Default::default() }).unwrap();
    let worst = clones.values.iter().map(|v| (v - 8f64.ln()).abs()).fold(0.0, f64::max);
    let cfg = ExpressibilityConfig { seed: 1, ..Default::default() };
    let (a, dt) = timed(|| serde_json::to_string(&expressibility_curve(&cfg).unwrap()).unwrap());
    let b = serde_json::to_string(&expressibility_curve(&cfg).unwrap()).unwrap();
    check(
        clones.values.len() == 8 && worst <= 1e-9 && a == b && dt < Duration::from_secs(300),
        format!("clone error {worst:.1e}, random run {dt:.2?}, reproducible {}", a == b),
    )
}

fn energy_share(part: &[f64], reference: &[f64]) -> f64 {
    let dot: f64 = part.iter().zip(reference).map(|(a, b)| a * b).sum();
    dot / reference.iter().map(|x| x * x).sum::<f64>()
}

fn hpss_routing() -> Outcome {
    const FS: u32 = 22_050;
    let sine = synth::sine(440.0, 0.5, 1.0, FS);
    let click = synth::clicks(&[FS as usize / 3, 2 * FS as usize / 3], 1.0, FS as usize, FS);
    let mix = synth::mix(&sine, &click);
    let parts = hpss(&mix, &StftConfig::default(), HpssKernel::default()).unwrap();
    let h = energy_share(&parts.harmonic.samples, &sine.samples);
    let p = energy_share(&parts.percussive.samples, &click.samples);
    let lam = lambda_from_harmonic(&sine);
    let centroid = lam * sine.nyquist() / (2.0 * PI);
    let bin = f64::from(FS) / sine.len() as f64;
    check(
        h >= 0.8 && p >= 0.7 && (centroid - 440.0).abs() <= bin,
        format!("sine→harmonic {h:.3}, click→percussive {p:.3}, centroid {centroid:.2} Hz (bin {bin:.2} Hz)"),
    )
}

fn basis_track(id: &str, bits: usize) -> TrackSpec {
    TrackSpec::new(id, (0..3).map(|b| FeatureTriple::new(if bits >> b & 1 == 1 { PI } else { 0.0 }, 0.0, 0.0)).collect())
        .unwrap()
}

fn deterministic_timbre() -> Vec<GateOp> {
    let mut m = EncodingMatrix::zeros("det", 3, 8);
    for s in 0..8 {
        m.entries[0][s].theta = PI;
        m.entries[1][s].theta = PI;
    }
    let pulse = InternalPulse::Ry(vec![0.0, 0.0, 0.0, FRAC_PI_2, FRAC_PI_2, FRAC_PI_2]);
    quiko_block(&m, EncoderKind::Static, &pulse).unwrap()
}

fn self_match_rate(noise: NoiseConfig, shots: u64) -> f64 {
    let layout = RegisterLayout::new(3, 8).unwrap();
    let run = CompareRun { shots, noise, seed: 4 };
    let tracks = [basis_track("same", 0b011)];
    compare_tracks(&deterministic_timbre(), &layout, &tracks, &ComparatorConfig::default(), &run).unwrap().overall_rate("same")
}

fn comparator() -> Outcome {
    let layout = RegisterLayout::new(3, 8).unwrap();
    let single = ComparatorConfig { groups: 1, batch_len: 1, ..Default::default() };
    let mut xor_ok = true;
    for a in 0..8usize {
        for b in 0..8usize {
            let plan = ComparatorPlan::new(layout.clone(), vec![basis_track("t", b)], &single).unwrap();
            let prep: Vec<GateOp> = (0..3).filter(|q| a >> q & 1 == 1).map(GateOp::x).collect();
            let p = exact_probabilities(&build_comparator(prep, &plan).unwrap()).unwrap();
            xor_ok &= p.probs().iter().enumerate().all(|(v, &pr)| pr <= 1e-12 || v & 0b111 == a ^ b);
        }
    }
    let self_rate = self_match_rate(NoiseConfig::noiseless(), 1024);
    let uniform = TrackSpec::new("u", vec![FeatureTriple::new(FRAC_PI_2, 0.0, 0.0); 3]).unwrap();
    let run = CompareRun { shots: 8192, noise: NoiseConfig::noiseless(), seed: 8 };
    let u_rate = compare_tracks(&deterministic_timbre(), &layout, &[uniform], &single, &run).unwrap().overall_rate("u");
    check(
        xor_ok && self_rate == 1.0 && (u_rate - 0.125).abs() <= 0.02,
        format!("XOR 8x8 {xor_ok}, self-match {self_rate}, uniform match {u_rate:.4}"),
    )
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn quiko(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_quiko")).args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&out.stderr).into_owned())
    }
}

fn end_to_end() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fx = fixtures();
    let db = tmp.path().join("db.json");
    let s = |p: &Path| p.to_string_lossy().into_owned();
    let t0 = Instant::now();
    quiko(&["prepare-db", &s(&fx.join("db")), "--out", &s(&db)])?;
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        quiko(&[
            "generate", &s(&fx.join("groove.wav")), "--db", &s(&db), "--encoder", "pkbse", "--layer", "1",
            "--shots", "1024", "--seed", "42", "--noise", "off", "--out-dir", &s(&dir),
        ])?;
        outputs.push(std::fs::read_to_string(dir.join("schedule.json")).map_err(|e| e.to_string())?);
    }
    let dt = t0.elapsed();
    let schedule: BeatSchedule = serde_json::from_str(&outputs[0]).map_err(|e| e.to_string())?;
    let valid = schedule.validate().is_ok();
    check(
        valid && schedule.slots.len() == 8 && outputs[0] == outputs[1] && dt < Duration::from_secs(60),
        format!("{} slots, schema valid {valid}, identical {}, {dt:.2?}", schedule.slots.len(), outputs[0] == outputs[1]),
    )
}

fn noise_sanity() -> Outcome {
    let c = qpe_circuit(PI / 4.0, 3).unwrap();
    let hist = run_shots(&c, 2048, &NoiseConfig::enabled_default(), 12).unwrap();
    let p001 = hist.get("001") as f64 / hist.shots() as f64;
    let rate = self_match_rate(NoiseConfig::enabled_default(), 1024);
    check(p001 < 1.0 && rate < 1.0, format!("noisy P(001) = {p001:.4}, noisy self-match {rate:.4}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("QPE exactness", qpe_exact),
        ("QPE off-grid", qpe_off_grid),
        ("Simulator oracle equivalence", oracle_equivalence),
        ("QFT round-trip", qft_round_trip),
        ("Zero-parameter encoder baseline", zero_encoder_baseline),
        ("PKBSE matrix construction", pkbse_construction),
        ("Fidelity/KLD closed forms", fidelity_kld),
        ("Expressibility degenerate database", expressibility),
        ("HPSS routing", hpss_routing),
        ("Comparator correctness", comparator),
        ("End-to-end generate", end_to_end),
        ("Noise sanity", noise_sanity),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] {:>2}. {name}: {detail}", i + 1);
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
