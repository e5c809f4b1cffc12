use std::f64::consts::{FRAC_PI_2, PI};

use quiko::audio::{EncodingMatrix, FeatureTriple};
use quiko::encoding::{EncoderKind, InternalPulse, RegisterLayout};
use quiko::qcompare::{
    build_comparator, compare_tracks, parse_matches, quiko_block, CompareRun, ComparatorConfig, ComparatorPlan,
    TrackSpec,
};
use quiko::qsim::{exact_probabilities, run_shots, GateOp, NoiseConfig};

fn layout() -> RegisterLayout {
    RegisterLayout::new(3, 8).unwrap()
}

fn basis_track(id: &str, bits: usize) -> TrackSpec {
    let features = (0..3).map(|b| FeatureTriple::new(if bits >> b & 1 == 1 { PI } else { 0.0 }, 0.0, 0.0)).collect();
    TrackSpec::new(id, features).unwrap()
}

/// Timbre qubits fixed to |011⟩ (bands 0 and 1 set) in every subdivision,
/// spinal register in equal superposition.
fn deterministic_timbre_block() -> Vec<GateOp> {
    let mut m = EncodingMatrix::zeros("det", 3, 8);
    for s in 0..8 {
        m.entries[0][s].theta = PI;
        m.entries[1][s].theta = PI;
    }
    let pulse = InternalPulse::Ry(vec![0.0, 0.0, 0.0, FRAC_PI_2, FRAC_PI_2, FRAC_PI_2]);
    quiko_block(&m, EncoderKind::Static, &pulse).unwrap()
}

#[test]
fn compare_field_is_bitwise_xor() {
    let cfg = ComparatorConfig { groups: 1, batch_len: 1, ..Default::default() };
    for a in 0..8usize {
        for b in 0..8usize {
            let plan = ComparatorPlan::new(layout(), vec![basis_track("t", b)], &cfg).unwrap();
            let prep: Vec<GateOp> = (0..3).filter(|q| a >> q & 1 == 1).map(GateOp::x).collect();
            let p = exact_probabilities(&build_comparator(prep, &plan).unwrap()).unwrap();
            for (value, &prob) in p.probs().iter().enumerate() {
                if prob > 1e-12 {
                    assert_eq!(value & 0b111, a ^ b, "a={a:03b} b={b:03b}");
                }
            }
        }
    }
}

#[test]
fn compare_register_is_cleared_after_reset() {
    let cfg = ComparatorConfig { groups: 1, batch_len: 1, ..Default::default() };
    let plan = ComparatorPlan::new(layout(), vec![basis_track("t", 0b101)], &cfg).unwrap();
    let mut c = build_comparator(vec![GateOp::h(0), GateOp::h(1)], &plan).unwrap();
    let mut wide = quiko::qsim::Circuit::new(plan.n_qubits, plan.n_clbits + 3).unwrap();
    wide.extend(c.ops().iter().cloned()).unwrap();
    for (i, &q) in plan.compare_qubits.iter().enumerate() {
        wide.push(GateOp::measure(q, plan.n_clbits + i)).unwrap();
    }
    c = wide;
    let p = exact_probabilities(&c).unwrap();
    let stray: f64 = p.probs().iter().enumerate().filter(|(v, _)| v >> plan.n_clbits != 0).map(|(_, p)| p).sum();
    assert!(stray < 1e-12);
}

#[test]
fn deterministic_self_match() {
    let cfg = ComparatorConfig::default();
    let tracks = vec![basis_track("same", 0b011), basis_track("other", 0b100)];
    let run = CompareRun { shots: 1024, noise: NoiseConfig::noiseless(), seed: 4 };
    let report = compare_tracks(&deterministic_timbre_block(), &layout(), &tracks, &cfg, &run).unwrap();
    assert_eq!(report.overall_rate("same"), 1.0);
    assert_eq!(report.overall_rate("other"), 0.0);
    assert_eq!(report.entries.len(), 16);
}

#[test]
fn uniform_track_matches_one_in_eight() {
    let cfg = ComparatorConfig { groups: 1, batch_len: 1, ..Default::default() };
    let uniform = TrackSpec::new("u", vec![FeatureTriple::new(FRAC_PI_2, 0.0, 0.0); 3]).unwrap();
    let run = CompareRun { shots: 8192, noise: NoiseConfig::noiseless(), seed: 8 };
    let report = compare_tracks(&deterministic_timbre_block(), &layout(), &[uniform], &cfg, &run).unwrap();
    let rate = report.overall_rate("u");
    assert!((rate - 0.125).abs() < 0.02, "{rate}");
}

#[test]
fn noise_degrades_self_match_with_batch_length() {
    let noise = NoiseConfig::enabled_default();
    let mean_rate = |batch_len: usize| {
        let cfg = ComparatorConfig { groups: 1, batch_len, ..Default::default() };
        let tracks: Vec<TrackSpec> = (0..batch_len).map(|i| basis_track(&format!("t{i}"), 0b011)).collect();
        let plan = ComparatorPlan::new(layout(), tracks.clone(), &cfg).unwrap();
        let circuit = build_comparator(deterministic_timbre_block(), &plan).unwrap();
        let hist = run_shots(&circuit, 3000, &noise, 21).unwrap();
        let report = parse_matches(&hist, &plan).unwrap();
        tracks.iter().map(|t| report.overall_rate(&t.track_id)).sum::<f64>() / batch_len as f64
    };
    let short = mean_rate(1);
    let long = mean_rate(5);
    assert!(short < 1.0, "{short}");
    assert!(long < short, "{long} !< {short}");
}
