//! Exact outcome distributions and shot sampling.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::circuit::Circuit;
use super::gate::{GateKind, GateOp, Matrix2};
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::rng;

/// Branch cap for exact evaluation of mid-circuit measurement and reset.
pub const MAX_BRANCHES: usize = 1 << 20;

/// Outcomes whose probability falls below this are pruned from the branch tree.
const PRUNE: f64 = 1e-14;

/// Key-order tag carried by every histogram.
pub const KEY_ORDER: &str = "msb-first: clbit n-1 leftmost, clbit 0 rightmost";

/// Renders a classical register value MSB-first.
pub fn bitstring(value: u64, n_clbits: usize) -> String {
    if n_clbits == 0 {
        return String::new();
    }
    format!("{value:0n_clbits$b}")
}

pub fn parse_bitstring(key: &str, n_clbits: usize) -> Result<u64> {
    if key.len() != n_clbits || !key.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::MalformedKey { key: key.to_string(), width: n_clbits });
    }
    if n_clbits == 0 {
        return Ok(0);
    }
    Ok(u64::from_str_radix(key, 2).expect("validated binary"))
}

/// Depolarizing + readout noise. After each noisy gate every qubit it touches
/// independently suffers X, Y or Z with probability `p/3` each; `p1` applies
/// to uncontrolled single-qubit gates and `p2` to controlled gates and swaps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    pub p1: f64,
    pub p2: f64,
    pub p_readout: f64,
    pub enabled: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { p1: 0.001, p2: 0.01, p_readout: 0.02, enabled: false }
    }
}

impl NoiseConfig {
    pub fn noiseless() -> Self {
        Self::default()
    }

    /// Default rates, switched on.
    pub fn enabled_default() -> Self {
        Self { enabled: true, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("p1", self.p1), ("p2", self.p2), ("p_readout", self.p_readout)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidProbability { name, value });
            }
        }
        Ok(())
    }

    pub fn is_active(&self) -> bool {
        self.enabled && (self.p1 > 0.0 || self.p2 > 0.0 || self.p_readout > 0.0)
    }
}

/// Exact outcome distribution over the classical register, indexed by the
/// register value.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeProbabilities {
    n_clbits: usize,
    probs: Vec<f64>,
}

impl OutcomeProbabilities {
    pub fn n_clbits(&self) -> usize {
        self.n_clbits
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, key: &str) -> Result<f64> {
        Ok(self.probs[parse_bitstring(key, self.n_clbits)? as usize])
    }

    /// Nonzero outcomes keyed by bitstring.
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| (bitstring(i as u64, self.n_clbits), p))
            .collect()
    }

    /// Most likely outcome, lowest register value on ties.
    pub fn mode(&self) -> (u64, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, &p) in self.probs.iter().enumerate() {
            if p > best.1 {
                best = (i as u64, p);
            }
        }
        best
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShotHistogram {
    key_order: String,
    shots: u64,
    counts: BTreeMap<String, u64>,
    #[serde(skip)]
    n_clbits: usize,
}

#[derive(Deserialize)]
struct HistogramRecord {
    key_order: String,
    shots: u64,
    counts: BTreeMap<String, u64>,
}

impl<'de> Deserialize<'de> for ShotHistogram {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = HistogramRecord::deserialize(d)?;
        if rec.key_order != KEY_ORDER {
            return Err(serde::de::Error::custom(format!("unknown key order `{}`", rec.key_order)));
        }
        let width = rec.counts.keys().next().map_or(0, String::len);
        let hist = ShotHistogram::from_counts(width, rec.counts).map_err(serde::de::Error::custom)?;
        if hist.shots != rec.shots {
            return Err(serde::de::Error::custom(format!(
                "counts sum to {} but shots = {}",
                hist.shots, rec.shots
            )));
        }
        Ok(hist)
    }
}

impl ShotHistogram {
    pub fn from_counts(n_clbits: usize, counts: BTreeMap<String, u64>) -> Result<Self> {
        for key in counts.keys() {
            parse_bitstring(key, n_clbits)?;
        }
        let shots = counts.values().sum();
        Ok(Self { key_order: KEY_ORDER.to_string(), shots, counts, n_clbits })
    }

    fn from_outcomes(n_clbits: usize, outcomes: &[u64]) -> Self {
        let mut counts = BTreeMap::new();
        for &o in outcomes {
            *counts.entry(bitstring(o, n_clbits)).or_insert(0) += 1;
        }
        Self { key_order: KEY_ORDER.to_string(), shots: outcomes.len() as u64, counts, n_clbits }
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn n_clbits(&self) -> usize {
        self.n_clbits
    }

    pub fn key_order(&self) -> &str {
        &self.key_order
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn get(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// Register value → count.
    pub fn indexed(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts
            .iter()
            .map(|(k, &n)| (parse_bitstring(k, self.n_clbits).expect("validated key"), n))
    }

    /// Dense empirical frequencies indexed by register value.
    pub fn frequencies(&self) -> Vec<f64> {
        let mut f = vec![0.0; 1 << self.n_clbits];
        for (i, n) in self.indexed() {
            f[i as usize] = n as f64 / self.shots as f64;
        }
        f
    }
}

struct Branch {
    weight: f64,
    state: StateVector,
    clbits: u64,
}

/// Indices of measurements that nothing later disturbs: no later op touches
/// any measured qubit and no later measurement writes the same clbits. These
/// are read off the final state instead of branching.
fn terminal_measurements(ops: &[GateOp]) -> Vec<bool> {
    let mut terminal = vec![false; ops.len()];
    let mut touched = 0u64;
    let mut written = 0u64;
    for (i, op) in ops.iter().enumerate().rev() {
        if op.kind == GateKind::Barrier {
            continue;
        }
        if op.kind == GateKind::Measure {
            let free = op.targets.iter().all(|&q| touched & (1 << q) == 0)
                && op.clbits.iter().all(|&c| written & (1 << c) == 0);
            terminal[i] = free;
            for &c in &op.clbits {
                written |= 1 << c;
            }
        }
        for q in op.qubits() {
            touched |= 1 << q;
        }
    }
    terminal
}

fn split(branches: Vec<Branch>, qubit: usize, mut on_outcome: impl FnMut(&mut Branch, bool)) -> Vec<Branch> {
    let mut out = Vec::with_capacity(branches.len() * 2);
    for b in branches {
        let p1 = b.state.prob_one(qubit);
        for (outcome, p) in [(false, 1.0 - p1), (true, p1)] {
            if p < PRUNE {
                continue;
            }
            let mut child = Branch { weight: b.weight * p, state: b.state.clone(), clbits: b.clbits };
            child.state.project(qubit, outcome);
            on_outcome(&mut child, outcome);
            out.push(child);
        }
    }
    out
}

/// Exact distribution of the classical register, enumerating measurement
/// and reset branches where the circuit needs it.
pub fn exact_probabilities(circuit: &Circuit) -> Result<OutcomeProbabilities> {
    exact_probabilities_with(circuit, &NoiseConfig::noiseless())
}

/// As [`exact_probabilities`] but refuses active noise configurations.
pub fn exact_probabilities_with(circuit: &Circuit, noise: &NoiseConfig) -> Result<OutcomeProbabilities> {
    if noise.is_active() {
        return Err(Error::NoisyExact);
    }
    let ops = circuit.ops();
    let terminal = terminal_measurements(ops);
    let mut deferred: Vec<(usize, usize)> = Vec::new();
    let mut branches =
        vec![Branch { weight: 1.0, state: StateVector::new(circuit.n_qubits())?, clbits: 0 }];

    for (op, &is_terminal) in ops.iter().zip(&terminal) {
        match op.kind {
            GateKind::Barrier => {}
            GateKind::Measure if is_terminal => {
                deferred.extend(op.targets.iter().copied().zip(op.clbits.iter().copied()));
            }
            GateKind::Measure => {
                for (&q, &c) in op.targets.iter().zip(&op.clbits) {
                    branches = split(branches, q, |b, outcome| {
                        b.clbits = (b.clbits & !(1 << c)) | (u64::from(outcome) << c);
                    });
                }
            }
            GateKind::Reset => {
                for &q in &op.targets {
                    branches = split(branches, q, |b, outcome| {
                        if outcome {
                            b.state.flip_to_zero(q);
                        }
                    });
                }
            }
            _ => {
                for b in &mut branches {
                    b.state.apply(op)?;
                }
            }
        }
        if branches.len() > MAX_BRANCHES {
            return Err(Error::BranchLimit(MAX_BRANCHES));
        }
    }

    let mut probs = vec![0.0; 1 << circuit.n_clbits()];
    for b in &branches {
        for (basis, amp) in b.state.amplitudes().iter().enumerate() {
            let p = amp.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let mut reg = b.clbits;
            for &(q, c) in &deferred {
                let bit = (basis >> q) & 1;
                reg = (reg & !(1 << c)) | ((bit as u64) << c);
            }
            probs[reg as usize] += b.weight * p;
        }
    }
    Ok(OutcomeProbabilities { n_clbits: circuit.n_clbits(), probs })
}

/// Samples `shots` outcomes. Shot `i` draws only from stream `i` of `seed`,
/// so the histogram is independent of thread scheduling.
///
/// Noiseless circuits are sampled from their exact distribution (identical in
/// law to per-shot collapse). Noisy circuits, or circuits whose branch tree is
/// too large, are simulated one trajectory per shot.
pub fn run_shots(circuit: &Circuit, shots: u64, noise: &NoiseConfig, seed: u64) -> Result<ShotHistogram> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    noise.validate()?;
    if !noise.is_active() {
        match exact_probabilities(circuit) {
            Ok(exact) => return Ok(sample_exact(&exact, shots, seed)),
            Err(Error::BranchLimit(_)) => {}
            Err(e) => return Err(e),
        }
    }
    run_trajectories(circuit, shots, noise, seed)
}

fn sample_exact(exact: &OutcomeProbabilities, shots: u64, seed: u64) -> ShotHistogram {
    let mut cdf = Vec::with_capacity(exact.probs.len());
    let mut acc = 0.0;
    for &p in &exact.probs {
        acc += p;
        cdf.push(acc);
    }
    let last_nonzero = exact.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let outcomes: Vec<u64> = (0..shots)
        .into_par_iter()
        .map(|shot| {
            let u: f64 = rng::stream(seed, shot).random::<f64>() * acc;
            let idx = cdf.partition_point(|&c| c <= u).min(last_nonzero);
            idx as u64
        })
        .collect();
    ShotHistogram::from_outcomes(exact.n_clbits, &outcomes)
}

/// Per-shot trajectory simulation with Born-rule collapse and optional noise.
pub fn run_trajectories(
    circuit: &Circuit,
    shots: u64,
    noise: &NoiseConfig,
    seed: u64,
) -> Result<ShotHistogram> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    noise.validate()?;
    let ops = circuit.elementary_ops();
    let initial = StateVector::new(circuit.n_qubits())?;
    let noise = if noise.enabled { *noise } else { NoiseConfig { p1: 0.0, p2: 0.0, p_readout: 0.0, enabled: false } };
    let outcomes: Vec<u64> = (0..shots)
        .into_par_iter()
        .map(|shot| {
            let mut rng = rng::stream(seed, shot);
            let mut state = initial.clone();
            let mut reg = 0u64;
            for op in &ops {
                match op.kind {
                    GateKind::Barrier => {}
                    GateKind::Measure => {
                        for (&q, &c) in op.targets.iter().zip(&op.clbits) {
                            let outcome = rng.random::<f64>() < state.prob_one(q);
                            state.project(q, outcome);
                            let flipped = rng.random::<f64>() < noise.p_readout;
                            reg = (reg & !(1 << c)) | (u64::from(outcome ^ flipped) << c);
                        }
                    }
                    GateKind::Reset => {
                        for &q in &op.targets {
                            let outcome = rng.random::<f64>() < state.prob_one(q);
                            state.project(q, outcome);
                            if outcome {
                                state.flip_to_zero(q);
                            }
                        }
                    }
                    _ => {
                        state.apply_elementary(op);
                        let p = if op.controls.is_empty() && op.targets.len() == 1 {
                            noise.p1
                        } else {
                            noise.p2
                        };
                        if p > 0.0 {
                            for q in op.qubits() {
                                depolarize(&mut state, q, p, &mut rng);
                            }
                        }
                    }
                }
            }
            reg
        })
        .collect();
    Ok(ShotHistogram::from_outcomes(circuit.n_clbits(), &outcomes))
}

fn depolarize(state: &mut StateVector, qubit: usize, p: f64, rng: &mut impl Rng) {
    let u: f64 = rng.random();
    if u >= p {
        return;
    }
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let pauli: Matrix2 = match (3.0 * u / p) as u32 {
        0 => [[zero, one], [one, zero]],
        1 => [[zero, -i], [i, zero]],
        _ => [[one, zero], [zero, -one]],
    };
    state.apply_matrix(&pauli, qubit, &[]);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell_like() -> Circuit {
        let mut c = Circuit::new(1, 1).unwrap();
        c.push(GateOp::h(0)).unwrap().push(GateOp::measure(0, 0)).unwrap();
        c
    }

    #[test]
    fn empty_circuit_is_certain_zero() {
        let c = Circuit::new(1, 1).unwrap();
        assert_eq!(exact_probabilities(&c).unwrap().get("0").unwrap(), 1.0);
    }

    #[test]
    fn keys_are_msb_first() {
        let mut c = Circuit::new(3, 3).unwrap();
        c.push(GateOp::x(0)).unwrap();
        for q in 0..3 {
            c.push(GateOp::measure(q, q)).unwrap();
        }
        let p = exact_probabilities(&c).unwrap();
        assert_eq!(p.get("001").unwrap(), 1.0);
        assert_eq!(bitstring(0b101, 3), "101");
        assert!(parse_bitstring("10", 3).is_err());
        assert!(parse_bitstring("1a1", 3).is_err());
    }

    #[test]
    fn shots_are_deterministic_and_balanced() {
        let c = bell_like();
        let a = run_shots(&c, 4096, &NoiseConfig::noiseless(), 11).unwrap();
        let b = run_shots(&c, 4096, &NoiseConfig::noiseless(), 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.shots(), 4096);
        let p0 = a.get("0") as f64 / 4096.0;
        assert!((p0 - 0.5).abs() < 0.05, "{p0}");
        assert!(a.get("1") > 0);
    }

    #[test]
    fn zero_shots_and_noisy_exact_rejected() {
        let c = bell_like();
        assert!(matches!(run_shots(&c, 0, &NoiseConfig::noiseless(), 0), Err(Error::ZeroShots)));
        assert!(matches!(
            exact_probabilities_with(&c, &NoiseConfig::enabled_default()),
            Err(Error::NoisyExact)
        ));
        let bad = NoiseConfig { p1: 1.5, ..NoiseConfig::enabled_default() };
        assert!(run_shots(&c, 1, &bad, 0).is_err());
    }

    #[test]
    fn mid_circuit_measure_then_reset_branches() {
        // H, measure into c0, reset, measure into c1: c1 is always 0.
        let mut c = Circuit::new(1, 2).unwrap();
        c.push(GateOp::h(0)).unwrap();
        c.push(GateOp::measure(0, 0)).unwrap();
        c.push(GateOp::reset(0)).unwrap();
        c.push(GateOp::measure(0, 1)).unwrap();
        let p = exact_probabilities(&c).unwrap();
        assert!((p.get("00").unwrap() - 0.5).abs() < 1e-12);
        assert!((p.get("01").unwrap() - 0.5).abs() < 1e-12);
        let h = run_trajectories(&c, 2000, &NoiseConfig::noiseless(), 3).unwrap();
        assert_eq!(h.get("10") + h.get("11"), 0);
    }

    #[test]
    fn later_measure_overwrites() {
        let mut c = Circuit::new(2, 1).unwrap();
        c.push(GateOp::x(0)).unwrap();
        c.push(GateOp::measure(0, 0)).unwrap();
        c.push(GateOp::measure(1, 0)).unwrap();
        assert_eq!(exact_probabilities(&c).unwrap().get("0").unwrap(), 1.0);
        let h = run_trajectories(&c, 100, &NoiseConfig::noiseless(), 0).unwrap();
        assert_eq!(h.get("0"), 100);
    }

    #[test]
    fn histogram_json_round_trip_and_validation() {
        let h = run_shots(&bell_like(), 64, &NoiseConfig::noiseless(), 5).unwrap();
        let text = serde_json::to_string(&h).unwrap();
        let back: ShotHistogram = serde_json::from_str(&text).unwrap();
        assert_eq!(back, h);
        let bad = format!(r#"{{"key_order":"{KEY_ORDER}","shots":3,"counts":{{"0":1,"1":1}}}}"#);
        assert!(serde_json::from_str::<ShotHistogram>(&bad).is_err());
    }
}
