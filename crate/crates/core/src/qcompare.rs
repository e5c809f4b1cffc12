//! Syndrome comparator: the encoded timbre register is XORed against database
//! tracks onto a shared compare register, which is measured and reset after
//! every track. An all-zero compare field is a match.
//!
//! Classical layout of one batch of `T` tracks: track `t` owns clbits
//! `3t..3t+3` (band `b` at `3t+b`), and the spinal register fills the clbits
//! above `3T`, read MSB-first like the encoder output.

use serde::{Deserialize, Serialize};

use crate::audio::{EncodingMatrix, FeatureTriple};
use crate::encoding::{encoder_body_ops, EncoderKind, InternalPulse, RegisterLayout, N_BANDS};
use crate::error::{Error, Result};
use crate::qsim::{parse_bitstring, run_shots, Circuit, GateOp, NoiseConfig, ShotHistogram, MAX_CLBITS};
use crate::rng::derive_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackSpec {
    pub track_id: String,
    /// One triple per band, lowest band first.
    pub features: Vec<FeatureTriple>,
}

impl TrackSpec {
    pub fn new(track_id: impl Into<String>, features: Vec<FeatureTriple>) -> Result<Self> {
        if features.len() != N_BANDS {
            return Err(Error::Config(format!("track needs {N_BANDS} band triples, got {}", features.len())));
        }
        Ok(Self { track_id: track_id.into(), features })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComparatorConfig {
    /// Track registers held at once.
    pub groups: usize,
    /// Tracks compared per circuit execution; groups are reset and reused
    /// when this exceeds `groups`.
    pub batch_len: usize,
    pub max_qubits: usize,
}

impl Default for ComparatorConfig {
    fn default() -> Self {
        Self { groups: 2, batch_len: 2, max_qubits: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparatorPlan {
    pub layout: RegisterLayout,
    pub tracks: Vec<TrackSpec>,
    /// Qubit triple used by each track of the batch.
    pub track_qubits: Vec<Vec<usize>>,
    pub compare_qubits: Vec<usize>,
    /// First clbit of each track's field.
    pub track_fields: Vec<usize>,
    pub spinal_field: usize,
    pub n_qubits: usize,
    pub n_clbits: usize,
}

impl ComparatorPlan {
    pub fn new(layout: RegisterLayout, tracks: Vec<TrackSpec>, cfg: &ComparatorConfig) -> Result<Self> {
        if tracks.is_empty() || cfg.groups == 0 {
            return Err(Error::Config("comparator needs at least one track and one track group".into()));
        }
        if layout.timbre.len() != N_BANDS {
            return Err(Error::Config(format!("comparator needs {N_BANDS} timbre qubits")));
        }
        let base = layout.n_qubits();
        let groups = cfg.groups.min(tracks.len());
        let n_qubits = base + N_BANDS * (groups + 1);
        if n_qubits > cfg.max_qubits {
            return Err(Error::TooManyQubits { n: n_qubits, max: cfg.max_qubits });
        }
        let spinal_field = N_BANDS * tracks.len();
        let n_clbits = spinal_field + layout.spinal.len();
        if n_clbits > MAX_CLBITS {
            return Err(Error::TooManyClbits { n: n_clbits, max: MAX_CLBITS });
        }
        let group = |g: usize| (base + N_BANDS * g..base + N_BANDS * (g + 1)).collect::<Vec<_>>();
        Ok(Self {
            track_qubits: (0..tracks.len()).map(|t| group(t % groups)).collect(),
            compare_qubits: group(groups),
            track_fields: (0..tracks.len()).map(|t| N_BANDS * t).collect(),
            spinal_field,
            n_qubits,
            n_clbits,
            layout,
            tracks,
        })
    }

    pub fn n_subdivisions(&self) -> usize {
        self.layout.n_subdivisions()
    }
}

/// Comparator circuit around an arbitrary preparation of the encoder
/// registers (`prep` acts on the qubits of `plan.layout`).
pub fn build_comparator(prep: Vec<GateOp>, plan: &ComparatorPlan) -> Result<Circuit> {
    let mut c = Circuit::new(plan.n_qubits, plan.n_clbits)?;
    c.extend(prep)?;
    for (t, track) in plan.tracks.iter().enumerate() {
        let group = &plan.track_qubits[t];
        if plan.track_qubits[..t].contains(group) {
            c.extend(group.iter().map(|&q| GateOp::reset(q)))?;
        }
        for (&q, &f) in group.iter().zip(&track.features) {
            c.push(GateOp::u3(f.theta, f.phi, f.lam, q))?;
        }
        for ((&cmp, &timbre), &tq) in plan.compare_qubits.iter().zip(&plan.layout.timbre).zip(group) {
            c.push(GateOp::x(cmp).controlled_by(timbre))?;
            c.push(GateOp::x(cmp).controlled_by(tq))?;
        }
        for (b, &cmp) in plan.compare_qubits.iter().enumerate() {
            c.push(GateOp::measure(cmp, plan.track_fields[t] + b))?;
        }
        c.extend(plan.compare_qubits.iter().map(|&q| GateOp::reset(q)))?;
    }
    c.push(GateOp::inverse_qft(plan.layout.spinal_lsb_first()))?;
    let k = plan.layout.spinal.len();
    for (i, &q) in plan.layout.spinal.iter().enumerate() {
        c.push(GateOp::measure(q, plan.spinal_field + k - 1 - i))?;
    }
    Ok(c)
}

/// Internal pulse followed by the encoder gates, without inverse QFT.
pub fn quiko_block(matrix: &EncodingMatrix, kind: EncoderKind, pulse: &InternalPulse) -> Result<Vec<GateOp>> {
    let layout = RegisterLayout::new(matrix.n_bands, matrix.n_subdivisions)?;
    let mut ops = pulse.ops(&layout.all_qubits())?;
    ops.extend(encoder_body_ops(matrix, kind)?);
    Ok(ops)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchEntry {
    pub track_id: String,
    pub subdivision: usize,
    pub match_count: u64,
    /// Shots whose spinal field read this subdivision.
    pub shots: u64,
    pub match_rate: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub entries: Vec<MatchEntry>,
}

impl MatchReport {
    pub fn get(&self, track_id: &str, subdivision: usize) -> Option<&MatchEntry> {
        self.entries.iter().find(|e| e.track_id == track_id && e.subdivision == subdivision)
    }

    /// Match rate of a track over all shots, ignoring the subdivision.
    pub fn overall_rate(&self, track_id: &str) -> f64 {
        let (m, n) = self
            .entries
            .iter()
            .filter(|e| e.track_id == track_id)
            .fold((0, 0), |(m, n), e| (m + e.match_count, n + e.shots));
        if n == 0 {
            0.0
        } else {
            m as f64 / n as f64
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("track_id,subdivision,match_count,shots,match_rate\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{},{},{}\n", e.track_id, e.subdivision, e.match_count, e.shots, e.match_rate));
        }
        out
    }
}

/// Counts all-zero compare fields per track, conditioned on the spinal field.
pub fn parse_matches(hist: &ShotHistogram, plan: &ComparatorPlan) -> Result<MatchReport> {
    if hist.n_clbits() != plan.n_clbits {
        return Err(Error::SizeMismatch(hist.n_clbits(), plan.n_clbits));
    }
    let n_sub = plan.n_subdivisions();
    let mut totals = vec![0u64; n_sub];
    let mut matches = vec![vec![0u64; n_sub]; plan.tracks.len()];
    for (key, &count) in hist.counts() {
        let value = parse_bitstring(key, plan.n_clbits)?;
        let s = (value >> plan.spinal_field) as usize & (n_sub - 1);
        totals[s] += count;
        for (t, &field) in plan.track_fields.iter().enumerate() {
            if (value >> field) & ((1 << N_BANDS) - 1) == 0 {
                matches[t][s] += count;
            }
        }
    }
    let entries = plan
        .tracks
        .iter()
        .enumerate()
        .flat_map(|(t, track)| {
            let (matches, totals) = (&matches, &totals);
            (0..n_sub).map(move |s| MatchEntry {
                track_id: track.track_id.clone(),
                subdivision: s,
                match_count: matches[t][s],
                shots: totals[s],
                match_rate: if totals[s] == 0 { 0.0 } else { matches[t][s] as f64 / totals[s] as f64 },
            })
        })
        .collect();
    Ok(MatchReport { entries })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRun {
    pub shots: u64,
    pub noise: NoiseConfig,
    pub seed: u64,
}

/// Compares every track against the encoded input, `batch_len` tracks per
/// circuit execution, and merges the per-batch reports.
pub fn compare_tracks(
    prep: &[GateOp],
    layout: &RegisterLayout,
    tracks: &[TrackSpec],
    cfg: &ComparatorConfig,
    run: &CompareRun,
) -> Result<MatchReport> {
    if cfg.batch_len == 0 {
        return Err(Error::Config("batch_len must be at least 1".into()));
    }
    let mut report = MatchReport::default();
    for (i, batch) in tracks.chunks(cfg.batch_len).enumerate() {
        let plan = ComparatorPlan::new(layout.clone(), batch.to_vec(), cfg)?;
        let circuit = build_comparator(prep.to_vec(), &plan)?;
        let hist = run_shots(&circuit, run.shots, &run.noise, derive_seed(run.seed, i as u64))?;
        report.entries.extend(parse_matches(&hist, &plan)?.entries);
    }
    Ok(report)
}
