//! From measured statistics to a beat: per-subdivision timbre conditionals,
//! fidelity ranking of the sample database, and the schedule at one layer.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::EncoderKind;
use crate::error::{Error, Result};
use crate::qsim::{OutcomeProbabilities, ShotHistogram};

/// Allowed deviation of a distribution's total from 1 before it is rejected.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// Marginal mass below which a subdivision counts as unobserved.
const EMPTY_MARGINAL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleDistribution {
    pub sample_id: String,
    pub probs: Vec<f64>,
}

impl SampleDistribution {
    pub fn new(sample_id: impl Into<String>, probs: Vec<f64>) -> Result<Self> {
        let d = Self { sample_id: sample_id.into(), probs };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        check_distribution(&self.probs, 1e-9)
    }
}

fn check_distribution(p: &[f64], tol: f64) -> Result<()> {
    if p.is_empty() {
        return Err(Error::SizeMismatch(0, 1));
    }
    if let Some(&bad) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::InvalidProbability { name: "distribution entry", value: bad });
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(Error::Unnormalized(total));
    }
    Ok(())
}

/// Timbre distribution observed at one subdivision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimbreConditional {
    pub subdivision: usize,
    pub probs: Vec<f64>,
    /// Share of the joint mass that fell into this subdivision.
    pub marginal: f64,
    /// No mass was observed here and `probs` is the uniform fallback.
    pub low_confidence: bool,
}

/// Splits a joint distribution over `spinal | timbre` register values into
/// per-subdivision timbre conditionals. `weights` is indexed by register
/// value with the timbre field in the low `n_timbre` bits.
pub fn conditionals_from_weights(weights: &[f64], n_timbre: usize) -> Result<Vec<TimbreConditional>> {
    let width = weights.len().trailing_zeros() as usize;
    if !weights.len().is_power_of_two() || n_timbre == 0 || n_timbre >= width {
        return Err(Error::Config(format!(
            "joint distribution of {} entries cannot hold a {n_timbre}-bit timbre field and a spinal field",
            weights.len()
        )));
    }
    let n_t = 1 << n_timbre;
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::Unnormalized(total));
    }
    Ok(weights
        .chunks(n_t)
        .enumerate()
        .map(|(s, row)| {
            let mass: f64 = row.iter().sum();
            let marginal = mass / total;
            if marginal <= EMPTY_MARGINAL {
                TimbreConditional { subdivision: s, probs: vec![1.0 / n_t as f64; n_t], marginal, low_confidence: true }
            } else {
                let probs = row.iter().map(|w| w / mass).collect();
                TimbreConditional { subdivision: s, probs, marginal, low_confidence: false }
            }
        })
        .collect())
}

/// Conditionals of a measured joint histogram keyed `spinal | timbre`.
pub fn conditional_timbre(joint: &ShotHistogram, n_timbre: usize) -> Result<Vec<TimbreConditional>> {
    if joint.shots() == 0 {
        return Err(Error::ZeroShots);
    }
    conditionals_from_weights(&joint.frequencies(), n_timbre)
}

pub fn conditional_timbre_exact(joint: &OutcomeProbabilities, n_timbre: usize) -> Result<Vec<TimbreConditional>> {
    conditionals_from_weights(joint.probs(), n_timbre)
}

/// `(Σ √(p_k q_k))²`, the fidelity of the two diagonal states.
pub fn fidelity(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::SizeMismatch(p.len(), q.len()));
    }
    check_distribution(p, NORMALIZATION_TOLERANCE)?;
    check_distribution(q, NORMALIZATION_TOLERANCE)?;
    let bc: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
    Ok((bc * bc).clamp(0.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerEntry {
    pub sample_id: String,
    pub fidelity: f64,
}

/// `columns[s][layer]`: database samples at subdivision `s` ranked by
/// fidelity, highest first, ties by ascending `sample_id`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerTable {
    pub n_subdivisions: usize,
    pub n_layers: usize,
    pub low_confidence: Vec<bool>,
    pub columns: Vec<Vec<LayerEntry>>,
}

impl LayerTable {
    pub fn occupant(&self, subdivision: usize, layer: usize) -> &LayerEntry {
        &self.columns[subdivision][layer]
    }

    /// Layer index of `sample_id` at every subdivision.
    pub fn layers_of(&self, sample_id: &str) -> Vec<Option<usize>> {
        self.columns.iter().map(|col| col.iter().position(|e| e.sample_id == sample_id)).collect()
    }
}

pub fn layer_table(conditionals: &[TimbreConditional], db: &[SampleDistribution]) -> Result<LayerTable> {
    if db.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    let mut ids = BTreeSet::new();
    for d in db {
        if !ids.insert(d.sample_id.as_str()) {
            return Err(Error::Config(format!("duplicate sample id `{}`", d.sample_id)));
        }
    }
    let columns = conditionals
        .par_iter()
        .map(|c| {
            let mut col = db
                .iter()
                .map(|d| Ok(LayerEntry { sample_id: d.sample_id.clone(), fidelity: fidelity(&c.probs, &d.probs)? }))
                .collect::<Result<Vec<_>>>()?;
            col.sort_by(|a, b| b.fidelity.total_cmp(&a.fidelity).then_with(|| a.sample_id.cmp(&b.sample_id)));
            Ok(col)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LayerTable {
        n_subdivisions: conditionals.len(),
        n_layers: db.len(),
        low_confidence: conditionals.iter().map(|c| c.low_confidence).collect(),
        columns,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleMeta {
    pub encoder_kind: EncoderKind,
    pub layer_index: usize,
    pub seed: u64,
    /// `None` when conditionals came from exact probabilities.
    pub shots: Option<u64>,
    pub noise: bool,
    pub rng: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeatSlot {
    pub subdivision_index: usize,
    pub sample_id: String,
    pub fidelity: f64,
    pub low_confidence: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeatSchedule {
    pub metadata: ScheduleMeta,
    pub slots: Vec<BeatSlot>,
}

impl BeatSchedule {
    pub fn validate(&self) -> Result<()> {
        let in_order = self.slots.iter().enumerate().all(|(i, s)| s.subdivision_index == i);
        let bounded = self.slots.iter().all(|s| (0.0..=1.0).contains(&s.fidelity));
        if self.slots.is_empty() || !in_order || !bounded {
            return Err(Error::Config("schedule slots must cover subdivisions 0.. in order with fidelity in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Picks the `layer`-th ranked sample at every subdivision.
pub fn build_schedule(table: &LayerTable, meta: ScheduleMeta) -> Result<BeatSchedule> {
    let layer = meta.layer_index;
    if layer >= table.n_layers {
        return Err(Error::LayerOutOfRange { layer, n_layers: table.n_layers });
    }
    let slots = table
        .columns
        .iter()
        .enumerate()
        .map(|(s, col)| BeatSlot {
            subdivision_index: s,
            sample_id: col[layer].sample_id.clone(),
            fidelity: col[layer].fidelity,
            low_confidence: table.low_confidence[s],
        })
        .collect();
    Ok(BeatSchedule { metadata: meta, slots })
}
