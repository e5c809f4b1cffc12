use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{lambda_from_harmonic, phi_from_harmonic, theta_from_percussive, FeatureTriple};
use super::filter::{filter_bank, DEFAULT_CUTOFFS};
use super::hpss::{hpss, HpssKernel};
use super::stft::StftConfig;
use super::AudioBuffer;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionConfig {
    /// Band edges in Hz; `cutoffs.len() + 1` bands.
    pub cutoffs: Vec<f64>,
    pub n_subdivisions: usize,
    pub stft: StftConfig,
    pub kernel: HpssKernel,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        Self {
            cutoffs: DEFAULT_CUTOFFS.to_vec(),
            n_subdivisions: 8,
            stft: StftConfig::default(),
            kernel: HpssKernel::default(),
        }
    }
}

impl ExtractionConfig {
    pub fn n_bands(&self) -> usize {
        self.cutoffs.len() + 1
    }

    pub fn validate(&self) -> Result<()> {
        self.stft.validate()?;
        if !self.n_subdivisions.is_power_of_two() {
            return Err(Error::Config(format!(
                "n_subdivisions = {} is not a power of two",
                self.n_subdivisions
            )));
        }
        Ok(())
    }
}

/// Feature grid `entries[band][subdivision]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodingMatrix {
    pub source_id: String,
    pub n_bands: usize,
    pub n_subdivisions: usize,
    pub entries: Vec<Vec<FeatureTriple>>,
}

impl EncodingMatrix {
    pub fn zeros(source_id: impl Into<String>, n_bands: usize, n_subdivisions: usize) -> Self {
        Self {
            source_id: source_id.into(),
            n_bands,
            n_subdivisions,
            entries: vec![vec![FeatureTriple::default(); n_subdivisions]; n_bands],
        }
    }

    pub fn get(&self, band: usize, subdivision: usize) -> FeatureTriple {
        self.entries[band][subdivision]
    }

    /// The triples of one subdivision, lowest band first.
    pub fn column(&self, subdivision: usize) -> Vec<FeatureTriple> {
        self.entries.iter().map(|row| row[subdivision]).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_subdivisions == 0 || !self.n_subdivisions.is_power_of_two() {
            return Err(Error::Config(format!(
                "n_subdivisions = {} is not a power of two",
                self.n_subdivisions
            )));
        }
        if self.entries.len() != self.n_bands || self.entries.iter().any(|r| r.len() != self.n_subdivisions) {
            return Err(Error::Config(format!(
                "encoding matrix is not {} x {}",
                self.n_bands, self.n_subdivisions
            )));
        }
        let finite = |t: &FeatureTriple| t.theta.is_finite() && t.phi.is_finite() && t.lam.is_finite();
        if !self.entries.iter().flatten().all(finite) {
            return Err(Error::Config("encoding matrix holds non-finite angles".into()));
        }
        Ok(())
    }
}

/// `n` equal contiguous segments of a `len`-sample buffer; the remainder
/// (fewer than `n` samples) at the end is not analyzed.
pub fn segment_bounds(len: usize, n: usize) -> Vec<Range<usize>> {
    let seg = len / n.max(1);
    (0..n).map(|i| i * seg..(i + 1) * seg).collect()
}

/// Triple of one band segment: HPSS, then θ from the percussive part and
/// φ, λ from the harmonic part.
pub fn segment_features(segment: &AudioBuffer, cfg: &ExtractionConfig) -> Result<FeatureTriple> {
    let parts = hpss(segment, &cfg.stft, cfg.kernel)?;
    Ok(FeatureTriple {
        theta: theta_from_percussive(&parts.percussive, &cfg.stft)?,
        phi: phi_from_harmonic(&parts.harmonic),
        lam: lambda_from_harmonic(&parts.harmonic),
    })
}

/// Filter bank, segmentation into `n_subdivisions` slots, and per-slot
/// feature extraction for every band.
pub fn extract_matrix(
    buf: &AudioBuffer,
    cfg: &ExtractionConfig,
    source_id: impl Into<String>,
) -> Result<EncodingMatrix> {
    cfg.validate()?;
    let n_sub = cfg.n_subdivisions;
    if buf.is_empty() || buf.len() < n_sub * cfg.stft.window {
        return Err(Error::InputTooShort { samples: buf.len(), segments: n_sub, window: cfg.stft.window });
    }
    let bands = filter_bank(buf, &cfg.cutoffs)?;
    let bounds = segment_bounds(buf.len(), n_sub);
    let jobs: Vec<(usize, usize)> =
        (0..bands.bands.len()).flat_map(|b| (0..n_sub).map(move |s| (b, s))).collect();
    let triples = jobs
        .par_iter()
        .map(|&(b, s)| {
            let band = &bands.bands[b];
            segment_features(&band.with_samples(band.samples[bounds[s].clone()].to_vec()), cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let entries = triples.chunks(n_sub).map(<[FeatureTriple]>::to_vec).collect();
    Ok(EncodingMatrix { source_id: source_id.into(), n_bands: bands.bands.len(), n_subdivisions: n_sub, entries })
}
