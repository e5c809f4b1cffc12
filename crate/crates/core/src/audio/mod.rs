//! Audio ingestion and feature extraction: filter bank, HPSS and the
//! per-band, per-subdivision U3 angles.

pub mod features;
pub mod filter;
pub mod hpss;
pub mod matrix;
pub mod stft;
pub mod synth;
pub mod wav;

pub use features::{
    lambda_from_harmonic, onset_envelope, phi_from_harmonic, pick_peaks, theta_from_onsets,
    theta_from_percussive, FeatureTriple,
};
pub use filter::{filter_bank, BandSet, Biquad, DEFAULT_CUTOFFS};
pub use hpss::{hpss, HpssKernel, HpssPair};
pub use matrix::{extract_matrix, segment_bounds, segment_features, EncodingMatrix, ExtractionConfig};
pub use stft::{istft, stft, Spectrogram, StftConfig};
pub use wav::{load_wav, write_wav};

use crate::error::{Error, Result};

/// Mono samples in [−1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Config("sample rate must be positive".into()));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn nyquist(&self) -> f64 {
        f64::from(self.sample_rate) / 2.0
    }

    pub fn energy(&self) -> f64 {
        energy(&self.samples)
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            (self.energy() / self.samples.len() as f64).sqrt()
        }
    }

    pub fn with_samples(&self, samples: Vec<f64>) -> Self {
        Self { samples, sample_rate: self.sample_rate }
    }
}

pub fn energy(samples: &[f64]) -> f64 {
    samples.iter().map(|x| x * x).sum()
}
