use serde::{Deserialize, Serialize};

use super::stft::{istft, stft, StftConfig};
use super::AudioBuffer;
use crate::error::{Error, Result};

/// Median kernel lengths: `time_frames` smooths along time (harmonic
/// enhancement), `freq_bins` along frequency (percussive enhancement).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HpssKernel {
    pub time_frames: usize,
    pub freq_bins: usize,
}

impl Default for HpssKernel {
    fn default() -> Self {
        Self { time_frames: 17, freq_bins: 17 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HpssPair {
    pub percussive: AudioBuffer,
    pub harmonic: AudioBuffer,
}

fn median(values: &mut [f64]) -> f64 {
    let mid = values.len() / 2;
    let (_, m, _) = values.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    let upper = *m;
    if values.len() % 2 == 1 {
        upper
    } else {
        let lower = values[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// Median over a window of `kernel` entries centred on each index, truncated at the edges.
fn median_filter(xs: &[f64], kernel: usize, scratch: &mut Vec<f64>) -> Vec<f64> {
    let half = kernel / 2;
    (0..xs.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(xs.len());
            scratch.clear();
            scratch.extend_from_slice(&xs[lo..hi]);
            median(scratch)
        })
        .collect()
}

/// Hard-mask harmonic/percussive separation by median filtering the
/// magnitude spectrogram. A bin goes to the harmonic part when its
/// time-smoothed magnitude exceeds its frequency-smoothed magnitude, to the
/// percussive part otherwise, so the two masks partition the spectrogram.
pub fn hpss(buf: &AudioBuffer, cfg: &StftConfig, kernel: HpssKernel) -> Result<HpssPair> {
    cfg.validate()?;
    if kernel.time_frames == 0 || kernel.freq_bins == 0 {
        return Err(Error::Config("hpss kernel sizes must be positive".into()));
    }
    if buf.len() < cfg.window {
        return Err(Error::InputTooShort { samples: buf.len(), segments: 1, window: cfg.window });
    }
    if buf.samples.iter().all(|&s| s == 0.0) {
        let zeros = buf.with_samples(vec![0.0; buf.len()]);
        return Ok(HpssPair { percussive: zeros.clone(), harmonic: zeros });
    }

    let spec = stft(&buf.samples, cfg)?;
    let mag = spec.magnitudes();
    let (n_frames, n_bins) = (spec.n_frames(), cfg.n_bins());
    let mut scratch = Vec::new();

    let percussive_enh: Vec<Vec<f64>> =
        mag.iter().map(|frame| median_filter(frame, kernel.freq_bins, &mut scratch)).collect();
    let mut harmonic_enh = vec![vec![0.0; n_bins]; n_frames];
    let mut column = vec![0.0; n_frames];
    for k in 0..n_bins {
        for t in 0..n_frames {
            column[t] = mag[t][k];
        }
        for (t, v) in median_filter(&column, kernel.time_frames, &mut scratch).into_iter().enumerate() {
            harmonic_enh[t][k] = v;
        }
    }

    let mut harm = spec.clone();
    let mut perc = spec;
    for t in 0..n_frames {
        for k in 0..n_bins {
            if harmonic_enh[t][k] > percussive_enh[t][k] {
                perc.frames[t][k] = Default::default();
            } else {
                harm.frames[t][k] = Default::default();
            }
        }
    }
    Ok(HpssPair {
        percussive: buf.with_samples(istft(&perc)),
        harmonic: buf.with_samples(istft(&harm)),
    })
}
