//! The three U3 angles of one band segment: θ from percussive onsets, φ from
//! the strongest harmonic peaks, λ from the harmonic spectral centroid.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize, Serializer};

use super::stft::{hann, stft, StftConfig};
use super::AudioBuffer;
use crate::error::Result;

/// Minimum distance between two onset peaks.
pub const MIN_PEAK_SPACING_S: f64 = 0.05;

/// Number of spectral peaks averaged into φ.
const PHI_PEAKS: usize = 3;

/// Magnitudes below this fraction of the spectrum maximum are ignored as numerical noise.
const SPECTRAL_FLOOR: f64 = 1e-9;

/// `U3(θ, φ, λ)` parameters: θ ∈ [0, π], φ and λ ∈ [0, 2π).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureTriple {
    #[serde(serialize_with = "sig12")]
    pub theta: f64,
    #[serde(serialize_with = "sig12")]
    pub phi: f64,
    #[serde(rename = "lambda", serialize_with = "sig12")]
    pub lam: f64,
}

impl FeatureTriple {
    pub fn new(theta: f64, phi: f64, lam: f64) -> Self {
        Self { theta, phi, lam }
    }

    pub fn in_range(&self) -> bool {
        (0.0..=PI).contains(&self.theta) && (0.0..TAU).contains(&self.phi) && (0.0..TAU).contains(&self.lam)
    }
}

/// Rounds to 12 significant digits.
pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn sig12<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig12(*x))
}

/// Half-wave-rectified spectral flux per STFT frame. Frame 0 is compared
/// against silence.
pub fn onset_envelope(samples: &[f64], cfg: &StftConfig) -> Result<Vec<f64>> {
    let mag = stft(samples, cfg)?.magnitudes();
    let mut prev = vec![0.0; cfg.n_bins()];
    Ok(mag
        .into_iter()
        .map(|frame| {
            let flux = frame.iter().zip(&prev).map(|(m, p)| (m - p).max(0.0)).sum();
            prev = frame;
            flux
        })
        .collect())
}

/// Heights of local maxima above `mean + 1σ`, at least `min_spacing` frames
/// apart (taller peaks win).
pub fn pick_peaks(env: &[f64], min_spacing: usize) -> Vec<f64> {
    if env.is_empty() {
        return Vec::new();
    }
    let n = env.len() as f64;
    let mean = env.iter().sum::<f64>() / n;
    let sd = (env.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n).sqrt();
    let threshold = mean + sd;

    let mut candidates: Vec<usize> = (0..env.len())
        .filter(|&t| {
            let left = t == 0 || env[t] > env[t - 1];
            let right = t + 1 == env.len() || env[t] >= env[t + 1];
            left && right && env[t] > threshold
        })
        .collect();
    candidates.sort_by(|&a, &b| env[b].total_cmp(&env[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for t in candidates {
        if kept.iter().all(|&k| k.abs_diff(t) >= min_spacing) {
            kept.push(t);
        }
    }
    kept.sort_unstable();
    kept.into_iter().map(|t| env[t]).collect()
}

/// `θ = π · (Σ peaks / max peak) / N`, clamped to [0, π]; 0 without peaks.
pub fn theta_from_onsets(peaks: &[f64]) -> f64 {
    let max = peaks.iter().copied().fold(0.0, f64::max);
    if peaks.is_empty() || max <= 0.0 {
        return 0.0;
    }
    let raw = peaks.iter().sum::<f64>() / max;
    (PI * raw / peaks.len() as f64).clamp(0.0, PI)
}

pub fn theta_from_percussive(perc: &AudioBuffer, cfg: &StftConfig) -> Result<f64> {
    let env = onset_envelope(&perc.samples, cfg)?;
    let spacing = (MIN_PEAK_SPACING_S * f64::from(perc.sample_rate) / cfg.hop as f64).ceil() as usize;
    Ok(theta_from_onsets(&pick_peaks(&env, spacing.max(1))))
}

/// Hann-windowed one-sided magnitude spectrum with bin frequencies in Hz.
fn magnitude_spectrum(buf: &AudioBuffer) -> (Vec<f64>, Vec<f64>) {
    let n = buf.len();
    if n < 2 {
        return (Vec::new(), Vec::new());
    }
    let win = hann(n);
    let mut spec: Vec<Complex64> =
        buf.samples.iter().zip(&win).map(|(&x, &w)| Complex64::new(x * w, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut spec);
    let fs = f64::from(buf.sample_rate);
    let bins = n / 2 + 1;
    let freqs = (0..bins).map(|k| k as f64 * fs / n as f64).collect();
    let mut mags: Vec<f64> = spec[..bins].iter().map(|c| c.norm()).collect();
    let floor = mags.iter().copied().fold(0.0, f64::max) * SPECTRAL_FLOOR;
    for m in &mut mags {
        if *m <= floor {
            *m = 0.0;
        }
    }
    (freqs, mags)
}

fn to_turn(freq: f64, nyquist: f64) -> f64 {
    let a = TAU * freq / nyquist;
    if a.is_finite() {
        a.rem_euclid(TAU)
    } else {
        0.0
    }
}

/// Magnitude-weighted mean frequency of the three strongest spectral peaks,
/// scaled so Nyquist maps to a full turn.
pub fn phi_from_harmonic(harm: &AudioBuffer) -> f64 {
    let (freqs, mags) = magnitude_spectrum(harm);
    let mut peaks: Vec<usize> = (0..mags.len())
        .filter(|&k| {
            let left = k == 0 || mags[k] > mags[k - 1];
            let right = k + 1 == mags.len() || mags[k] >= mags[k + 1];
            left && right && mags[k] > 0.0
        })
        .collect();
    peaks.sort_by(|&a, &b| mags[b].total_cmp(&mags[a]).then(a.cmp(&b)));
    peaks.truncate(PHI_PEAKS);
    let weight: f64 = peaks.iter().map(|&k| mags[k]).sum();
    if weight <= 0.0 {
        return 0.0;
    }
    let f_avg = peaks.iter().map(|&k| freqs[k] * mags[k]).sum::<f64>() / weight;
    to_turn(f_avg, harm.nyquist())
}

/// Spectral centroid `Σ f·|X| / Σ |X|`, scaled so Nyquist maps to a full turn.
pub fn lambda_from_harmonic(harm: &AudioBuffer) -> f64 {
    let (freqs, mags) = magnitude_spectrum(harm);
    let total: f64 = mags.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let centroid = freqs.iter().zip(&mags).map(|(f, m)| f * m).sum::<f64>() / total;
    to_turn(centroid, harm.nyquist())
}
