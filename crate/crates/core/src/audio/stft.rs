use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StftConfig {
    pub window: usize,
    pub hop: usize,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self { window: 2048, hop: 512 }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 4 || !self.window.is_multiple_of(2) || self.hop == 0 || self.hop > self.window {
            return Err(Error::Config(format!(
                "stft window {} / hop {} (window must be even and >= 4, 0 < hop <= window)",
                self.window, self.hop
            )));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        self.window / 2 + 1
    }
}

/// Periodic Hann window.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect()
}

/// Centered STFT: `frames[t][k]` for the one-sided bins `0..=window/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrogram {
    pub frames: Vec<Vec<Complex64>>,
    pub config: StftConfig,
    pub signal_len: usize,
}

impl Spectrogram {
    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn magnitudes(&self) -> Vec<Vec<f64>> {
        self.frames.iter().map(|f| f.iter().map(|c| c.norm()).collect()).collect()
    }
}

fn padded_layout(len: usize, cfg: &StftConfig) -> (usize, usize) {
    let half = cfg.window / 2;
    let span = len + 2 * half;
    let n_frames = 1 + (span.saturating_sub(cfg.window)).div_ceil(cfg.hop);
    (n_frames, (n_frames - 1) * cfg.hop + cfg.window)
}

pub fn stft(samples: &[f64], cfg: &StftConfig) -> Result<Spectrogram> {
    cfg.validate()?;
    let half = cfg.window / 2;
    let (n_frames, total) = padded_layout(samples.len(), cfg);
    let mut padded = vec![0.0; total];
    padded[half..half + samples.len()].copy_from_slice(samples);

    let win = hann(cfg.window);
    let fft = FftPlanner::new().plan_fft_forward(cfg.window);
    let mut buf = vec![Complex64::new(0.0, 0.0); cfg.window];
    let frames = (0..n_frames)
        .map(|t| {
            let start = t * cfg.hop;
            for (i, b) in buf.iter_mut().enumerate() {
                *b = Complex64::new(padded[start + i] * win[i], 0.0);
            }
            fft.process(&mut buf);
            buf[..cfg.n_bins()].to_vec()
        })
        .collect();
    Ok(Spectrogram { frames, config: *cfg, signal_len: samples.len() })
}

/// Weighted overlap-add inverse of [`stft`].
pub fn istft(spec: &Spectrogram) -> Vec<f64> {
    let cfg = spec.config;
    let n = cfg.window;
    let half = n / 2;
    let (_, total) = padded_layout(spec.signal_len, &cfg);
    let win = hann(n);
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let mut out = vec![0.0; total];
    let mut norm = vec![0.0; total];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (t, frame) in spec.frames.iter().enumerate() {
        buf[..frame.len()].copy_from_slice(frame);
        for k in 1..half {
            buf[n - k] = frame[k].conj();
        }
        ifft.process(&mut buf);
        let start = t * cfg.hop;
        for i in 0..n {
            out[start + i] += buf[i].re / n as f64 * win[i];
            norm[start + i] += win[i] * win[i];
        }
    }
    out.iter()
        .zip(&norm)
        .skip(half)
        .take(spec.signal_len)
        .map(|(&y, &w)| if w > 1e-10 { y / w } else { 0.0 })
        .collect()
}
