use std::f64::consts::PI;

use super::AudioBuffer;
use crate::error::{Error, Result};

/// Default low/mid/high split in Hz.
pub const DEFAULT_CUTOFFS: [f64; 2] = [200.0, 2000.0];

/// Section Qs of a 4th-order Butterworth response.
const BUTTERWORTH4_Q: [f64; 2] = [0.541_196_100_146_197, 1.306_562_964_876_376_6];

/// Max samples of odd-symmetric padding used by the forward-backward pass.
const PAD: usize = 512;

/// Direct-form-I biquad with `a0` normalized to 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    fn normalized(b: [f64; 3], a: [f64; 3]) -> Self {
        Self { b: [b[0] / a[0], b[1] / a[0], b[2] / a[0]], a: [a[1] / a[0], a[2] / a[0]] }
    }

    pub fn lowpass(cutoff: f64, sample_rate: f64, q: f64) -> Self {
        let w0 = 2.0 * PI * cutoff / sample_rate;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        Self::normalized(
            [(1.0 - cos) / 2.0, 1.0 - cos, (1.0 - cos) / 2.0],
            [1.0 + alpha, -2.0 * cos, 1.0 - alpha],
        )
    }

    pub fn highpass(cutoff: f64, sample_rate: f64, q: f64) -> Self {
        let w0 = 2.0 * PI * cutoff / sample_rate;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        Self::normalized(
            [(1.0 + cos) / 2.0, -(1.0 + cos), (1.0 + cos) / 2.0],
            [1.0 + alpha, -2.0 * cos, 1.0 - alpha],
        )
    }

    pub fn process(&self, input: &[f64]) -> Vec<f64> {
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        input
            .iter()
            .map(|&x| {
                let y = self.b[0] * x + self.b[1] * x1 + self.b[2] * x2 - self.a[0] * y1 - self.a[1] * y2;
                x2 = x1;
                x1 = x;
                y2 = y1;
                y1 = y;
                y
            })
            .collect()
    }
}

fn butterworth4(cutoff: f64, sample_rate: f64, highpass: bool) -> Vec<Biquad> {
    BUTTERWORTH4_Q
        .iter()
        .map(|&q| {
            if highpass {
                Biquad::highpass(cutoff, sample_rate, q)
            } else {
                Biquad::lowpass(cutoff, sample_rate, q)
            }
        })
        .collect()
}

/// Zero-phase application of a biquad cascade: forward pass, reversed
/// backward pass, with odd-symmetric edge padding.
fn filtfilt(sections: &[Biquad], x: &[f64]) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let pad = PAD.min(x.len() - 1);
    let (first, last) = (x[0], x[x.len() - 1]);
    let mut padded = Vec::with_capacity(x.len() + 2 * pad);
    padded.extend((1..=pad).rev().map(|i| 2.0 * first - x[i]));
    padded.extend_from_slice(x);
    padded.extend((1..=pad).map(|i| 2.0 * last - x[x.len() - 1 - i]));

    let run = |mut y: Vec<f64>| {
        for s in sections {
            y = s.process(&y);
        }
        y
    };
    let mut y = run(padded);
    y.reverse();
    let mut y = run(y);
    y.reverse();
    y[pad..pad + x.len()].to_vec()
}

/// Frequency-split versions of one buffer, lowest band first.
#[derive(Clone, Debug, PartialEq)]
pub struct BandSet {
    pub bands: Vec<AudioBuffer>,
    pub cutoffs: Vec<f64>,
}

/// Splits `buf` at the ascending `cutoffs` (Hz) into `cutoffs.len() + 1` bands:
/// a low-pass, band-passes between consecutive edges, and a high-pass. Each
/// edge is a 4th-order Butterworth applied forward and backward. No cutoffs
/// means a single pass-through band.
pub fn filter_bank(buf: &AudioBuffer, cutoffs: &[f64]) -> Result<BandSet> {
    let nyquist = buf.nyquist();
    if cutoffs.iter().any(|&c| !(c > 0.0 && c < nyquist)) {
        return Err(Error::Config(format!("cutoffs {cutoffs:?} must lie in (0, {nyquist}) Hz")));
    }
    if cutoffs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("cutoffs {cutoffs:?} must be strictly ascending")));
    }
    let fs = f64::from(buf.sample_rate);
    let n = cutoffs.len() + 1;
    let bands = (0..n)
        .map(|band| {
            let mut sections = Vec::new();
            if band > 0 {
                sections.extend(butterworth4(cutoffs[band - 1], fs, true));
            }
            if band < n - 1 {
                sections.extend(butterworth4(cutoffs[band], fs, false));
            }
            let samples = if sections.is_empty() { buf.samples.clone() } else { filtfilt(&sections, &buf.samples) };
            buf.with_samples(samples)
        })
        .collect();
    Ok(BandSet { bands, cutoffs: cutoffs.to_vec() })
}
