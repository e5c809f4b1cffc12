//! Deterministic test signals and toy drum voices.

use std::f64::consts::PI;

use rand::Rng;

use super::AudioBuffer;
use crate::rng;

fn len_of(seconds: f64, sample_rate: u32) -> usize {
    (seconds * f64::from(sample_rate)).round() as usize
}

pub fn silence(seconds: f64, sample_rate: u32) -> AudioBuffer {
    AudioBuffer { samples: vec![0.0; len_of(seconds, sample_rate)], sample_rate }
}

pub fn sine(freq: f64, amp: f64, seconds: f64, sample_rate: u32) -> AudioBuffer {
    let fs = f64::from(sample_rate);
    let samples =
        (0..len_of(seconds, sample_rate)).map(|i| amp * (2.0 * PI * freq * i as f64 / fs).sin()).collect();
    AudioBuffer { samples, sample_rate }
}

/// Unit-height impulses at the given sample positions.
pub fn clicks(positions: &[usize], amp: f64, len: usize, sample_rate: u32) -> AudioBuffer {
    let mut samples = vec![0.0; len];
    for &p in positions.iter().filter(|&&p| p < len) {
        samples[p] = amp;
    }
    AudioBuffer { samples, sample_rate }
}

pub fn white_noise(amp: f64, seconds: f64, sample_rate: u32, seed: u64) -> AudioBuffer {
    let mut r = rng::seeded(seed);
    let samples = (0..len_of(seconds, sample_rate)).map(|_| amp * r.random_range(-1.0..1.0)).collect();
    AudioBuffer { samples, sample_rate }
}

/// Sample-wise sum; the result has the longer length.
pub fn mix(a: &AudioBuffer, b: &AudioBuffer) -> AudioBuffer {
    let n = a.len().max(b.len());
    let at = |buf: &AudioBuffer, i: usize| buf.samples.get(i).copied().unwrap_or(0.0);
    AudioBuffer { samples: (0..n).map(|i| at(a, i) + at(b, i)).collect(), sample_rate: a.sample_rate }
}

/// Adds `voice` into `dst` starting at `offset`.
pub fn place(dst: &mut AudioBuffer, voice: &AudioBuffer, offset: usize) {
    for (d, s) in dst.samples.iter_mut().skip(offset).zip(&voice.samples) {
        *d += s;
    }
}

/// Pitch-dropping sine with exponential decay.
pub fn kick(sample_rate: u32) -> AudioBuffer {
    let fs = f64::from(sample_rate);
    let mut phase = 0.0;
    let samples = (0..len_of(0.25, sample_rate))
        .map(|i| {
            let t = i as f64 / fs;
            let freq = 50.0 + 100.0 * (-t * 30.0).exp();
            phase += 2.0 * PI * freq / fs;
            0.9 * (-t * 12.0).exp() * phase.sin()
        })
        .collect();
    AudioBuffer { samples, sample_rate }
}

/// Noise burst over a 190 Hz body.
pub fn snare(sample_rate: u32, seed: u64) -> AudioBuffer {
    let fs = f64::from(sample_rate);
    let mut r = rng::seeded(seed);
    let samples = (0..len_of(0.2, sample_rate))
        .map(|i| {
            let t = i as f64 / fs;
            let env = (-t * 25.0).exp();
            env * (0.5 * r.random_range(-1.0..1.0) + 0.4 * (2.0 * PI * 190.0 * t).sin())
        })
        .collect();
    AudioBuffer { samples, sample_rate }
}

/// Short differentiated-noise tick, mostly above 5 kHz.
pub fn hihat(sample_rate: u32, seed: u64) -> AudioBuffer {
    let fs = f64::from(sample_rate);
    let mut r = rng::seeded(seed);
    let mut prev = 0.0;
    let samples = (0..len_of(0.08, sample_rate))
        .map(|i| {
            let t = i as f64 / fs;
            let n: f64 = r.random_range(-1.0..1.0);
            let hp = n - prev;
            prev = n;
            0.4 * (-t * 60.0).exp() * hp
        })
        .collect();
    AudioBuffer { samples, sample_rate }
}

/// Sustained tone with a soft attack.
pub fn pad(freq: f64, seconds: f64, sample_rate: u32) -> AudioBuffer {
    let fs = f64::from(sample_rate);
    let samples = (0..len_of(seconds, sample_rate))
        .map(|i| {
            let t = i as f64 / fs;
            let env = (t * 20.0).min(1.0);
            0.3 * env * ((2.0 * PI * freq * t).sin() + 0.5 * (4.0 * PI * freq * t).sin())
        })
        .collect();
    AudioBuffer { samples, sample_rate }
}

/// A one-measure groove: kick on 1 and 5, snare on 3 and 7, hats on every
/// eighth, over a sustained pad.
pub fn groove(seconds: f64, sample_rate: u32, seed: u64) -> AudioBuffer {
    let mut out = pad(110.0, seconds, sample_rate);
    for s in out.samples.iter_mut() {
        *s *= 0.5;
    }
    let step = out.len() / 8;
    for i in 0..8 {
        let at = i * step;
        match i {
            0 | 4 => place(&mut out, &kick(sample_rate), at),
            2 | 6 => place(&mut out, &snare(sample_rate, seed + i as u64), at),
            _ => {}
        }
        place(&mut out, &hihat(sample_rate, seed + 100 + i as u64), at);
    }
    let peak = out.samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak > 0.99 {
        for s in out.samples.iter_mut() {
            *s *= 0.99 / peak;
        }
    }
    out
}
