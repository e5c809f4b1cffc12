use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::AudioBuffer;
use crate::error::{Error, Result};

/// Reads 16/24-bit PCM or 32-bit float WAV, averaging channels to mono.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let reader = WavReader::open(path.as_ref())?;
    let spec = reader.spec();
    let channels = usize::from(spec.channels.max(1));
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, bits @ (16 | 24)) => {
            let scale = f64::from(1u32 << (bits - 1));
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| f64::from(v) / scale))
                .collect::<std::result::Result<_, _>>()?
        }
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()?,
        (format, bits) => {
            return Err(Error::UnsupportedWav(format!("{format:?} with {bits} bits per sample")))
        }
    };
    let samples = interleaved
        .chunks_exact(channels)
        .map(|frame| frame.iter().sum::<f64>() / channels as f64)
        .collect();
    AudioBuffer::new(samples, spec.sample_rate)
}

/// Writes a mono 16-bit PCM file (samples clamped to [−1, 1]).
pub fn write_wav(path: impl AsRef<Path>, buf: &AudioBuffer) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: buf.sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut w = WavWriter::create(path.as_ref(), spec)?;
    for &s in &buf.samples {
        w.write_sample((s.clamp(-1.0, 1.0) * 32767.0).round() as i16)?;
    }
    w.finalize()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_raw<S: hound::Sample + Copy>(path: &Path, spec: WavSpec, samples: &[S]) {
        let mut w = WavWriter::create(path, spec).unwrap();
        for &s in samples {
            w.write_sample(s).unwrap();
        }
        w.finalize().unwrap();
    }

    fn spec(channels: u16, bits: u16, format: SampleFormat) -> WavSpec {
        WavSpec { channels, sample_rate: 44_100, bits_per_sample: bits, sample_format: format }
    }

    #[test]
    fn one_second_of_silence() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("silence.wav");
        write_raw(&p, spec(1, 16, SampleFormat::Int), &vec![0i16; 44_100]);
        let buf = load_wav(&p).unwrap();
        assert_eq!(buf.sample_rate, 44_100);
        assert_eq!(buf.samples.len(), 44_100);
        assert!(buf.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn opposite_stereo_channels_cancel() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("stereo.wav");
        let frames: Vec<i16> = (0..1000).flat_map(|i| {
            let v = ((i * 37) % 2000 - 1000) as i16;
            [v, -v]
        }).collect();
        write_raw(&p, spec(2, 16, SampleFormat::Int), &frames);
        let buf = load_wav(&p).unwrap();
        assert_eq!(buf.samples.len(), 1000);
        assert!(buf.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn full_scale_square_wave_scaling() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("square.wav");
        let samples: Vec<i16> = (0..400).map(|i| if (i / 50) % 2 == 0 { 32767 } else { -32767 }).collect();
        write_raw(&p, spec(1, 16, SampleFormat::Int), &samples);
        let buf = load_wav(&p).unwrap();
        let level = 32767.0 / 32768.0;
        assert!(buf.samples.iter().all(|&s| s == level || s == -level));
    }

    #[test]
    fn float_and_24_bit_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f32.wav");
        write_raw(&p, spec(1, 32, SampleFormat::Float), &[0.5f32, -0.25]);
        assert_eq!(load_wav(&p).unwrap().samples, vec![0.5, -0.25]);
        let p = dir.path().join("i24.wav");
        write_raw(&p, spec(1, 24, SampleFormat::Int), &[1i32 << 22, -(1 << 23)]);
        assert_eq!(load_wav(&p).unwrap().samples, vec![0.5, -1.0]);
    }

    #[test]
    fn rejects_unsupported_and_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("u8.wav");
        write_raw(&p, spec(1, 8, SampleFormat::Int), &[0i8, 1]);
        assert!(matches!(load_wav(&p), Err(Error::UnsupportedWav(_))));
        let p = dir.path().join("junk.wav");
        std::fs::write(&p, b"RIFF0000WAVEjunkjunk").unwrap();
        assert!(load_wav(&p).is_err());
    }
}
