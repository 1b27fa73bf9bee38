//! Clip data model, WAV ingestion and canonicalization to the analysis rate.

use std::path::Path;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::resample::Resampler;

/// Every downstream constant (frame sizes, Bark band edges) assumes this rate.
pub const CANONICAL_RATE_HZ: u32 = 11_025;

/// Mono PCM clip with amplitudes in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip<T> {
    samples: Vec<T>,
    sample_rate_hz: u32,
    source_id: String,
}

impl<T: Real> AudioClip<T> {
    /// Builds a clip, clamping amplitudes into `[-1, 1]`. Non-finite samples
    /// and a zero sample rate are rejected.
    pub fn new(samples: Vec<T>, sample_rate_hz: u32, source_id: impl Into<String>) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::InvalidClip("sample rate must be positive".into()));
        }
        let mut samples = samples;
        for (i, s) in samples.iter_mut().enumerate() {
            if !s.is_finite() {
                return Err(Error::InvalidClip(format!("sample {i} is not finite")));
            }
            *s = s.max(-T::one()).min(T::one());
        }
        Ok(Self { samples, sample_rate_hz, source_id: source_id.into() })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate_hz)
    }

    pub fn is_canonical(&self) -> bool {
        self.sample_rate_hz == CANONICAL_RATE_HZ
    }

    /// Same rate and id, new sample content.
    pub fn with_samples(&self, samples: Vec<T>) -> Result<Self> {
        Self::new(samples, self.sample_rate_hz, self.source_id.clone())
    }
}

/// Reads a RIFF/WAVE file (integer PCM 8/16/24/32-bit or IEEE float, 1–2
/// channels). Channels are averaged; the file's sample rate is kept.
pub fn load_wav<T: Real>(path: impl AsRef<Path>) -> Result<AudioClip<T>> {
    let path = path.as_ref();
    let reader = hound::WavReader::open(path).map_err(map_hound)?;
    let source_id = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    decode(reader, source_id)
}

/// Like [`load_wav`] but from an in-memory byte stream.
pub fn read_wav<T: Real, R: std::io::Read>(reader: R, source_id: &str) -> Result<AudioClip<T>> {
    let reader = hound::WavReader::new(reader).map_err(map_hound)?;
    decode(reader, source_id.to_string())
}

fn decode<T: Real, R: std::io::Read>(mut reader: hound::WavReader<R>, source_id: String) -> Result<AudioClip<T>> {
    let spec = reader.spec();
    let channels = usize::from(spec.channels);
    if !(1..=2).contains(&channels) {
        return Err(Error::UnsupportedEncoding(format!("{channels} channels")));
    }
    let interleaved: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Float => {
            if spec.bits_per_sample != 32 {
                return Err(Error::UnsupportedEncoding(format!("{}-bit float", spec.bits_per_sample)));
            }
            reader
                .samples::<f32>()
                .map(|s| s.map(f64::from).map_err(map_hound))
                .collect::<Result<_>>()?
        }
        hound::SampleFormat::Int => {
            let bits = spec.bits_per_sample;
            if !matches!(bits, 8 | 16 | 24 | 32) {
                return Err(Error::UnsupportedEncoding(format!("{bits}-bit integer PCM")));
            }
            let scale = f64::from(1u32 << (bits - 1));
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| f64::from(v) / scale).map_err(map_hound))
                .collect::<Result<_>>()?
        }
    };
    if !interleaved.len().is_multiple_of(channels) {
        return Err(Error::MalformedWav("data chunk ends mid-frame".into()));
    }
    let mono = interleaved
        .chunks_exact(channels)
        .map(|ch| {
            let m = ch.iter().sum::<f64>() / channels as f64;
            T::lit(m.clamp(-1.0, 1.0))
        })
        .collect();
    AudioClip::new(mono, spec.sample_rate, source_id)
}

fn map_hound(e: hound::Error) -> Error {
    match e {
        hound::Error::Unsupported => Error::UnsupportedEncoding("compressed or unknown format tag".into()),
        hound::Error::IoError(io) if io.kind() == std::io::ErrorKind::NotFound => Error::Io(io),
        other => Error::MalformedWav(other.to_string()),
    }
}

/// Quantizes one amplitude to 16-bit PCM (inverse of the `/32768` read scaling).
pub fn quantize_i16<T: Real>(x: T) -> i16 {
    let v = (x.to_f64_lossy() * 32768.0).round();
    v.clamp(-32768.0, 32767.0) as i16
}

/// Writes the clip as 16-bit PCM mono at the clip's sample rate.
pub fn write_wav<T: Real>(clip: &AudioClip<T>, path: impl AsRef<Path>) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate_hz(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(map_hound)?;
    for &s in clip.samples() {
        writer.write_sample(quantize_i16(s)).map_err(map_hound)?;
    }
    writer.finalize().map_err(map_hound)
}

/// Resamples to [`CANONICAL_RATE_HZ`]. A clip already at the canonical rate
/// is returned unchanged.
pub fn canonicalize<T: Real>(clip: &AudioClip<T>) -> Result<AudioClip<T>> {
    if clip.is_empty() {
        return Err(Error::EmptyClip);
    }
    if clip.is_canonical() {
        return Ok(clip.clone());
    }
    let resampler = Resampler::new(clip.sample_rate_hz(), CANONICAL_RATE_HZ);
    let out = resampler.process(clip.samples());
    AudioClip::new(out, CANONICAL_RATE_HZ, clip.source_id())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_pcm16(path: &Path, rate: u32, channels: u16, data: &[i16]) {
        let spec = hound::WavSpec { channels, sample_rate: rate, bits_per_sample: 16, sample_format: hound::SampleFormat::Int };
        let mut w = hound::WavWriter::create(path, spec).unwrap();
        for &d in data {
            w.write_sample(d).unwrap();
        }
        w.finalize().unwrap();
    }

    #[test]
    fn pcm16_scaling() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.wav");
        write_pcm16(&p, 11025, 1, &[0, 16384, -16384]);
        let clip: AudioClip<f64> = load_wav(&p).unwrap();
        assert_eq!(clip.samples(), &[0.0, 0.5, -0.5]);
        assert_eq!(clip.sample_rate_hz(), 11025);
        assert_eq!(clip.source_id(), "a.wav");
    }

    #[test]
    fn stereo_is_averaged() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.wav");
        let l = quantize_i16(0.4f64);
        let r = quantize_i16(0.2f64);
        let data: Vec<i16> = (0..100).flat_map(|_| [l, r]).collect();
        write_pcm16(&p, 22050, 2, &data);
        let clip: AudioClip<f64> = load_wav(&p).unwrap();
        assert_eq!(clip.len(), 100);
        for &s in clip.samples() {
            assert!((s - 0.3).abs() < 1.0 / 32768.0);
        }
    }

    #[test]
    fn duration_times_rate() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("long.wav");
        write_pcm16(&p, 44100, 1, &vec![0i16; 44100 * 30]);
        let clip: AudioClip<f32> = load_wav(&p).unwrap();
        assert_eq!(clip.len(), 1_323_000);
        assert_eq!(clip.sample_rate_hz(), 44100);
    }

    #[test]
    fn other_depths_and_float() {
        let dir = tempfile::tempdir().unwrap();
        for (bits, fmt, val) in [
            (8u16, hound::SampleFormat::Int, 64i32),
            (24, hound::SampleFormat::Int, 1 << 22),
            (32, hound::SampleFormat::Float, 0),
        ] {
            let p = dir.path().join(format!("d{bits}.wav"));
            let spec = hound::WavSpec { channels: 1, sample_rate: 8000, bits_per_sample: bits, sample_format: fmt };
            let mut w = hound::WavWriter::create(&p, spec).unwrap();
            if fmt == hound::SampleFormat::Float {
                w.write_sample(0.5f32).unwrap();
            } else if bits == 8 {
                w.write_sample(val as i8).unwrap();
            } else {
                w.write_sample(val).unwrap();
            }
            w.finalize().unwrap();
            let clip: AudioClip<f64> = load_wav(&p).unwrap();
            assert_eq!(clip.samples(), &[0.5], "{bits}-bit");
        }
    }

    #[test]
    fn malformed_and_missing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.wav");
        std::fs::write(&p, b"RIFF\x10\x00\x00\x00WAVEjunkjunk").unwrap();
        assert!(matches!(load_wav::<f64>(&p), Err(Error::MalformedWav(_))));
        assert!(load_wav::<f64>(dir.path().join("nope.wav")).is_err());
    }

    #[test]
    fn compressed_format_is_unsupported() {
        // fmt chunk with format tag 0x0055 (MPEG layer 3)
        let mut b = Vec::new();
        b.extend_from_slice(b"RIFF");
        b.extend_from_slice(&(4u32 + 8 + 16 + 8 + 4).to_le_bytes());
        b.extend_from_slice(b"WAVEfmt ");
        b.extend_from_slice(&16u32.to_le_bytes());
        b.extend_from_slice(&0x0055u16.to_le_bytes());
        b.extend_from_slice(&1u16.to_le_bytes());
        b.extend_from_slice(&11025u32.to_le_bytes());
        b.extend_from_slice(&11025u32.to_le_bytes());
        b.extend_from_slice(&1u16.to_le_bytes());
        b.extend_from_slice(&8u16.to_le_bytes());
        b.extend_from_slice(b"data");
        b.extend_from_slice(&4u32.to_le_bytes());
        b.extend_from_slice(&[0, 0, 0, 0]);
        let r = read_wav::<f64, _>(std::io::Cursor::new(b), "mp3");
        assert!(matches!(r, Err(Error::UnsupportedEncoding(_))), "{r:?}");
    }

    #[test]
    fn canonical_clip_is_returned_unchanged() {
        let clip = AudioClip::new(vec![0.1f64, -0.2, 0.3], CANONICAL_RATE_HZ, "x").unwrap();
        assert_eq!(canonicalize(&clip).unwrap(), clip);
    }

    #[test]
    fn empty_clip_rejected() {
        let clip = AudioClip::<f64>::new(vec![], 44100, "x").unwrap();
        assert!(matches!(canonicalize(&clip), Err(Error::EmptyClip)));
    }

    #[test]
    fn decimation_length() {
        let clip = AudioClip::new(vec![0.0f64; 44100], 44100, "x").unwrap();
        let out = canonicalize(&clip).unwrap();
        assert!((out.len() as i64 - 11025).abs() <= 1);
        assert_eq!(out.sample_rate_hz(), CANONICAL_RATE_HZ);
    }

    #[test]
    fn constructor_clamps_and_rejects_nan() {
        let c = AudioClip::new(vec![1.5f64, -2.0], 11025, "x").unwrap();
        assert_eq!(c.samples(), &[1.0, -1.0]);
        assert!(AudioClip::new(vec![f64::NAN], 11025, "x").is_err());
    }
}
