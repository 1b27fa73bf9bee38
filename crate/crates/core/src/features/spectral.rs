//! Frame-level spectral shape descriptors averaged over a clip.

use crate::dsp::Spectrogram;
use crate::error::{Error, Result};
use crate::real::Real;

/// Per-bin floor applied before the geometric mean in [`flatness_frame`].
pub const FLATNESS_FLOOR: f64 = 1e-12;

/// Magnitude-weighted mean bin index, or `None` for an all-zero frame.
pub fn centroid_frame<T: Real>(mag: &[T]) -> Option<T> {
    let total: T = mag.iter().copied().sum();
    if total <= T::zero() {
        return None;
    }
    let weighted: T = mag.iter().enumerate().map(|(k, &m)| T::from_count(k) * m).sum();
    Some(weighted / total)
}

/// Power spectrum scaled to unit sum; a silent frame stays all-zero.
fn normalized<T: Real>(power: &[T]) -> Vec<T> {
    let total: T = power.iter().copied().sum();
    if total <= T::zero() {
        vec![T::zero(); power.len()]
    } else {
        power.iter().map(|&p| p / total).collect()
    }
}

/// L2 distance between the unit-sum power spectra of two frames.
pub fn flux_pair<T: Real>(prev: &[T], next: &[T]) -> T {
    normalized(prev)
        .iter()
        .zip(normalized(next))
        .map(|(&a, b)| (a - b) * (a - b))
        .sum::<T>()
        .sqrt()
}

/// Shannon entropy of the unit-sum power spectrum divided by `ln(n_bins)`.
pub fn entropy_frame<T: Real>(power: &[T]) -> Option<T> {
    let total: T = power.iter().copied().sum();
    if total <= T::zero() || power.len() < 2 {
        return None;
    }
    let h: T = power
        .iter()
        .map(|&p| {
            let q = p / total;
            if q > T::zero() {
                -q * q.ln()
            } else {
                T::zero()
            }
        })
        .sum();
    Some(h / T::from_count(power.len()).ln())
}

/// Geometric over arithmetic mean of the power bins.
pub fn flatness_frame<T: Real>(power: &[T]) -> Option<T> {
    let total: T = power.iter().copied().sum();
    if total <= T::zero() {
        return None;
    }
    let n = T::from_count(power.len());
    let floor = T::lit(FLATNESS_FLOOR);
    let log_mean = power.iter().map(|&p| p.max(floor).ln()).sum::<T>() / n;
    let am = total / n;
    Some((log_mean.exp() / am).min(T::one()))
}

fn mean_over<T: Real>(values: impl Iterator<Item = Option<T>>) -> Result<T> {
    let (sum, count) = values.flatten().fold((T::zero(), 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        Err(Error::AllFramesSilent)
    } else {
        Ok(sum / T::from_count(count))
    }
}

/// Mean per-frame centroid in bin-index units; silent frames are skipped.
pub fn spectral_centroid<T: Real>(spec: &Spectrogram<T>) -> Result<T> {
    mean_over(spec.mag_frames().map(centroid_frame))
}

/// [`spectral_centroid`] scaled to Hz.
pub fn spectral_centroid_hz<T: Real>(spec: &Spectrogram<T>) -> Result<T> {
    Ok(spectral_centroid(spec)? * T::lit(spec.bin_hz()))
}

/// Mean flux over consecutive frame pairs.
pub fn spectral_flux<T: Real>(spec: &Spectrogram<T>) -> Result<T> {
    let n = spec.n_frames();
    if n < 2 {
        return Err(Error::TooFewFrames { got: n, needed: 2 });
    }
    let total: T = (1..n).map(|t| flux_pair(spec.power(t - 1), spec.power(t))).sum();
    Ok(total / T::from_count(n - 1))
}

pub fn spectral_entropy<T: Real>(spec: &Spectrogram<T>) -> Result<T> {
    mean_over(spec.power_frames().map(entropy_frame))
}

pub fn spectral_flatness<T: Real>(spec: &Spectrogram<T>) -> Result<T> {
    mean_over(spec.power_frames().map(flatness_frame))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::AudioClip;
    use crate::dsp::{frame_signal, stft, WindowKind};
    use crate::synth;

    fn spec(rows: Vec<Vec<f64>>) -> Spectrogram<f64> {
        Spectrogram::from_magnitudes(&rows, 512, 11025)
    }

    fn point(bin: usize, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[bin] = 1.0;
        v
    }

    #[test]
    fn centroid_examples() {
        assert_eq!(spectral_centroid(&spec(vec![point(5, 257)])).unwrap(), 5.0);
        let mut two = vec![0.0; 257];
        two[2] = 1.0;
        two[4] = 1.0;
        assert_eq!(spectral_centroid(&spec(vec![two, vec![0.0; 257]])).unwrap(), 3.0);
        assert!(matches!(spectral_centroid(&spec(vec![vec![0.0; 257]])), Err(Error::AllFramesSilent)));
        let hz = spectral_centroid_hz(&spec(vec![point(5, 257)])).unwrap();
        assert!((hz - 5.0 * 11025.0 / 512.0).abs() < 1e-9);
    }

    #[test]
    fn flux_examples() {
        assert_eq!(spectral_flux(&spec(vec![point(3, 257); 5])).unwrap(), 0.0);
        let alt: Vec<Vec<f64>> = (0..6).map(|t| point(if t % 2 == 0 { 3 } else { 9 }, 257)).collect();
        assert!((spectral_flux(&spec(alt)).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!(matches!(spectral_flux(&spec(vec![point(1, 257)])), Err(Error::TooFewFrames { .. })));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(spectral_entropy(&spec(vec![point(7, 257)])).unwrap(), 0.0);
        assert!((spectral_entropy(&spec(vec![vec![0.3; 257]])).unwrap() - 1.0).abs() < 1e-12);
        let mut two = vec![0.0; 257];
        two[10] = 1.0;
        two[20] = 1.0;
        let e = spectral_entropy(&spec(vec![two])).unwrap();
        assert!((e - 2f64.ln() / 257f64.ln()).abs() < 1e-12);
        assert!((e - 0.1249).abs() < 5e-5);
    }

    #[test]
    fn flatness_examples() {
        assert!((spectral_flatness(&spec(vec![vec![0.5; 257]])).unwrap() - 1.0).abs() < 1e-12);
        assert!(spectral_flatness(&spec(vec![point(4, 257)])).unwrap() < 1e-9);

        let noise = AudioClip::new(synth::white_noise(0.3, 2 * 11025, 3), 11025, "n").unwrap();
        let s = stft(&frame_signal(&noise, WindowKind::Hann).unwrap()).unwrap();
        assert!(spectral_flatness(&s).unwrap() >= 0.5);
        let tone = AudioClip::new(synth::tone(1000.0, 0.5, 2 * 11025, 11025), 11025, "t").unwrap();
        let s = stft(&frame_signal(&tone, WindowKind::Hann).unwrap()).unwrap();
        assert!(spectral_flatness(&s).unwrap() <= 0.1);
    }
}
