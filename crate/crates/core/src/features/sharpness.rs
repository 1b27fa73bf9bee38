//! Sharpness in acum from critical-band specific loudness.

use crate::dsp::Spectrogram;
use crate::error::{Error, Result};
use crate::real::Real;

pub const N_BARK_BANDS: usize = 24;
const LOUDNESS_EXPONENT: f64 = 0.23;

/// Critical-band rate in Bark.
pub fn hz_to_bark(f: f64) -> f64 {
    13.0 * (0.00076 * f).atan() + 3.5 * (f / 7500.0).powi(2).atan()
}

/// Sharpness weighting: 1 up to 15.8 Bark, rising exponentially above.
pub fn sharpness_weight(z: f64) -> f64 {
    if z <= 15.8 {
        1.0
    } else {
        0.15 * (0.42 * (z - 15.8)).exp() + 0.85
    }
}

/// Discrete weighted average `0.11 * sum L g(z) z / sum L` over `(z, L)` pairs
/// with unit band width. `None` if the loudness sum is zero.
pub fn sharpness_weighted<T: Real>(bands: &[(f64, T)]) -> Option<T> {
    let mut num = T::zero();
    let mut den = T::zero();
    for &(z, l) in bands {
        num = num + l * T::lit(sharpness_weight(z) * z);
        den = den + l;
    }
    (den > T::zero()).then(|| T::lit(0.11) * num / den)
}

/// Bark band (0..24) of each one-sided bin.
pub fn bin_bands(n_bins: usize, bin_hz: f64) -> Vec<usize> {
    (0..n_bins)
        .map(|k| (hz_to_bark(k as f64 * bin_hz).floor() as usize).min(N_BARK_BANDS - 1))
        .collect()
}

/// Specific loudness `(band power)^0.23` per Bark band.
pub fn specific_loudness<T: Real>(power: &[T], bands: &[usize]) -> [T; N_BARK_BANDS] {
    let mut acc = [T::zero(); N_BARK_BANDS];
    for (&p, &b) in power.iter().zip(bands) {
        acc[b] = acc[b] + p;
    }
    acc.map(|e| e.powf(T::lit(LOUDNESS_EXPONENT)))
}

/// Sharpness of one power frame, evaluated at band centres `z = b + 0.5`.
pub fn sharpness_frame<T: Real>(power: &[T], bands: &[usize]) -> Option<T> {
    let loud = specific_loudness(power, bands);
    let pairs: Vec<(f64, T)> = loud.iter().enumerate().map(|(b, &l)| (b as f64 + 0.5, l)).collect();
    sharpness_weighted(&pairs)
}

/// Mean per-frame sharpness; silent frames are skipped.
pub fn sharpness_acum<T: Real>(spec: &Spectrogram<T>) -> Result<T> {
    let bands = bin_bands(spec.n_bins(), spec.bin_hz());
    let (sum, count) = spec
        .power_frames()
        .filter_map(|p| sharpness_frame(p, &bands))
        .fold((T::zero(), 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        Err(Error::AllFramesSilent)
    } else {
        Ok(sum / T::from_count(count))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_masses() {
        assert!((sharpness_weighted(&[(10.0, 1.0f64)]).unwrap() - 1.1).abs() < 1e-12);
        assert!((sharpness_weighted(&[(2.0, 1.0f64), (7.0, 0.0)]).unwrap() - 0.22).abs() < 1e-12);
        assert!(sharpness_weighted::<f64>(&[(3.0, 0.0)]).is_none());
    }

    #[test]
    fn weight_is_continuous_at_knee() {
        assert_eq!(sharpness_weight(15.8), 1.0);
        assert!((sharpness_weight(15.8 + 1e-9) - 1.0).abs() < 1e-9);
        assert!(sharpness_weight(24.0) > 4.0);
    }

    #[test]
    fn bark_reference_points() {
        assert_eq!(hz_to_bark(0.0), 0.0);
        // about 8.5 Bark at 1 kHz for this approximation
        assert!((hz_to_bark(1000.0) - 8.53).abs() < 0.05);
        let bands = bin_bands(257, 11025.0 / 512.0);
        assert!(bands.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(bands[0], 0);
    }

    #[test]
    fn silent_frames_rejected() {
        let s = Spectrogram::from_magnitudes(&[vec![0.0f64; 257]], 512, 11025);
        assert!(matches!(sharpness_acum(&s), Err(Error::AllFramesSilent)));
    }
}
