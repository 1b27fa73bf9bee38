//! Mel filter bank and cepstral coefficients.

use crate::dsp::dct_2;
use crate::real::Real;

pub const N_MEL_FILTERS: usize = 26;
pub const N_MFCC: usize = 13;
pub const MEL_LOW_HZ: f64 = 50.0;
pub const MEL_HIGH_HZ: f64 = 5512.5;
/// Floor on filter energies before the logarithm.
pub const LOG_FLOOR: f64 = 1e-10;

pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular filters on a one-sided power spectrum, stored row-major.
#[derive(Debug, Clone)]
pub struct MelBank<T> {
    weights: Vec<T>,
    n_bins: usize,
    n_filters: usize,
    centres_hz: Vec<f64>,
}

impl<T: Real> MelBank<T> {
    pub fn new(n_filters: usize, n_bins: usize, bin_hz: f64, low_hz: f64, high_hz: f64) -> Self {
        let (lo, hi) = (hz_to_mel(low_hz), hz_to_mel(high_hz));
        let edges: Vec<f64> = (0..n_filters + 2)
            .map(|i| mel_to_hz(lo + (hi - lo) * i as f64 / (n_filters + 1) as f64))
            .collect();
        let mut weights = vec![T::zero(); n_filters * n_bins];
        for m in 0..n_filters {
            let (l, c, r) = (edges[m], edges[m + 1], edges[m + 2]);
            for k in 0..n_bins {
                let f = k as f64 * bin_hz;
                let w = if f > l && f <= c {
                    (f - l) / (c - l)
                } else if f > c && f < r {
                    (r - f) / (r - c)
                } else {
                    0.0
                };
                weights[m * n_bins + k] = T::lit(w);
            }
        }
        Self { weights, n_bins, n_filters, centres_hz: edges[1..=n_filters].to_vec() }
    }

    /// The 26-filter bank spanning 50–5512.5 Hz for a 512-point FFT at 11025 Hz.
    pub fn standard() -> Self {
        Self::new(N_MEL_FILTERS, crate::dsp::N_BINS, 11025.0 / crate::dsp::FFT_SIZE as f64, MEL_LOW_HZ, MEL_HIGH_HZ)
    }

    pub fn n_filters(&self) -> usize {
        self.n_filters
    }

    pub fn centres_hz(&self) -> &[f64] {
        &self.centres_hz
    }

    pub fn filter(&self, m: usize) -> &[T] {
        &self.weights[m * self.n_bins..(m + 1) * self.n_bins]
    }

    pub fn energies(&self, power: &[T]) -> Vec<T> {
        assert_eq!(power.len(), self.n_bins);
        self.weights
            .chunks_exact(self.n_bins)
            .map(|w| w.iter().zip(power).fold(T::zero(), |a, (&w, &p)| a + w * p))
            .collect()
    }

    /// First [`N_MFCC`] orthonormal DCT-II coefficients of the log filter energies.
    pub fn mfcc(&self, power: &[T]) -> Vec<T> {
        let floor = T::lit(LOG_FLOOR);
        let logs: Vec<T> = self.energies(power).iter().map(|e| e.max(floor).ln()).collect();
        dct_2(&logs, N_MFCC.min(logs.len())).expect("keep within length")
    }
}
