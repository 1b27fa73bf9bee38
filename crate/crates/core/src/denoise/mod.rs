//! STFT-domain noise suppression (log-spectral amplitude gain driven by a
//! minima-controlled noise tracker) and the signal-to-noise energy change
//! between a clip and its enhanced version.

mod lsa;
mod tracker;

use std::io::Write;

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

pub use lsa::{exp_int_e1, lsa_gain};

use crate::audio::AudioClip;
use crate::dsp::{hann, Stft, FRAME_LEN, HOP, N_BINS};
use crate::error::{Error, Result};
use crate::real::Real;
use tracker::NoiseTracker;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DenoiseConfig {
    /// Noise-averaging coefficient when speech is absent.
    pub alpha_d: f64,
    /// Decision-directed weight for the a-priori SNR.
    pub alpha_dd: f64,
    /// Presence threshold on smoothed power over its tracked minimum.
    pub delta: f64,
    pub minima_window: usize,
    pub g_min_db: f64,
    /// Temporal smoothing of the power used for minimum tracking.
    pub alpha_s: f64,
    /// Smoothing of the presence probability.
    pub alpha_p: f64,
    /// Bias compensation applied to the tracked minimum.
    pub min_bias: f64,
    pub csne_cap_db: f64,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        Self {
            alpha_d: 0.95,
            alpha_dd: 0.92,
            delta: 5.0,
            minima_window: 150,
            g_min_db: -25.0,
            alpha_s: 0.8,
            alpha_p: 0.2,
            min_bias: 1.66,
            csne_cap_db: 100.0,
        }
    }
}

impl DenoiseConfig {
    pub fn g_min(&self) -> f64 {
        10f64.powf(self.g_min_db / 20.0)
    }
}

/// Per-bin noise state after the most recent frame.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseEstimate<T> {
    pub psd: Vec<T>,
    pub presence_prob: Vec<T>,
    pub minima_window: usize,
}

/// Per-frame gains and presence probabilities recorded during [`denoise_traced`].
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseTrace<T> {
    pub gains: Vec<Vec<T>>,
    pub presence: Vec<Vec<T>>,
    pub final_estimate: Option<NoiseEstimate<T>>,
}

/// Frames `samples` with the Hann window, lets `gain_fn` choose a real gain
/// per bin from each frame's power spectrum, and resynthesizes by weighted
/// overlap-add normalized by the summed squared window. The output has the
/// input's length; with unit gains it reproduces the input.
pub fn apply_spectral_gains<T, F>(samples: &[T], mut gain_fn: F) -> Vec<T>
where
    T: Real,
    F: FnMut(usize, &[T]) -> Vec<T>,
{
    let n = samples.len();
    if n == 0 {
        return Vec::new();
    }
    let n_frames = if n > FRAME_LEN { (n - FRAME_LEN).div_ceil(HOP) + 1 } else { 1 };
    let padded_len = (n_frames - 1) * HOP + FRAME_LEN;
    let window = hann::<T>(FRAME_LEN);
    let mut out = vec![T::zero(); padded_len];
    let mut norm = vec![T::zero(); padded_len];
    let mut stft = Stft::<T>::new();
    let mut frame = vec![T::zero(); FRAME_LEN];
    for t in 0..n_frames {
        let start = t * HOP;
        for (i, f) in frame.iter_mut().enumerate() {
            *f = samples.get(start + i).copied().unwrap_or_else(T::zero) * window[i];
        }
        let spec = stft.forward(&frame);
        let power: Vec<T> = spec.iter().map(|c| c.norm_sqr()).collect();
        let gains = gain_fn(t, &power);
        debug_assert_eq!(gains.len(), N_BINS);
        let shaped: Vec<Complex<T>> = spec.iter().zip(&gains).map(|(c, &g)| c * g).collect();
        let y = stft.inverse(&shaped);
        for i in 0..FRAME_LEN {
            out[start + i] = out[start + i] + y[i] * window[i];
            norm[start + i] = norm[start + i] + window[i] * window[i];
        }
    }
    out.truncate(n);
    out.iter().zip(&norm).map(|(&o, &w)| if w > T::zero() { o / w } else { T::zero() }).collect()
}

/// Suppresses noise in a canonical clip; output length equals input length.
pub fn denoise<T: Real>(clip: &AudioClip<T>, cfg: &DenoiseConfig) -> Result<AudioClip<T>> {
    denoise_traced(clip, cfg, false).map(|(c, _)| c)
}

/// [`denoise`] that optionally records per-frame gains and presence probabilities.
pub fn denoise_traced<T: Real>(
    clip: &AudioClip<T>,
    cfg: &DenoiseConfig,
    record: bool,
) -> Result<(AudioClip<T>, DenoiseTrace<T>)> {
    if clip.is_empty() {
        return Err(Error::EmptyClip);
    }
    let one = T::one();
    let g_min = T::lit(cfg.g_min());
    let xi_min = g_min * g_min;
    let alpha_dd = T::lit(cfg.alpha_dd);
    let mut tracker: Option<NoiseTracker<T>> = None;
    // |S_hat|^2 / lambda from the previous frame, per bin
    let mut prev_snr = [one; N_BINS];
    let mut trace = DenoiseTrace { gains: Vec::new(), presence: Vec::new(), final_estimate: None };

    let out = apply_spectral_gains(clip.samples(), |_, power| {
        let tr = tracker.get_or_insert_with(|| NoiseTracker::new(cfg, power));
        let est = tr.update(power);
        let mut gains = Vec::with_capacity(power.len());
        for k in 0..power.len() {
            let lambda = est.psd[k].max(T::min_positive_value());
            let gamma = power[k] / lambda;
            let xi = (alpha_dd * prev_snr[k] + (one - alpha_dd) * (gamma - one).max(T::zero())).max(xi_min);
            let g_lsa = T::lit(lsa_gain(xi.to_f64_lossy(), gamma.to_f64_lossy()));
            let p = est.presence_prob[k];
            let g = (g_lsa.max(T::min_positive_value()).powf(p) * g_min.powf(one - p)).max(g_min).min(one);
            prev_snr[k] = g * g * gamma;
            gains.push(g);
        }
        if record {
            trace.gains.push(gains.clone());
            trace.presence.push(est.presence_prob.clone());
        }
        gains
    });
    if record {
        trace.final_estimate = tracker.map(|t| t.estimate);
    }
    Ok((clip.with_samples(out)?, trace))
}

/// Writes per-frame gains as CSV: `frame,bin_0,...,bin_256`.
pub fn write_gain_csv<T: Real, W: Write>(trace: &DenoiseTrace<T>, mut w: W) -> Result<()> {
    let header: Vec<String> = std::iter::once("frame".to_string()).chain((0..N_BINS).map(|k| format!("bin_{k}"))).collect();
    writeln!(w, "{}", header.join(","))?;
    for (t, row) in trace.gains.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|g| format!("{g}")).collect();
        writeln!(w, "{t},{}", cells.join(","))?;
    }
    Ok(())
}

/// Change in signal-to-noise energy in dB:
/// `10 log10(sum S'^2 / sum (S' - S)^2)`, clamped to `[-cap_db, cap_db]`.
/// Identical inputs give `cap_db`.
pub fn csne_db<T: Real>(original: &[T], enhanced: &[T], cap_db: f64) -> Result<f64> {
    if original.len() != enhanced.len() {
        return Err(Error::LengthMismatch { left: original.len(), right: enhanced.len() });
    }
    if original.is_empty() {
        return Err(Error::EmptyClip);
    }
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for (&s, &e) in original.iter().zip(enhanced) {
        let (s, e) = (s.to_f64_lossy(), e.to_f64_lossy());
        num += e * e;
        den += (e - s) * (e - s);
    }
    if den == 0.0 {
        return Ok(cap_db);
    }
    if num == 0.0 {
        return Ok(-cap_db);
    }
    Ok((10.0 * (num / den).log10()).clamp(-cap_db, cap_db))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use proptest::prelude::*;

    fn clip(x: Vec<f64>) -> AudioClip<f64> {
        AudioClip::new(x, 11025, "t").unwrap()
    }

    #[test]
    fn csne_examples() {
        let s = vec![0.1f64, -0.3, 0.2, 0.05];
        let twice: Vec<f64> = s.iter().map(|v| 2.0 * v).collect();
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        assert!((csne_db(&s, &twice, 100.0).unwrap() - 6.0206).abs() < 1e-4);
        assert_eq!(csne_db(&s, &s, 100.0).unwrap(), 100.0);
        assert!((csne_db(&s, &neg, 100.0).unwrap() + 6.0206).abs() < 1e-4);
        assert!(matches!(csne_db(&s, &s[..2], 100.0), Err(Error::LengthMismatch { .. })));
    }

    proptest! {
        #[test]
        fn csne_scale_covariant(
            pairs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..64),
            k in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
        ) {
            let s: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let e: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let ks: Vec<f64> = s.iter().map(|v| k * v).collect();
            let ke: Vec<f64> = e.iter().map(|v| k * v).collect();
            let a = csne_db(&s, &e, 100.0).unwrap();
            let b = csne_db(&ks, &ke, 100.0).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn unit_gain_reconstructs() {
        let x = synth::white_noise(0.3, 5000, 1);
        let y = apply_spectral_gains(&x, |_, p| vec![1.0; p.len()]);
        assert_eq!(y.len(), x.len());
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-6);
        }
        // shorter than one frame
        let x = synth::white_noise(0.3, 100, 2);
        let y = apply_spectral_gains(&x, |_, p| vec![1.0; p.len()]);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn zeros_stay_zero() {
        let out = denoise(&clip(vec![0.0; 4000]), &DenoiseConfig::default()).unwrap();
        assert!(out.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_is_error() {
        assert!(matches!(denoise(&clip(vec![]), &DenoiseConfig::default()), Err(Error::EmptyClip)));
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    #[test]
    fn noise_only_is_attenuated() {
        let x = synth::white_noise(0.2, 6 * 11025, 8);
        let out = denoise(&clip(x.clone()), &DenoiseConfig::default()).unwrap();
        let half = x.len() / 2;
        let ratio = rms(&out.samples()[half..]) / rms(&x[half..]);
        assert!(ratio <= 0.25, "rms ratio {ratio}");
    }

    #[test]
    fn tone_band_ratio_increases() {
        let n = 4 * 11025;
        let mut x = synth::tone(500.0, 0.4, n, 11025);
        for (a, b) in x.iter_mut().zip(synth::white_noise(0.4 * 0.5f64.sqrt(), n, 9)) {
            *a += b;
        }
        let band_ratio = |y: &[f64]| {
            let frames = crate::dsp::frame_signal(&clip(y.to_vec()), crate::dsp::WindowKind::Hann).unwrap();
            let spec = crate::dsp::stft(&frames).unwrap();
            let tone_bin = (500.0 / spec.bin_hz()).round() as usize;
            let (mut inside, mut outside) = (0.0, 0.0);
            for t in 0..spec.n_frames() {
                for (k, p) in spec.power(t).iter().enumerate() {
                    if k.abs_diff(tone_bin) <= 2 {
                        inside += p;
                    } else {
                        outside += p;
                    }
                }
            }
            inside / outside
        };
        let out = denoise(&clip(x.clone()), &DenoiseConfig::default()).unwrap();
        assert!(band_ratio(out.samples()) > band_ratio(&x));
    }

    #[test]
    fn gain_floor_and_probabilities() {
        let mut x = synth::tone(500.0, 0.5, 3 * 11025, 11025);
        for (a, b) in x.iter_mut().zip(synth::white_noise(0.2, 3 * 11025, 5)) {
            *a += b;
        }
        let cfg = DenoiseConfig::default();
        let (out, trace) = denoise_traced(&clip(x.clone()), &cfg, true).unwrap();
        assert_eq!(out.len(), x.len());
        assert!(out.samples().iter().all(|v| v.is_finite()));
        let floor = cfg.g_min() - 1e-12;
        assert!(trace.gains.iter().flatten().all(|&g| g >= floor && g <= 1.0));
        assert!(trace.presence.iter().flatten().all(|&p| (0.0..=1.0).contains(&p)));
        let est = trace.final_estimate.clone().unwrap();
        assert!(est.psd.iter().all(|&v| v >= 0.0));
        let mut csv = Vec::new();
        write_gain_csv(&trace, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), trace.gains.len() + 1);
    }
}
