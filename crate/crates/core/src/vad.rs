//! Per-frame speech/non-speech decisions from the posterior SNR against a
//! minimum-statistics noise floor, and silence suppression.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;
use crate::dsp::{frame_count, FrameSeries};
use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VadConfig {
    /// Sliding window for the noise-floor minimum, in frames.
    pub window_frames: usize,
    pub threshold_db: f64,
    pub hangover_frames: usize,
    pub epsilon: f64,
    /// First-order smoothing coefficient applied to frame energy before the minimum.
    pub smoothing: f64,
}

impl Default for VadConfig {
    fn default() -> Self {
        Self { window_frames: 100, threshold_db: 6.0, hangover_frames: 8, epsilon: 1e-10, smoothing: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VadDecision<T> {
    pub speech_flags: Vec<bool>,
    pub posterior_snr_db: Vec<T>,
    pub noise_floor: Vec<T>,
    /// Mean-square frame energy.
    pub energy: Vec<T>,
    pub frame_len: usize,
    pub hop: usize,
}

impl<T: Real> VadDecision<T> {
    /// A decision marking every frame as speech; used for material that has
    /// already been silence-suppressed.
    pub fn all_speech(n_frames: usize, frame_len: usize, hop: usize) -> Self {
        Self {
            speech_flags: vec![true; n_frames],
            posterior_snr_db: vec![T::zero(); n_frames],
            noise_floor: vec![T::zero(); n_frames],
            energy: vec![T::zero(); n_frames],
            frame_len,
            hop,
        }
    }

    pub fn len(&self) -> usize {
        self.speech_flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speech_flags.is_empty()
    }

    pub fn speech_count(&self) -> usize {
        self.speech_flags.iter().filter(|&&f| f).count()
    }

    pub fn speech_fraction(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.speech_count() as f64 / self.len() as f64
        }
    }
}

/// Running minimum over the last `window` values.
pub(crate) fn sliding_min<T: Real>(values: &[T], window: usize) -> Vec<T> {
    let window = window.max(1);
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut out = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        while dq.back().is_some_and(|&j| values[j] >= v) {
            dq.pop_back();
        }
        dq.push_back(i);
        if dq.front().is_some_and(|&j| j + window <= i) {
            dq.pop_front();
        }
        out.push(values[*dq.front().expect("non-empty")]);
    }
    out
}

/// Frames should be rectangular-windowed.
pub fn detect_speech<T: Real>(frames: &FrameSeries<T>, cfg: &VadConfig) -> VadDecision<T> {
    let eps = T::lit(cfg.epsilon);
    let alpha = T::lit(cfg.smoothing);
    let energy: Vec<T> = frames
        .iter()
        .map(|f| crate::real::energy(f) / T::from_count(f.len()))
        .collect();

    let mut smoothed = Vec::with_capacity(energy.len());
    let mut s = energy.first().copied().unwrap_or_else(T::zero);
    for &e in &energy {
        s = alpha * s + (T::one() - alpha) * e;
        smoothed.push(s);
    }
    let noise_floor = sliding_min(&smoothed, cfg.window_frames);

    let ten = T::lit(10.0);
    let posterior_snr_db: Vec<T> = energy
        .iter()
        .zip(&noise_floor)
        .map(|(&e, &n)| ten * (e.max(eps) / n.max(eps)).log10())
        .collect();

    let threshold = T::lit(cfg.threshold_db);
    let mut speech_flags = Vec::with_capacity(energy.len());
    let mut hang = 0usize;
    for &snr in &posterior_snr_db {
        if snr > threshold {
            hang = cfg.hangover_frames;
            speech_flags.push(true);
        } else if hang > 0 {
            hang -= 1;
            speech_flags.push(true);
        } else {
            speech_flags.push(false);
        }
    }

    VadDecision {
        speech_flags,
        posterior_snr_db,
        noise_floor,
        energy,
        frame_len: frames.frame_len(),
        hop: frames.hop(),
    }
}

/// Sample ranges kept by [`suppress_silence`]: each speech frame contributes
/// its first `hop` samples, the final frame contributes all of its samples.
pub fn speech_sample_ranges<T: Real>(n_samples: usize, decision: &VadDecision<T>) -> Vec<std::ops::Range<usize>> {
    let last = decision.len().saturating_sub(1);
    let mut ranges: Vec<std::ops::Range<usize>> = Vec::new();
    for (t, _) in decision.speech_flags.iter().enumerate().filter(|(_, &f)| f) {
        let start = (t * decision.hop).min(n_samples);
        let span = if t == last { decision.frame_len.max(n_samples - start) } else { decision.hop };
        let end = (start + span).min(n_samples);
        match ranges.last_mut() {
            Some(r) if r.end == start => r.end = end,
            _ => ranges.push(start..end),
        }
    }
    ranges
}

pub fn suppress_silence<T: Real>(clip: &AudioClip<T>, decision: &VadDecision<T>) -> Result<AudioClip<T>> {
    let expected = frame_count(clip.len(), decision.frame_len, decision.hop);
    if decision.len() != expected {
        return Err(Error::LengthMismatch { left: expected, right: decision.len() });
    }
    if decision.speech_count() == 0 {
        return Err(Error::NoSpeechDetected);
    }
    let samples = clip.samples();
    let out: Vec<T> = speech_sample_ranges(samples.len(), decision)
        .into_iter()
        .flat_map(|r| samples[r].iter().copied())
        .collect();
    clip.with_samples(out)
}
