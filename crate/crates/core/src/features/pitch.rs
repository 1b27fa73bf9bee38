//! Autocorrelation pitch tracking on 40 ms frames.

use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;
use crate::dsp::{autocorrelation_unchecked, frame_signal, WindowKind};
use crate::error::Result;
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PitchConfig {
    pub f0_min_hz: f64,
    pub f0_max_hz: f64,
    /// Minimum normalized autocorrelation at the chosen lag.
    pub voicing_threshold: f64,
    /// Frames with mean-square energy at or below this are unvoiced.
    pub energy_floor: f64,
    /// The smallest-lag local maximum within this fraction of the global
    /// maximum wins, which avoids picking a sub-harmonic.
    pub octave_tolerance: f64,
}

impl Default for PitchConfig {
    fn default() -> Self {
        Self { f0_min_hz: 50.0, f0_max_hz: 500.0, voicing_threshold: 0.45, energy_floor: 1e-7, octave_tolerance: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PitchTrack<T> {
    /// 0 where unvoiced.
    pub f0_hz: Vec<T>,
    /// `1 / f0` for voiced frames, 0 otherwise.
    pub period_s: Vec<T>,
    pub voiced: Vec<bool>,
    /// Normalized autocorrelation at the selected lag (0 for silent frames).
    pub peak_corr: Vec<T>,
}

impl<T: Real> PitchTrack<T> {
    /// Builds a track from fundamental frequencies; non-positive entries are unvoiced.
    pub fn from_f0(f0_hz: &[T]) -> Self {
        let voiced: Vec<bool> = f0_hz.iter().map(|&f| f > T::zero()).collect();
        let on = |v: bool, x: T| if v { x } else { T::zero() };
        Self {
            f0_hz: f0_hz.iter().zip(&voiced).map(|(&f, &v)| on(v, f)).collect(),
            period_s: f0_hz.iter().zip(&voiced).map(|(&f, &v)| on(v, f.recip())).collect(),
            peak_corr: voiced.iter().map(|&v| on(v, T::one())).collect(),
            voiced,
        }
    }

    /// Builds a fully voiced track from vocal periods in seconds.
    pub fn from_periods(periods_s: &[T]) -> Self {
        let f0: Vec<T> = periods_s.iter().map(|p| p.recip()).collect();
        let mut t = Self::from_f0(&f0);
        t.period_s = periods_s.to_vec();
        t
    }

    pub fn len(&self) -> usize {
        self.voiced.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voiced.is_empty()
    }

    /// Number of voiced frames.
    pub fn voiced_count(&self) -> usize {
        self.voiced.iter().filter(|&&v| v).count()
    }

    pub fn voiced_f0(&self) -> Vec<T> {
        self.select(&self.f0_hz)
    }

    pub fn voiced_periods(&self) -> Vec<T> {
        self.select(&self.period_s)
    }

    pub fn voiced_peak_corr(&self) -> Vec<T> {
        self.select(&self.peak_corr)
    }

    fn select(&self, v: &[T]) -> Vec<T> {
        v.iter().zip(&self.voiced).filter(|(_, &on)| on).map(|(&x, _)| x).collect()
    }
}

/// Per-frame pitch estimate: `(f0_hz, peak_corr)` with `f0_hz = 0` if unvoiced.
pub(crate) fn frame_pitch<T: Real>(frame: &[T], rate: f64, cfg: &PitchConfig) -> (T, T) {
    let n = frame.len();
    let ms = crate::real::energy(frame).to_f64_lossy() / n as f64;
    if ms <= cfg.energy_floor {
        return (T::zero(), T::zero());
    }
    let min_lag = ((rate / cfg.f0_max_hz).floor() as usize).max(2);
    let max_lag = ((rate / cfg.f0_min_hz).ceil() as usize).min(n - 2);
    if min_lag >= max_lag {
        return (T::zero(), T::zero());
    }
    // one extra lag each side for interpolation
    let lo = min_lag - 1;
    let r = autocorrelation_unchecked(frame, lo, max_lag + 1);
    let at = |lag: usize| r[lag - lo];
    let global = (min_lag..=max_lag).map(at).fold(T::neg_infinity(), T::max);
    if global <= T::zero() {
        return (T::zero(), global.max(T::zero()));
    }
    let accept = global * T::lit(cfg.octave_tolerance);
    let best = (min_lag..=max_lag)
        .find(|&l| {
            let v = at(l);
            v >= accept && v >= at(l - 1) && v >= at(l + 1)
        })
        .unwrap_or_else(|| (min_lag..=max_lag).find(|&l| at(l) == global).expect("max exists"));
    let peak = at(best);
    if peak < T::lit(cfg.voicing_threshold) {
        return (T::zero(), peak);
    }
    let (a, b, c) = (at(best - 1), peak, at(best + 1));
    let denom = a - b - b + c;
    let half = T::lit(0.5);
    let shift = if denom < T::zero() { (half * (a - c) / denom).max(-half).min(half) } else { T::zero() };
    let f0 = T::lit(rate) / (T::from_count(best) + shift);
    if f0 < T::lit(cfg.f0_min_hz) || f0 > T::lit(cfg.f0_max_hz) {
        return (T::zero(), peak);
    }
    (f0, peak)
}

/// Tracks the fundamental frequency of a canonical clip frame by frame.
pub fn track_pitch<T: Real>(clip: &AudioClip<T>, cfg: &PitchConfig) -> Result<PitchTrack<T>> {
    let frames = frame_signal(clip, WindowKind::Rect)?;
    let rate = f64::from(clip.sample_rate_hz());
    let mut track = PitchTrack { f0_hz: Vec::new(), period_s: Vec::new(), voiced: Vec::new(), peak_corr: Vec::new() };
    for frame in frames.iter() {
        let (f0, corr) = frame_pitch(frame, rate, cfg);
        let voiced = f0 > T::zero();
        track.f0_hz.push(f0);
        track.period_s.push(if voiced { f0.recip() } else { T::zero() });
        track.voiced.push(voiced);
        track.peak_corr.push(corr);
    }
    Ok(track)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::percentile;
    use crate::synth;

    fn clip(x: Vec<f64>) -> AudioClip<f64> {
        AudioClip::new(x, 11025, "p").unwrap()
    }

    #[test]
    fn sawtooth_200hz() {
        let t = track_pitch(&clip(synth::sawtooth(200.0, 0.8, 11025, 11025)), &PitchConfig::default()).unwrap();
        let f0 = t.voiced_f0();
        assert!(f0.len() > 90);
        let med = percentile(&f0, 50.0).unwrap();
        assert!((198.0..=202.0).contains(&med), "{med}");
        for (p, f) in t.period_s.iter().zip(&t.f0_hz) {
            if *f > 0.0 {
                assert!((p - 1.0 / f).abs() < 1e-9);
                assert!((50.0..=500.0).contains(f));
            }
        }
        assert_eq!(t.voiced_count(), t.voiced.iter().filter(|&&v| v).count());
    }

    #[test]
    fn white_noise_mostly_unvoiced() {
        for seed in 0..20 {
            let t = track_pitch(&clip(synth::white_noise(0.3, 11025, seed)), &PitchConfig::default()).unwrap();
            let unvoiced = t.len() - t.voiced_count();
            assert!(unvoiced as f64 >= 0.9 * t.len() as f64, "seed {seed}");
        }
    }

    #[test]
    fn silence_all_unvoiced() {
        let t = track_pitch(&clip(vec![0.0; 11025]), &PitchConfig::default()).unwrap();
        assert_eq!(t.voiced_count(), 0);
    }

    #[test]
    fn tracks_range_of_tones() {
        for f in [60.0, 110.0, 250.0, 440.0] {
            let t = track_pitch(&clip(synth::tone(f, 0.5, 11025, 11025)), &PitchConfig::default()).unwrap();
            let med = percentile(&t.voiced_f0(), 50.0).unwrap();
            assert!((med - f).abs() / f < 0.01, "{f}: {med}");
        }
    }
}
