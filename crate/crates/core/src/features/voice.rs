//! Cycle-to-cycle perturbation and periodicity measures over a pitch track.

use serde::{Deserialize, Serialize};

use super::pitch::PitchTrack;
use crate::audio::AudioClip;
use crate::dsp::{frame_signal, percentile, WindowKind};
use crate::error::{Error, Result};
use crate::real::{mean, std_dev, Real};

/// Normalizer of the absolute-jitter sum. The default `M` divides a
/// sum of `M - 1` differences by `M`; `MMinusOne` gives the true mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum JitterDivisor {
    #[default]
    #[serde(rename = "M")]
    M,
    #[serde(rename = "M-1")]
    MMinusOne,
}

const HNR_CLAMP: f64 = 1e-6;

fn need(voiced: usize, needed: usize) -> Result<()> {
    if voiced < needed {
        Err(Error::InsufficientVoicing { voiced, needed })
    } else {
        Ok(())
    }
}

fn consecutive_abs_diff<T: Real>(v: &[T]) -> T {
    v.windows(2).map(|w| (w[0] - w[1]).abs()).sum()
}

/// Absolute jitter (seconds) of a voiced period sequence.
pub fn jitter_abs_periods<T: Real>(periods: &[T], divisor: JitterDivisor) -> Result<T> {
    need(periods.len(), 2)?;
    let m = periods.len();
    let d = match divisor {
        JitterDivisor::M => m,
        JitterDivisor::MMinusOne => m - 1,
    };
    Ok(consecutive_abs_diff(periods) / T::from_count(d))
}

/// Relative jitter (percent): summed consecutive differences over the sum
/// of the first `M - 1` periods.
pub fn jitter_rel_periods<T: Real>(periods: &[T]) -> Result<T> {
    need(periods.len(), 2)?;
    let denom: T = periods[..periods.len() - 1].iter().map(|p| p.abs()).sum();
    if denom <= T::zero() {
        return Err(Error::InsufficientVoicing { voiced: 0, needed: 2 });
    }
    Ok(T::lit(100.0) * consecutive_abs_diff(periods) / denom)
}

/// Shimmer in dB from per-frame peak amplitudes: `(20 / M) sum |log10(A_i / A_i+1)|`.
pub fn shimmer_db_amplitudes<T: Real>(amps: &[T]) -> Result<T> {
    need(amps.len(), 2)?;
    if let Some(i) = amps.iter().position(|&a| a <= T::zero()) {
        return Err(Error::ZeroAmplitudeFrame(i));
    }
    let sum: T = amps.windows(2).map(|w| (w[0] / w[1]).log10().abs()).sum();
    Ok(T::lit(20.0) * sum / T::from_count(amps.len()))
}

/// `(max - min) / (max + min)` of positive fundamental frequencies.
pub fn freq_modulation_f0<T: Real>(f0: &[T]) -> Result<T> {
    need(f0.len(), 1)?;
    let max = f0.iter().copied().fold(T::neg_infinity(), T::max);
    let min = f0.iter().copied().fold(T::infinity(), T::min);
    Ok((max - min) / (max + min))
}

/// 95th minus 5th percentile of the fundamental frequencies.
pub fn freq_range_f0<T: Real>(f0: &[T]) -> Result<T> {
    need(f0.len(), 1)?;
    Ok(percentile(f0, 95.0)? - percentile(f0, 5.0)?)
}

/// Harmonics-to-noise ratio in dB for one normalized autocorrelation peak.
pub fn hnr_db<T: Real>(r: T) -> T {
    let c = T::lit(HNR_CLAMP);
    let r = r.max(c).min(T::one() - c);
    T::lit(10.0) * (r / (T::one() - r)).log10()
}

/// Mean and population standard deviation of per-frame HNR.
pub fn hnr_stats<T: Real>(peaks: &[T]) -> Result<(T, T)> {
    need(peaks.len(), 1)?;
    let h: Vec<T> = peaks.iter().map(|&r| hnr_db(r)).collect();
    Ok((mean(&h).expect("non-empty"), std_dev(&h).expect("non-empty")))
}

pub fn jitter_abs<T: Real>(track: &PitchTrack<T>, divisor: JitterDivisor) -> Result<T> {
    jitter_abs_periods(&track.voiced_periods(), divisor)
}

pub fn jitter_rel<T: Real>(track: &PitchTrack<T>) -> Result<T> {
    jitter_rel_periods(&track.voiced_periods())
}

/// Peak absolute amplitude of every voiced frame.
pub fn voiced_amplitudes<T: Real>(clip: &AudioClip<T>, track: &PitchTrack<T>) -> Result<Vec<T>> {
    let frames = frame_signal(clip, WindowKind::Rect)?;
    if frames.len() != track.len() {
        return Err(Error::LengthMismatch { left: frames.len(), right: track.len() });
    }
    Ok(frames
        .iter()
        .zip(&track.voiced)
        .filter(|(_, &v)| v)
        .map(|(f, _)| f.iter().fold(T::zero(), |a, x| a.max(x.abs())))
        .collect())
}

pub fn shimmer_db<T: Real>(clip: &AudioClip<T>, track: &PitchTrack<T>) -> Result<T> {
    shimmer_db_amplitudes(&voiced_amplitudes(clip, track)?)
}

pub fn freq_modulation<T: Real>(track: &PitchTrack<T>) -> Result<T> {
    freq_modulation_f0(&track.voiced_f0())
}

pub fn freq_range<T: Real>(track: &PitchTrack<T>) -> Result<T> {
    freq_range_f0(&track.voiced_f0())
}

/// Segmental HNR statistics over the voiced frames of `track`.
pub fn hnr_segmental<T: Real>(track: &PitchTrack<T>) -> Result<(T, T)> {
    hnr_stats(&track.voiced_peak_corr())
}
