//! Voice-quality and spectral features for mood classification, plus the
//! frame-level descriptor set they are fused with.

mod lld;
mod mfcc;
mod pitch;
mod sharpness;
mod spectral;
mod vector;
mod voice;

use serde::{Deserialize, Serialize};

pub use lld::{extract_lld, LldMatrix, FUNCTIONAL_NAMES, LLD_NAMES, N_FUNCTIONALS, N_LLD};
pub use mfcc::{hz_to_mel, mel_to_hz, MelBank, N_MEL_FILTERS, N_MFCC};
pub use pitch::{track_pitch, PitchConfig, PitchTrack};
pub use sharpness::{
    bin_bands, hz_to_bark, sharpness_acum, sharpness_frame, sharpness_weight, sharpness_weighted, specific_loudness,
    N_BARK_BANDS,
};
pub use spectral::{
    centroid_frame, entropy_frame, flatness_frame, flux_pair, spectral_centroid, spectral_centroid_hz, spectral_entropy,
    spectral_flatness, spectral_flux, FLATNESS_FLOOR,
};
pub use vector::{assemble_feature_vector, FeatureVector, ZNorm, DEFAULT_KEEP};
pub use voice::{
    freq_modulation, freq_modulation_f0, freq_range, freq_range_f0, hnr_db, hnr_segmental, hnr_stats, jitter_abs,
    jitter_abs_periods, jitter_rel, jitter_rel_periods, shimmer_db, shimmer_db_amplitudes, voiced_amplitudes,
    JitterDivisor,
};

use crate::audio::AudioClip;
use crate::dsp::{frame_signal, stft, WindowKind};
use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub pitch: PitchConfig,
    pub jitter_divisor: JitterDivisor,
    /// DCT coefficients kept from the descriptor functionals (capped at their count).
    pub keep: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self { pitch: PitchConfig::default(), jitter_divisor: JitterDivisor::M, keep: DEFAULT_KEEP }
    }
}

impl FeatureConfig {
    pub fn effective_keep(&self) -> usize {
        self.keep.min(N_FUNCTIONALS)
    }
}

/// The twelve curated scalars. Features that cannot be computed (too few
/// voiced frames, silent input) are reported as 0 and named in `flags`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CuratedFeatures<T> {
    pub jitter_abs_s: T,
    pub jitter_rel_pct: T,
    pub shimmer_db: T,
    pub freq_modulation: T,
    pub freq_range_hz: T,
    pub hnr_mean_db: T,
    pub hnr_std_db: T,
    pub spectral_centroid: T,
    /// Centroid scaled to Hz; reported alongside, not part of [`Self::to_vec`].
    pub spectral_centroid_hz: T,
    pub spectral_flux: T,
    pub spectral_entropy: T,
    pub spectral_flatness: T,
    pub sharpness_acum: T,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl<T: Real> CuratedFeatures<T> {
    pub const NAMES: [&'static str; 12] = [
        "jitter_abs_s",
        "jitter_rel_pct",
        "shimmer_db",
        "freq_modulation",
        "freq_range_hz",
        "hnr_mean_db",
        "hnr_std_db",
        "spectral_centroid",
        "spectral_flux",
        "spectral_entropy",
        "spectral_flatness",
        "sharpness_acum",
    ];

    pub fn zeros() -> Self {
        let z = T::zero();
        Self {
            jitter_abs_s: z,
            jitter_rel_pct: z,
            shimmer_db: z,
            freq_modulation: z,
            freq_range_hz: z,
            hnr_mean_db: z,
            hnr_std_db: z,
            spectral_centroid: z,
            spectral_centroid_hz: z,
            spectral_flux: z,
            spectral_entropy: z,
            spectral_flatness: z,
            sharpness_acum: z,
            flags: Vec::new(),
        }
    }

    /// Values in [`Self::NAMES`] order.
    pub fn to_vec(&self) -> Vec<T> {
        vec![
            self.jitter_abs_s,
            self.jitter_rel_pct,
            self.shimmer_db,
            self.freq_modulation,
            self.freq_range_hz,
            self.hnr_mean_db,
            self.hnr_std_db,
            self.spectral_centroid,
            self.spectral_flux,
            self.spectral_entropy,
            self.spectral_flatness,
            self.sharpness_acum,
        ]
    }
}

fn or_flag<T: Real>(r: Result<T>, name: &str, flags: &mut Vec<String>) -> Result<T> {
    match r {
        Ok(v) => Ok(v),
        Err(e @ (Error::InsufficientVoicing { .. }
        | Error::ZeroAmplitudeFrame(_)
        | Error::AllFramesSilent
        | Error::TooFewFrames { .. })) => {
            flags.push(format!("{name}: {e}"));
            Ok(T::zero())
        }
        Err(e) => Err(e),
    }
}

/// Computes the curated features of a canonical clip.
pub fn compute_curated<T: Real>(clip: &AudioClip<T>, cfg: &FeatureConfig) -> Result<CuratedFeatures<T>> {
    if clip.is_empty() {
        return Err(Error::EmptyClip);
    }
    let track = track_pitch(clip, &cfg.pitch)?;
    let spec = stft(&frame_signal(clip, WindowKind::Hann)?)?;
    let mut flags = Vec::new();
    let f = &mut flags;
    let (hnr_mean, hnr_std) = match hnr_segmental(&track) {
        Ok(v) => v,
        Err(e) => {
            f.push(format!("hnr: {e}"));
            (T::zero(), T::zero())
        }
    };
    let mut out = CuratedFeatures {
        jitter_abs_s: or_flag(jitter_abs(&track, cfg.jitter_divisor), "jitter_abs_s", f)?,
        jitter_rel_pct: or_flag(jitter_rel(&track), "jitter_rel_pct", f)?,
        shimmer_db: or_flag(shimmer_db(clip, &track), "shimmer_db", f)?,
        freq_modulation: or_flag(freq_modulation(&track), "freq_modulation", f)?,
        freq_range_hz: or_flag(freq_range(&track), "freq_range_hz", f)?,
        hnr_mean_db: hnr_mean,
        hnr_std_db: hnr_std,
        spectral_centroid: or_flag(spectral_centroid(&spec), "spectral_centroid", f)?,
        spectral_centroid_hz: T::zero(),
        spectral_flux: or_flag(spectral_flux(&spec), "spectral_flux", f)?,
        spectral_entropy: or_flag(spectral_entropy(&spec), "spectral_entropy", f)?,
        spectral_flatness: or_flag(spectral_flatness(&spec), "spectral_flatness", f)?,
        sharpness_acum: or_flag(sharpness_acum(&spec), "sharpness_acum", f)?,
        flags: Vec::new(),
    };
    out.spectral_centroid_hz = out.spectral_centroid * T::lit(spec.bin_hz());
    out.flags = flags;
    Ok(out)
}

/// Curated features plus the fused feature vector of one clip or segment.
pub fn clip_features<T: Real>(clip: &AudioClip<T>, cfg: &FeatureConfig) -> Result<(CuratedFeatures<T>, FeatureVector<T>)> {
    let curated = compute_curated(clip, cfg)?;
    let lld = extract_lld(clip, &cfg.pitch)?;
    let vector = assemble_feature_vector(&curated, &lld, cfg.effective_keep())?;
    Ok((curated, vector))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn clip(x: Vec<f64>) -> AudioClip<f64> {
        AudioClip::new(x, 11025, "c").unwrap()
    }

    #[test]
    fn silence_flags_everything_but_stays_finite() {
        let c = compute_curated(&clip(vec![0.0; 11025]), &FeatureConfig::default()).unwrap();
        assert!(c.to_vec().iter().all(|v| *v == 0.0));
        assert!(!c.flags.is_empty());
    }

    #[test]
    fn voiced_clip_values_in_range() {
        let mut x = synth::sawtooth(180.0, 0.5, 2 * 11025, 11025);
        for (a, b) in x.iter_mut().zip(synth::white_noise(0.02, 2 * 11025, 1)) {
            *a += b;
        }
        let c = compute_curated(&clip(x), &FeatureConfig::default()).unwrap();
        assert!(c.flags.is_empty(), "{:?}", c.flags);
        assert!((0.0..=1.0).contains(&c.freq_modulation));
        assert!((0.0..=1.0).contains(&c.spectral_entropy));
        assert!((0.0..=1.0).contains(&c.spectral_flatness));
        assert!(c.to_vec().iter().all(|v| v.is_finite()));
        assert!(c.hnr_mean_db > 10.0);
    }

    #[test]
    fn fused_vector_layout() {
        let x = synth::sawtooth(150.0, 0.5, 11025, 11025);
        let (_, v) = clip_features(&clip(x), &FeatureConfig::default()).unwrap();
        assert_eq!(v.len(), N_FUNCTIONALS + 12);
        assert_eq!(v.names.len(), v.len());
    }

    #[test]
    fn works_in_single_precision() {
        let x: Vec<f32> = synth::sawtooth(200.0, 0.5, 11025, 11025).iter().map(|&v| v as f32).collect();
        let c = compute_curated(&AudioClip::new(x, 11025, "f").unwrap(), &FeatureConfig::default()).unwrap();
        assert!(c.flags.is_empty());
        assert!((c.freq_range_hz as f64) < 5.0);
    }
}
