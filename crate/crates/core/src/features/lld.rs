//! Frame-level low-level descriptors and their clip-level functionals.

use super::mfcc::{MelBank, N_MFCC};
use super::pitch::{frame_pitch, PitchConfig};
use super::spectral::{centroid_frame, entropy_frame, flatness_frame, flux_pair};
use crate::audio::AudioClip;
use crate::dsp::{frame_signal, stft, WindowKind};
use crate::error::Result;
use crate::real::Real;

/// Column order of [`LldMatrix`].
pub const LLD_NAMES: [&str; 21] = [
    "energy", "zcr", "mfcc_0", "mfcc_1", "mfcc_2", "mfcc_3", "mfcc_4", "mfcc_5", "mfcc_6", "mfcc_7", "mfcc_8",
    "mfcc_9", "mfcc_10", "mfcc_11", "mfcc_12", "centroid", "flux", "entropy", "flatness", "f0", "voicing_prob",
];
pub const N_LLD: usize = LLD_NAMES.len();
pub const FUNCTIONAL_NAMES: [&str; 5] = ["mean", "std", "min", "max", "range"];
/// Length of the flattened functional vector.
pub const N_FUNCTIONALS: usize = N_LLD * FUNCTIONAL_NAMES.len();

/// One row of [`N_LLD`] descriptors per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LldMatrix<T> {
    pub rows: Vec<[T; N_LLD]>,
}

impl<T: Real> LldMatrix<T> {
    pub fn n_frames(&self) -> usize {
        self.rows.len()
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        self.rows.iter().map(|r| r[c]).collect()
    }

    /// Mean, population std, min, max and range of every column, grouped by column.
    pub fn functionals(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(N_FUNCTIONALS);
        for c in 0..N_LLD {
            let col = self.column(c);
            if col.is_empty() {
                out.extend([T::zero(); 5]);
                continue;
            }
            let n = T::from_count(col.len());
            let mean = col.iter().copied().sum::<T>() / n;
            let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
            let min = col.iter().copied().fold(T::infinity(), T::min);
            let max = col.iter().copied().fold(T::neg_infinity(), T::max);
            out.extend([mean, var.sqrt(), min, max, max - min]);
        }
        out
    }

    pub fn functional_names() -> Vec<String> {
        LLD_NAMES
            .iter()
            .flat_map(|c| FUNCTIONAL_NAMES.iter().map(move |f| format!("{c}_{f}")))
            .collect()
    }
}

/// Extracts the descriptor matrix of a canonical clip. Energy, zero-crossing
/// rate and pitch use rectangular frames; spectral columns use Hann frames.
pub fn extract_lld<T: Real>(clip: &AudioClip<T>, pitch: &PitchConfig) -> Result<LldMatrix<T>> {
    let rect = frame_signal(clip, WindowKind::Rect)?;
    let spec = stft(&frame_signal(clip, WindowKind::Hann)?)?;
    let bank = MelBank::<T>::standard();
    let rate = f64::from(clip.sample_rate_hz());
    let mut rows = Vec::with_capacity(rect.len());
    for (t, frame) in rect.iter().enumerate() {
        let n = T::from_count(frame.len());
        let energy = crate::real::energy(frame) / n;
        let crossings = frame.windows(2).filter(|w| (w[0] >= T::zero()) != (w[1] >= T::zero())).count();
        let zcr = T::from_count(crossings) / T::from_count(frame.len() - 1);
        let power = spec.power(t);
        let mfcc = bank.mfcc(power);
        let flux = if t == 0 { T::zero() } else { flux_pair(spec.power(t - 1), power) };
        let (f0, corr) = frame_pitch(frame, rate, pitch);

        let mut row = [T::zero(); N_LLD];
        row[0] = energy;
        row[1] = zcr;
        row[2..2 + N_MFCC].copy_from_slice(&mfcc);
        row[15] = centroid_frame(spec.mag(t)).unwrap_or_else(T::zero);
        row[16] = flux;
        row[17] = entropy_frame(power).unwrap_or_else(T::zero);
        row[18] = flatness_frame(power).unwrap_or_else(T::zero);
        row[19] = f0;
        row[20] = corr.max(T::zero()).min(T::one());
        rows.push(row);
    }
    Ok(LldMatrix { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn silence() {
        let clip = AudioClip::new(vec![0.0f64; 4000], 11025, "s").unwrap();
        let m = extract_lld(&clip, &PitchConfig::default()).unwrap();
        let c0_floor = 26f64.sqrt() * super::super::mfcc::LOG_FLOOR.ln();
        for r in &m.rows {
            assert_eq!(r[0], 0.0);
            assert!((r[2] - c0_floor).abs() < 1e-9);
            assert_eq!(r[19], 0.0);
        }
    }

    #[test]
    fn range_is_max_minus_min() {
        let clip = AudioClip::new(synth::bursty_noise(11025, 4), 11025, "b").unwrap();
        let m = extract_lld(&clip, &PitchConfig::default()).unwrap();
        let f = m.functionals();
        assert_eq!(f.len(), N_FUNCTIONALS);
        assert_eq!(LldMatrix::<f64>::functional_names().len(), N_FUNCTIONALS);
        for c in 0..N_LLD {
            let g = &f[c * 5..c * 5 + 5];
            assert_eq!(g[4], g[3] - g[2]);
            assert!(g[2] <= g[0] && g[0] <= g[3]);
        }
        assert!(f.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn zcr_of_alternating_signal() {
        let x: Vec<f64> = (0..441).map(|i| if i % 2 == 0 { 0.5 } else { -0.5 }).collect();
        let clip = AudioClip::new(x, 11025, "z").unwrap();
        let m = extract_lld(&clip, &PitchConfig::default()).unwrap();
        assert_eq!(m.rows[0][1], 1.0);
    }
}
