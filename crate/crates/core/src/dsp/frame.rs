use serde::{Deserialize, Serialize};

use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::real::Real;

/// 40 ms at 11025 Hz.
pub const FRAME_LEN: usize = 441;
/// 10 ms at 11025 Hz is 110.25 samples; rounded down to an integer hop.
pub const HOP: usize = 110;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Hann,
    Rect,
}

/// Half-sample-offset Hann window, `sin^2(pi (n + 0.5) / len)`. It has no
/// zero endpoints, so weighted overlap-add can be normalized at every sample.
pub fn hann<T: Real>(len: usize) -> Vec<T> {
    (0..len)
        .map(|n| {
            let s = (std::f64::consts::PI * (n as f64 + 0.5) / len as f64).sin();
            T::lit(s * s)
        })
        .collect()
}

/// Fixed-length overlapping frames stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSeries<T> {
    data: Vec<T>,
    frame_len: usize,
    hop: usize,
    window: WindowKind,
    sample_rate_hz: u32,
}

impl<T: Real> FrameSeries<T> {
    pub fn len(&self) -> usize {
        self.data.len() / self.frame_len
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn window(&self) -> WindowKind {
        self.window
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn frame(&self, i: usize) -> &[T] {
        &self.data[i * self.frame_len..(i + 1) * self.frame_len]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, T> {
        self.data.chunks_exact(self.frame_len)
    }

    /// Sample offset of frame `i` in the source signal.
    pub fn start(&self, i: usize) -> usize {
        i * self.hop
    }
}

/// Number of frames for `n` samples: `floor((n - len) / hop) + 1`, or one
/// zero-padded frame when `n < len`.
pub fn frame_count(n: usize, frame_len: usize, hop: usize) -> usize {
    if n >= frame_len {
        (n - frame_len) / hop + 1
    } else {
        1
    }
}

pub fn frame_samples<T: Real>(
    samples: &[T],
    frame_len: usize,
    hop: usize,
    window: WindowKind,
    sample_rate_hz: u32,
) -> Result<FrameSeries<T>> {
    if samples.is_empty() {
        return Err(Error::EmptyClip);
    }
    assert!(frame_len > 0 && hop > 0, "frame_len and hop must be positive");
    let count = frame_count(samples.len(), frame_len, hop);
    let win = match window {
        WindowKind::Hann => Some(hann::<T>(frame_len)),
        WindowKind::Rect => None,
    };
    let mut data = vec![T::zero(); count * frame_len];
    for (i, dst) in data.chunks_exact_mut(frame_len).enumerate() {
        let start = i * hop;
        let end = (start + frame_len).min(samples.len());
        dst[..end - start].copy_from_slice(&samples[start..end]);
        if let Some(w) = &win {
            dst.iter_mut().zip(w).for_each(|(d, &w)| *d = *d * w);
        }
    }
    Ok(FrameSeries { data, frame_len, hop, window, sample_rate_hz })
}

/// Frames a canonical clip with the standard 441/110 layout.
pub fn frame_signal<T: Real>(clip: &AudioClip<T>, window: WindowKind) -> Result<FrameSeries<T>> {
    frame_samples(clip.samples(), FRAME_LEN, HOP, window, clip.sample_rate_hz())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn clip(n: usize) -> AudioClip<f64> {
        AudioClip::new((0..n).map(|i| (i as f64 * 0.01).sin()).collect(), 11025, "t").unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(frame_signal(&clip(441), WindowKind::Rect).unwrap().len(), 1);
        assert_eq!(frame_signal(&clip(551), WindowKind::Rect).unwrap().len(), 2);
        // floor((11025 - 441) / 110) + 1, evaluated by hand: 10584 / 110 = 96.2
        assert_eq!(frame_signal(&clip(11025), WindowKind::Rect).unwrap().len(), 97);
        assert_eq!(frame_signal(&clip(100), WindowKind::Rect).unwrap().len(), 1);
    }

    #[test]
    fn short_clip_is_zero_padded() {
        let fs = frame_signal(&clip(100), WindowKind::Rect).unwrap();
        assert_eq!(fs.frame(0).len(), FRAME_LEN);
        assert!(fs.frame(0)[100..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn empty_is_error() {
        let c = AudioClip::<f64>::new(vec![], 11025, "e").unwrap();
        assert!(matches!(frame_signal(&c, WindowKind::Rect), Err(Error::EmptyClip)));
    }

    #[test]
    fn hann_applied() {
        let c = AudioClip::new(vec![1.0f64; 441], 11025, "ones").unwrap();
        let fs = frame_signal(&c, WindowKind::Hann).unwrap();
        let w = hann::<f64>(441);
        assert_eq!(fs.frame(0), &w[..]);
        assert!(w.iter().all(|&v| v > 0.0 && v <= 1.0));
        assert!((w[220] - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn covers_every_sample_when_aligned(k in 0usize..40) {
            let n = FRAME_LEN + k * HOP;
            let fs = frame_signal(&clip(n), WindowKind::Rect).unwrap();
            let mut hits = vec![0u32; n];
            for i in 0..fs.len() {
                for j in fs.start(i)..fs.start(i) + FRAME_LEN {
                    hits[j] += 1;
                }
            }
            prop_assert!(hits.iter().all(|&h| h >= 1));
        }

        #[test]
        fn frames_have_fixed_length(n in 1usize..3000) {
            let fs = frame_signal(&clip(n), WindowKind::Rect).unwrap();
            prop_assert_eq!(fs.len(), frame_count(n, FRAME_LEN, HOP));
            prop_assert!(fs.iter().all(|f| f.len() == FRAME_LEN));
        }
    }
}
