use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::frame::FrameSeries;
use crate::error::{Error, Result};
use crate::real::Real;

/// Next power of two above the 441-sample frame.
pub const FFT_SIZE: usize = 512;
/// One-sided bin count, `FFT_SIZE / 2 + 1`.
pub const N_BINS: usize = FFT_SIZE / 2 + 1;

/// Forward/inverse real-signal transform of size [`FFT_SIZE`] with reusable plans.
pub struct Stft<T: Real> {
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    buf: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Real> Default for Stft<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Stft<T> {
    pub fn new() -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(FFT_SIZE);
        let inverse = planner.plan_fft_inverse(FFT_SIZE);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self {
            forward,
            inverse,
            buf: vec![Complex::new(T::zero(), T::zero()); FFT_SIZE],
            scratch: vec![Complex::new(T::zero(), T::zero()); scratch_len],
        }
    }

    /// One-sided complex spectrum of a zero-padded frame.
    pub fn forward(&mut self, frame: &[T]) -> Vec<Complex<T>> {
        assert!(frame.len() <= FFT_SIZE);
        for (i, b) in self.buf.iter_mut().enumerate() {
            *b = Complex::new(frame.get(i).copied().unwrap_or_else(T::zero), T::zero());
        }
        self.forward.process_with_scratch(&mut self.buf, &mut self.scratch);
        self.buf[..N_BINS].to_vec()
    }

    /// Real signal of length [`FFT_SIZE`] from a one-sided spectrum.
    pub fn inverse(&mut self, bins: &[Complex<T>]) -> Vec<T> {
        assert_eq!(bins.len(), N_BINS);
        self.buf[..N_BINS].copy_from_slice(bins);
        for k in 1..FFT_SIZE - N_BINS + 1 {
            self.buf[FFT_SIZE - k] = bins[k].conj();
        }
        // DC and Nyquist of a real signal are real
        self.buf[0].im = T::zero();
        self.buf[N_BINS - 1].im = T::zero();
        self.inverse.process_with_scratch(&mut self.buf, &mut self.scratch);
        let scale = T::from_count(FFT_SIZE).recip();
        self.buf.iter().map(|c| c.re * scale).collect()
    }
}

/// Per-frame one-sided magnitude and power spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram<T> {
    mag: Vec<T>,
    power: Vec<T>,
    n_bins: usize,
    fft_size: usize,
    sample_rate_hz: u32,
}

impl<T: Real> Spectrogram<T> {
    /// Builds a spectrogram from explicit magnitude rows (all rows must share a length).
    pub fn from_magnitudes(rows: &[Vec<T>], fft_size: usize, sample_rate_hz: u32) -> Self {
        let n_bins = rows.first().map_or(fft_size / 2 + 1, Vec::len);
        let mut mag = Vec::with_capacity(rows.len() * n_bins);
        for r in rows {
            assert_eq!(r.len(), n_bins, "ragged spectrogram rows");
            mag.extend(r.iter().map(|m| m.abs()));
        }
        let power = mag.iter().map(|&m| m * m).collect();
        Self { mag, power, n_bins, fft_size, sample_rate_hz }
    }

    /// Builds a spectrogram from power rows; magnitudes are their square roots.
    pub fn from_powers(rows: &[Vec<T>], fft_size: usize, sample_rate_hz: u32) -> Self {
        let mags: Vec<Vec<T>> = rows.iter().map(|r| r.iter().map(|p| p.max(T::zero()).sqrt()).collect()).collect();
        let mut s = Self::from_magnitudes(&mags, fft_size, sample_rate_hz);
        s.power = rows.iter().flat_map(|r| r.iter().map(|p| p.max(T::zero()))).collect();
        s
    }

    pub fn n_frames(&self) -> usize {
        self.mag.len() / self.n_bins.max(1)
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn bin_hz(&self) -> f64 {
        f64::from(self.sample_rate_hz) / self.fft_size as f64
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn mag(&self, frame: usize) -> &[T] {
        &self.mag[frame * self.n_bins..(frame + 1) * self.n_bins]
    }

    pub fn power(&self, frame: usize) -> &[T] {
        &self.power[frame * self.n_bins..(frame + 1) * self.n_bins]
    }

    pub fn power_frames(&self) -> std::slice::ChunksExact<'_, T> {
        self.power.chunks_exact(self.n_bins)
    }

    pub fn mag_frames(&self) -> std::slice::ChunksExact<'_, T> {
        self.mag.chunks_exact(self.n_bins)
    }

    /// Frame energy recovered from the one-sided power layout:
    /// `(P[0] + P[N/2] + 2 * sum of interior bins) / fft_size`.
    pub fn frame_energy(&self, frame: usize) -> T {
        let p = self.power(frame);
        let last = p.len() - 1;
        let interior: T = p[1..last].iter().copied().sum();
        (p[0] + p[last] + interior + interior) / T::from_count(self.fft_size)
    }
}

/// Zero-pads each frame to [`FFT_SIZE`] and takes its real FFT.
pub fn stft<T: Real>(frames: &FrameSeries<T>) -> Result<Spectrogram<T>> {
    if frames.frame_len() > FFT_SIZE {
        return Err(Error::FrameTooLong { frame_len: frames.frame_len(), fft_size: FFT_SIZE });
    }
    let mut plan = Stft::new();
    let mut mag = Vec::with_capacity(frames.len() * N_BINS);
    let mut power = Vec::with_capacity(frames.len() * N_BINS);
    for frame in frames.iter() {
        for c in plan.forward(frame) {
            let p = c.norm_sqr();
            power.push(p);
            mag.push(p.sqrt());
        }
    }
    Ok(Spectrogram { mag, power, n_bins: N_BINS, fft_size: FFT_SIZE, sample_rate_hz: frames.sample_rate_hz() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::AudioClip;
    use crate::dsp::{frame_samples, frame_signal, WindowKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_frame_zero_spectrum() {
        let c = AudioClip::new(vec![0.0f64; 441], 11025, "z").unwrap();
        let s = stft(&frame_signal(&c, WindowKind::Rect).unwrap()).unwrap();
        assert!(s.mag(0).iter().all(|&m| m == 0.0));
    }

    #[test]
    fn bin_centred_sine_has_single_dominant_bin() {
        let k = 37usize;
        let f = k as f64 * 11025.0 / 512.0;
        let x: Vec<f64> = (0..512).map(|n| (2.0 * std::f64::consts::PI * f * n as f64 / 11025.0).sin()).collect();
        let fs = frame_samples(&x, 512, 512, WindowKind::Rect, 11025).unwrap();
        let s = stft(&fs).unwrap();
        let m = s.mag(0);
        let peak = (0..m.len()).max_by(|&a, &b| m[a].total_cmp(&m[b])).unwrap();
        assert_eq!(peak, k);
        let rest: f64 = m.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, v)| v).fold(0.0, |a: f64, &v| a.max(v));
        assert!(rest < 1e-9 * m[k]);
    }

    #[test]
    fn parseval_on_white_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let x: Vec<f64> = (0..441).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let direct: f64 = x.iter().map(|v| v * v).sum();
            let fs = frame_samples(&x, 441, 110, WindowKind::Rect, 11025).unwrap();
            let s = stft(&fs).unwrap();
            let e = s.frame_energy(0);
            assert!(((e - direct) / direct).abs() < 1e-6);
            for (p, m) in s.power(0).iter().zip(s.mag(0)) {
                assert!((p - m * m).abs() <= 1e-9 * p.max(1e-300));
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..512).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut plan = Stft::new();
        let spec = plan.forward(&x);
        let y = plan.inverse(&spec);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn frame_too_long() {
        let x = vec![0.1f64; 1000];
        let fs = frame_samples(&x, 600, 100, WindowKind::Rect, 11025).unwrap();
        assert!(matches!(stft(&fs), Err(Error::FrameTooLong { .. })));
    }
}
