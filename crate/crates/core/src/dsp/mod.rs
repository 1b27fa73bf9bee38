//! Framing, spectral and statistical kernels shared by the analysis stages.

mod autocorr;
mod dct;
mod frame;
mod spectrum;
mod stats;

pub use autocorr::{autocorrelation, autocorrelation_unchecked};
pub use dct::{dct_2, dct_2_full, idct_2};
pub use frame::{frame_count, frame_samples, frame_signal, hann, FrameSeries, WindowKind, FRAME_LEN, HOP};
pub use spectrum::{stft, Spectrogram, Stft, FFT_SIZE, N_BINS};
pub use stats::percentile;
