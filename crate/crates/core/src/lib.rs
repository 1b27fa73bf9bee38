//! Batch analysis of short audio clips: silence suppression, noise
//! reduction, two-speaker diarization, environment and mood classification.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common cases.

pub mod audio;
pub mod classify;
pub mod denoise;
pub mod diarize;
pub mod dsp;
pub mod error;
pub mod features;
pub mod pipeline;
pub mod real;
pub mod resample;
pub mod synth;
pub mod vad;

pub use error::{Error, Result};
pub use real::Real;

pub type Clip = audio::AudioClip<f64>;
pub type Clip32 = audio::AudioClip<f32>;
pub type Spectrogram = dsp::Spectrogram<f64>;
pub type Spectrogram32 = dsp::Spectrogram<f32>;
pub type FrameSeries = dsp::FrameSeries<f64>;
pub type VadDecision = vad::VadDecision<f64>;
pub type PitchTrack = features::PitchTrack<f64>;
pub type CuratedFeatures = features::CuratedFeatures<f64>;
pub type FeatureVector = features::FeatureVector<f64>;
pub type DecisionTree = classify::DecisionTree<f64>;
pub type DecisionTree32 = classify::DecisionTree<f32>;
pub type MlpModel = classify::MlpModel<f64>;
pub type MlpModel32 = classify::MlpModel<f32>;
pub type AnalysisRecord = pipeline::AnalysisRecord<f64>;
