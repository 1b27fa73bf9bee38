use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed WAV file: {0}")]
    MalformedWav(String),
    #[error("unsupported WAV encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("clip has no samples")]
    EmptyClip,
    #[error("invalid clip: {0}")]
    InvalidClip(String),
    #[error("keep count {keep} exceeds vector length {len}")]
    KeepTooLarge { keep: usize, len: usize },
    #[error("empty sequence")]
    EmptySequence,
    #[error("percentile {0} outside [0, 100]")]
    InvalidPercentile(f64),
    #[error("frame is silent (all zeros)")]
    SilentFrame,
    #[error("max lag {max_lag} must be below frame length {frame_len}")]
    LagTooLarge { max_lag: usize, frame_len: usize },
    #[error("frame length {frame_len} exceeds FFT size {fft_size}")]
    FrameTooLong { frame_len: usize, fft_size: usize },
    #[error("no speech detected")]
    NoSpeechDetected,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("insufficient voicing: {voiced} voiced frames, need {needed}")]
    InsufficientVoicing { voiced: usize, needed: usize },
    #[error("voiced frame {0} has zero amplitude")]
    ZeroAmplitudeFrame(usize),
    #[error("every frame is silent")]
    AllFramesSilent,
    #[error("need at least {needed} frames, got {got}")]
    TooFewFrames { got: usize, needed: usize },
    #[error("too little speech for diarization: {speech_frames} frames, need {needed}")]
    TooLittleSpeech { speech_frames: usize, needed: usize },
    #[error("clusters degenerate: clip treated as single-speaker")]
    DegenerateClusters,
    #[error("class means coincide; no discriminant direction exists")]
    DegenerateMeans,
    #[error("within-class scatter is singular")]
    SingularScatter,
    #[error("training data contains a single class")]
    SingleClassInput,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("loss became non-finite at epoch {epoch} (last finite loss {last_loss})")]
    NonfiniteLoss { epoch: usize, last_loss: f64 },
    #[error("empty test set")]
    EmptyTestSet,
    #[error("invalid training data: {0}")]
    InvalidTrainingData(String),
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("no input WAV files in {0}")]
    NoInputs(PathBuf),
    #[error("model file missing: {0}")]
    ModelMissing(PathBuf),
    #[error("model error: {0}")]
    Model(String),
    #[error("malformed manifest at row {row}: {reason}")]
    ManifestMalformed { row: usize, reason: String },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
