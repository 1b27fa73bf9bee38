//! Batch orchestration: load, canonicalize, VAD, silence suppression,
//! denoising, CSNE, environment, diarization, features, mood.

mod chain;
mod config;
mod manifest;
mod run;

pub use chain::{
    analyze_clip, analyze_path, clip_mood, enhance, load_canonical, segment_features, AnalysisRecord, Enhanced,
    EnvironmentPrediction, Models, MoodPrediction, SegmentFeatures, SegmentRecord, StageTrace, ENVIRONMENT_FEATURES,
    STAGES,
};
pub use config::{DebugConfig, ModelFiles, PipelineConfig, MLP_FILE, TREE_FILE};
pub use manifest::{load_manifest, parse_manifest, ManifestRow, Split};
pub use run::{
    extract_clip_features, list_wavs, par_map, run_analyze, run_evaluate, run_features, run_train_mlp, run_train_tree,
    summarize, ClipFeatures, CorpusSummary, SegmentFeatureRecord, Target, TrainReport, FEATURES_CSV, FEATURES_FILE, RECORDS_FILE,
    SUMMARY_FILE,
};
