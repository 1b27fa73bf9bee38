//! The per-clip processing chain shared by analysis, training and feature dumps.

use std::path::Path;

use log::debug;
use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use crate::audio::{canonicalize, load_wav, AudioClip};
use crate::classify::{argmax, DecisionTree, EnvironmentLabel, Label, MlpModel, MoodLabel};
use crate::denoise::{csne_db, denoise_traced, write_gain_csv};
use crate::diarize::{diarize_or_single, SpeakerId, SpeakerSegment};
use crate::dsp::{frame_count, frame_signal, WindowKind, FRAME_LEN, HOP};
use crate::error::{Error, Result};
use crate::features::{clip_features, extract_lld, CuratedFeatures, FeatureVector};
use crate::real::Real;
use crate::vad::{detect_speech, suppress_silence, VadDecision};

/// Inputs of the environment tree, in column order. CSNE comes from the
/// denoiser; the descriptor means and spread are taken over the clip's
/// non-speech frames, where only the background is heard.
pub const ENVIRONMENT_FEATURES: [&str; 6] =
    ["csne_db", "energy_mean", "energy_std", "flatness_mean", "centroid_mean", "zcr_mean"];

/// Fewer non-speech frames than this and the environment descriptors fall
/// back to every frame of the clip.
pub const MIN_BACKGROUND_FRAMES: usize = 10;

const LLD_ENERGY: usize = 0;
const LLD_ZCR: usize = 1;
const LLD_CENTROID: usize = 15;
const LLD_FLATNESS: usize = 18;

/// Stage names in execution order.
pub const STAGES: [&str; 11] = [
    "load",
    "canonicalize",
    "vad",
    "suppress_silence",
    "denoise",
    "csne",
    "environment",
    "diarize",
    "features",
    "mood",
    "record",
];

#[derive(Debug, Default)]
pub struct StageTrace {
    enabled: bool,
    pub stages: Vec<String>,
}

impl StageTrace {
    pub fn new(enabled: bool) -> Self {
        Self { enabled, stages: Vec::new() }
    }

    pub fn enter(&mut self, source: &str, stage: &'static str) {
        debug!("{source}: {stage}");
        if self.enabled {
            self.stages.push(stage.to_string());
        }
    }
}

/// A clip after silence suppression and noise reduction.
#[derive(Debug, Clone)]
pub struct Enhanced<T> {
    pub duration_s: f64,
    pub speech_fraction: f64,
    pub suppressed: AudioClip<T>,
    pub denoised: AudioClip<T>,
    pub csne_db: f64,
    pub environment_features: Vec<T>,
}

pub fn load_canonical<T: Real>(path: &Path, trace: &mut StageTrace) -> Result<AudioClip<T>> {
    let id = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    trace.enter(&id, "load");
    let clip = load_wav(path)?;
    trace.enter(&id, "canonicalize");
    canonicalize(&clip)
}

/// Runs VAD, silence suppression, denoising and CSNE on a canonical clip.
/// Returns the speech fraction alongside the error when no speech is found.
pub fn enhance<T: Real>(
    clip: &AudioClip<T>,
    cfg: &PipelineConfig,
    trace: &mut StageTrace,
) -> std::result::Result<Enhanced<T>, (Error, f64)> {
    let id = clip.source_id().to_string();
    trace.enter(&id, "vad");
    let frames = frame_signal(clip, WindowKind::Rect).map_err(|e| (e, 0.0))?;
    let decision = detect_speech(&frames, &cfg.vad);
    let speech_fraction = decision.speech_fraction();
    let fail = |e: Error| (e, speech_fraction);
    trace.enter(&id, "suppress_silence");
    let suppressed = suppress_silence(clip, &decision).map_err(fail)?;
    trace.enter(&id, "denoise");
    let dump = cfg.debug.gain_csv_dir.as_ref();
    let (denoised, gains) = denoise_traced(&suppressed, &cfg.denoise, dump.is_some()).map_err(fail)?;
    if let Some(dir) = dump {
        let write = || -> Result<()> {
            std::fs::create_dir_all(dir)?;
            let f = std::fs::File::create(dir.join(format!("{id}.gains.csv")))?;
            write_gain_csv(&gains, std::io::BufWriter::new(f))
        };
        write().map_err(fail)?;
    }
    trace.enter(&id, "csne");
    let csne = csne_db(suppressed.samples(), denoised.samples(), cfg.denoise.csne_cap_db).map_err(fail)?;
    let mut lld = extract_lld(clip, &cfg.features.pitch).map_err(fail)?;
    let background: Vec<_> =
        lld.rows.iter().zip(&decision.speech_flags).filter(|(_, &s)| !s).map(|(r, _)| *r).collect();
    if background.len() >= MIN_BACKGROUND_FRAMES {
        lld.rows = background;
    }
    let col_mean = |c: usize| crate::real::mean(&lld.column(c)).unwrap_or_else(T::zero);
    let energy_std = crate::real::std_dev(&lld.column(LLD_ENERGY)).unwrap_or_else(T::zero);
    let environment_features = vec![
        T::lit(csne),
        col_mean(LLD_ENERGY),
        energy_std,
        col_mean(LLD_FLATNESS),
        col_mean(LLD_CENTROID),
        col_mean(LLD_ZCR),
    ];
    Ok(Enhanced {
        duration_s: clip.duration_s(),
        speech_fraction,
        suppressed,
        denoised,
        csne_db: csne,
        environment_features,
    })
}

/// One diarized segment of the enhanced clip with its features.
#[derive(Debug, Clone)]
pub struct SegmentFeatures<T> {
    pub segment: SpeakerSegment,
    /// `None` when the segment is silent on both sides of the denoiser.
    pub csne_db: Option<f64>,
    pub curated: CuratedFeatures<T>,
    pub vector: FeatureVector<T>,
}

/// Diarizes the enhanced clip and extracts features per segment.
pub fn segment_features<T: Real>(
    enhanced: &Enhanced<T>,
    cfg: &PipelineConfig,
    trace: &mut StageTrace,
    warnings: &mut Vec<String>,
) -> Result<(Vec<SegmentFeatures<T>>, bool)> {
    let clip = &enhanced.denoised;
    let id = clip.source_id().to_string();
    trace.enter(&id, "diarize");
    let n_frames = frame_count(clip.len(), FRAME_LEN, HOP);
    let all = VadDecision::<T>::all_speech(n_frames, FRAME_LEN, HOP);
    let (segments, single) = match diarize_or_single(clip, &all, &cfg.diarize) {
        Ok(r) => r,
        Err(e @ Error::TooLittleSpeech { .. }) => {
            warnings.push(format!("{e}; treating the clip as one segment"));
            let whole = SpeakerSegment { start_frame: 0, end_frame: n_frames.max(1), speaker: SpeakerId::S1 };
            (vec![whole], true)
        }
        Err(e) => return Err(e),
    };
    trace.enter(&id, "features");
    let mut out = Vec::with_capacity(segments.len());
    for segment in segments {
        let range = segment.sample_range(FRAME_LEN, HOP, clip.len());
        let csne = csne_db(
            &enhanced.suppressed.samples()[range.clone()],
            &clip.samples()[range.clone()],
            cfg.denoise.csne_cap_db,
        )
        .ok();
        let part = clip.with_samples(clip.samples()[range].to_vec())?;
        let (curated, vector) = clip_features(&part, &cfg.features)?;
        out.push(SegmentFeatures { segment, csne_db: csne, curated, vector });
    }
    Ok((out, single))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentPrediction {
    pub label: EnvironmentLabel,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MoodPrediction<T> {
    pub label: MoodLabel,
    pub probabilities: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SegmentRecord<T> {
    pub speaker: SpeakerId,
    pub start_frame: usize,
    pub end_frame: usize,
    /// Times on the silence-suppressed timeline.
    pub start_s: f64,
    pub end_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csne_db: Option<f64>,
    pub mood: MoodPrediction<T>,
    pub features: CuratedFeatures<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct AnalysisRecord<T> {
    pub source_id: String,
    pub duration_s: f64,
    pub speech_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csne_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub environment: Option<EnvironmentPrediction>,
    pub single_speaker: bool,
    pub segments: Vec<SegmentRecord<T>>,
    /// Clip-level mood: segment probabilities averaged with frame-count weights.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mood: Option<MoodPrediction<T>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub features: Option<CuratedFeatures<T>>,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<String>,
}

impl<T: Real> AnalysisRecord<T> {
    fn empty(source_id: String) -> Self {
        Self {
            source_id,
            duration_s: 0.0,
            speech_fraction: 0.0,
            csne_db: None,
            environment: None,
            single_speaker: false,
            segments: Vec::new(),
            mood: None,
            features: None,
            warnings: Vec::new(),
            stages: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Models<T> {
    pub tree: DecisionTree<T>,
    pub mlp: MlpModel<T>,
}

pub(crate) fn read_model<M: serde::de::DeserializeOwned>(path: &Path) -> Result<M> {
    if !path.is_file() {
        return Err(Error::ModelMissing(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Model(format!("{}: {e}", path.display())))
}

impl<T: Real> Models<T> {
    pub fn load(models_dir: &Path, cfg: &PipelineConfig) -> Result<Self> {
        let (tree_path, mlp_path) = cfg.models.resolve(models_dir);
        let tree: DecisionTree<T> = read_model(&tree_path)?;
        let mlp: MlpModel<T> = read_model(&mlp_path)?;
        if tree.n_features != ENVIRONMENT_FEATURES.len() || tree.n_classes() != EnvironmentLabel::n_classes() {
            return Err(Error::Model(format!("{}: not an environment tree", tree_path.display())));
        }
        if mlp.n_classes() != MoodLabel::n_classes() {
            return Err(Error::Model(format!("{}: not a mood network", mlp_path.display())));
        }
        Ok(Self { tree, mlp })
    }
}

/// Frame-count-weighted mean of segment probabilities, argmax with ties to
/// the lowest class index.
pub fn clip_mood<T: Real>(segments: &[SegmentRecord<T>]) -> Option<MoodPrediction<T>> {
    let first = segments.first()?;
    let mut acc = vec![T::zero(); first.mood.probabilities.len()];
    let mut total = T::zero();
    for s in segments {
        let w = T::from_count(s.end_frame - s.start_frame);
        total = total + w;
        acc.iter_mut().zip(&s.mood.probabilities).for_each(|(a, &p)| *a = *a + w * p);
    }
    if total > T::zero() {
        acc.iter_mut().for_each(|a| *a = *a / total);
    }
    let label = MoodLabel::from_index(argmax(&acc))?;
    Some(MoodPrediction { label, probabilities: acc })
}

/// Full chain for an in-memory clip; per-stage failures become warnings.
pub fn analyze_clip<T: Real>(
    clip: &AudioClip<T>,
    models: &Models<T>,
    cfg: &PipelineConfig,
    trace: &mut StageTrace,
) -> AnalysisRecord<T> {
    let mut rec = AnalysisRecord::empty(clip.source_id().to_string());
    rec.duration_s = clip.duration_s();
    let enhanced = match enhance(clip, cfg, trace) {
        Ok(e) => e,
        Err((e, fraction)) => {
            rec.speech_fraction = fraction;
            rec.warnings.push(e.to_string());
            return rec;
        }
    };
    rec.speech_fraction = enhanced.speech_fraction;
    rec.csne_db = Some(enhanced.csne_db);
    trace.enter(&rec.source_id, "environment");
    match models.tree.predict::<EnvironmentLabel>(&enhanced.environment_features) {
        Ok((label, confidence)) => rec.environment = Some(EnvironmentPrediction { label, confidence }),
        Err(e) => rec.warnings.push(format!("environment: {e}")),
    }
    let (segments, single) = match segment_features(&enhanced, cfg, trace, &mut rec.warnings) {
        Ok(s) => s,
        Err(e) => {
            rec.warnings.push(format!("segments: {e}"));
            return rec;
        }
    };
    rec.single_speaker = single;
    trace.enter(&rec.source_id, "mood");
    let seconds = |frame: usize| (frame * HOP) as f64 / f64::from(enhanced.denoised.sample_rate_hz());
    for s in segments {
        match models.mlp.predict::<MoodLabel>(&s.vector.values) {
            Ok((label, probabilities)) => rec.segments.push(SegmentRecord {
                speaker: s.segment.speaker,
                start_frame: s.segment.start_frame,
                end_frame: s.segment.end_frame,
                start_s: seconds(s.segment.start_frame),
                end_s: seconds(s.segment.end_frame),
                csne_db: s.csne_db,
                mood: MoodPrediction { label, probabilities },
                features: s.curated,
            }),
            Err(e) => {
                rec.warnings.push(format!("mood: {e}"));
                rec.segments.clear();
                return rec;
            }
        }
    }
    rec.mood = clip_mood(&rec.segments);
    match crate::features::compute_curated(&enhanced.denoised, &cfg.features) {
        Ok(f) => rec.features = Some(f),
        Err(e) => rec.warnings.push(format!("features: {e}")),
    }
    trace.enter(&rec.source_id, "record");
    rec
}

/// Loads a WAV file and runs [`analyze_clip`]; load failures become a
/// record carrying only the warning.
pub fn analyze_path<T: Real>(path: &Path, models: &Models<T>, cfg: &PipelineConfig) -> AnalysisRecord<T> {
    let mut trace = StageTrace::new(cfg.debug.trace_stages);
    let mut rec = match load_canonical::<T>(path, &mut trace) {
        Ok(clip) => analyze_clip(&clip, models, cfg, &mut trace),
        Err(e) => {
            let id = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
            let mut r = AnalysisRecord::empty(id);
            r.warnings.push(e.to_string());
            r
        }
    };
    rec.stages = trace.stages;
    rec
}
