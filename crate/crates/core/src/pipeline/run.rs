use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chain::{analyze_path, enhance, load_canonical, segment_features, AnalysisRecord, Models, StageTrace};
use super::config::PipelineConfig;
use super::manifest::{load_manifest, ManifestRow, Split};
use crate::classify::{
    metrics_from_labels, train_mlp, train_tree, DecisionTree, EnvironmentLabel, Label, Metrics, MlpModel, MoodLabel,
};
use crate::error::{Error, Result};
use crate::features::{CuratedFeatures, FeatureVector};
use crate::real::Real;

pub const RECORDS_FILE: &str = "records.ndjson";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const FEATURES_FILE: &str = "features.ndjson";
pub const FEATURES_CSV: &str = "features.csv";

/// Sorted `.wav` files directly inside `dir`.
pub fn list_wavs(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::NoInputs(dir.to_path_buf()));
    }
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    out.sort();
    if out.is_empty() {
        return Err(Error::NoInputs(dir.to_path_buf()));
    }
    Ok(out)
}

/// Runs `f` over `items` on a pool of `jobs` threads (0 = all cores),
/// returning results in input order.
pub fn par_map<I: Sync, O: Send>(items: &[I], jobs: usize, f: impl Fn(&I) -> O + Sync + Send) -> Result<Vec<O>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub clips: usize,
    /// Clips that received a mood.
    pub analyzed: usize,
    pub with_warnings: usize,
    pub mean_csne_db: Option<f64>,
    pub environment_counts: Vec<(EnvironmentLabel, usize)>,
    pub mood_counts: Vec<(MoodLabel, usize)>,
}

pub fn summarize<T: Real>(records: &[AnalysisRecord<T>]) -> CorpusSummary {
    let csne: Vec<f64> = records.iter().filter_map(|r| r.csne_db).collect();
    CorpusSummary {
        clips: records.len(),
        analyzed: records.iter().filter(|r| r.mood.is_some()).count(),
        with_warnings: records.iter().filter(|r| !r.warnings.is_empty()).count(),
        mean_csne_db: (!csne.is_empty()).then(|| csne.iter().sum::<f64>() / csne.len() as f64),
        environment_counts: EnvironmentLabel::ALL
            .iter()
            .map(|&l| (l, records.iter().filter(|r| r.environment.as_ref().is_some_and(|e| e.label == l)).count()))
            .collect(),
        mood_counts: MoodLabel::ALL
            .iter()
            .map(|&l| (l, records.iter().filter(|r| r.mood.as_ref().is_some_and(|m| m.label == l)).count()))
            .collect(),
    }
}

impl CorpusSummary {
    /// One header row and one value row.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["clips".to_string(), "analyzed".into(), "with_warnings".into(), "mean_csne_db".into()];
        header.extend(self.environment_counts.iter().map(|(l, _)| format!("environment_{l}")));
        header.extend(self.mood_counts.iter().map(|(l, _)| format!("mood_{l}")));
        wr.write_record(&header)?;
        let mut row = vec![
            self.clips.to_string(),
            self.analyzed.to_string(),
            self.with_warnings.to_string(),
            self.mean_csne_db.map_or_else(String::new, |v| v.to_string()),
        ];
        row.extend(self.environment_counts.iter().map(|(_, c)| c.to_string()));
        row.extend(self.mood_counts.iter().map(|(_, c)| c.to_string()));
        wr.write_record(&row)?;
        wr.flush()?;
        Ok(())
    }
}

fn write_ndjson<S: Serialize>(path: &Path, items: &[S]) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Analyzes every WAV in `input_dir`, writing `records.ndjson` and
/// `summary.csv` into `out_dir`.
pub fn run_analyze<T: Real>(
    input_dir: &Path,
    models_dir: &Path,
    out_dir: &Path,
    cfg: &PipelineConfig,
    jobs: usize,
) -> Result<(Vec<AnalysisRecord<T>>, CorpusSummary)> {
    let inputs = list_wavs(input_dir)?;
    let models = Models::<T>::load(models_dir, cfg)?;
    let records = par_map(&inputs, jobs, |p| analyze_path(p, &models, cfg))?;
    let summary = summarize(&records);
    std::fs::create_dir_all(out_dir)?;
    write_ndjson(&out_dir.join(RECORDS_FILE), &records)?;
    summary.write_csv(std::fs::File::create(out_dir.join(SUMMARY_FILE))?)?;
    Ok((records, summary))
}

/// Everything the chain extracts from one clip, for training and dumps.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ClipFeatures<T> {
    pub source_id: String,
    pub csne_db: f64,
    pub environment_features: Vec<T>,
    pub single_speaker: bool,
    pub segments: Vec<SegmentFeatureRecord<T>>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SegmentFeatureRecord<T> {
    pub start_frame: usize,
    pub end_frame: usize,
    pub csne_db: Option<f64>,
    pub curated: CuratedFeatures<T>,
    pub vector: FeatureVector<T>,
}

pub fn extract_clip_features<T: Real>(path: &Path, cfg: &PipelineConfig, segments: bool) -> Result<ClipFeatures<T>> {
    let mut trace = StageTrace::new(false);
    let clip = load_canonical::<T>(path, &mut trace)?;
    let enhanced = enhance(&clip, cfg, &mut trace).map_err(|(e, _)| e)?;
    let mut warnings = Vec::new();
    let (segs, single) = if segments {
        segment_features(&enhanced, cfg, &mut trace, &mut warnings)?
    } else {
        (Vec::new(), false)
    };
    Ok(ClipFeatures {
        source_id: clip.source_id().to_string(),
        csne_db: enhanced.csne_db,
        environment_features: enhanced.environment_features,
        single_speaker: single,
        segments: segs
            .into_iter()
            .map(|s| SegmentFeatureRecord {
                start_frame: s.segment.start_frame,
                end_frame: s.segment.end_frame,
                csne_db: s.csne_db,
                curated: s.curated,
                vector: s.vector,
            })
            .collect(),
        warnings,
    })
}

/// Writes `features.ndjson` (one document per clip) and `features.csv` (one
/// row per segment). Per-clip failures become `{"source_id", "error"}` lines
/// in the NDJSON stream and are left out of the CSV.
pub fn run_features<T: Real>(input_dir: &Path, out_dir: &Path, cfg: &PipelineConfig, jobs: usize) -> Result<usize> {
    let inputs = list_wavs(input_dir)?;
    let results = par_map(&inputs, jobs, |p| extract_clip_features::<T>(p, cfg, true))?;
    let mut rows = Vec::with_capacity(results.len());
    for (p, r) in inputs.iter().zip(&results) {
        rows.push(match r {
            Ok(f) => serde_json::to_value(f)?,
            Err(e) => serde_json::json!({ "source_id": p.file_name().map(|n| n.to_string_lossy()), "error": e.to_string() }),
        });
    }
    std::fs::create_dir_all(out_dir)?;
    write_ndjson(&out_dir.join(FEATURES_FILE), &rows)?;
    write_feature_csv(std::fs::File::create(out_dir.join(FEATURES_CSV))?, results.iter().filter_map(|r| r.as_ref().ok()))?;
    Ok(rows.len())
}

fn write_feature_csv<'a, T: Real + 'a, W: Write>(w: W, clips: impl Iterator<Item = &'a ClipFeatures<T>>) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header_written = false;
    let num = |v: f64| v.to_string();
    for c in clips {
        for s in &c.segments {
            if !header_written {
                let mut h: Vec<String> = ["source_id", "start_frame", "end_frame", "csne_db"].map(String::from).to_vec();
                h.extend(CuratedFeatures::<T>::NAMES.iter().map(|n| n.to_string()));
                h.extend(s.vector.names.iter().cloned());
                wr.write_record(&h)?;
                header_written = true;
            }
            let mut row = vec![c.source_id.clone(), s.start_frame.to_string(), s.end_frame.to_string()];
            row.push(s.csne_db.map_or_else(String::new, num));
            row.extend(s.curated.to_vec().iter().map(|v| num(v.to_f64_lossy())));
            row.extend(s.vector.values.iter().map(|v| num(v.to_f64_lossy())));
            wr.write_record(&row)?;
        }
    }
    wr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Tree,
    Mlp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub target: Target,
    pub n_train: usize,
    pub n_test: usize,
    pub model_path: PathBuf,
    pub train: Metrics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<Metrics>,
}

fn split_rows<L: Copy, F>(rows: &[ManifestRow<L>], feats: Vec<F>) -> (Vec<(F, L)>, Vec<(F, L)>) {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (r, f) in rows.iter().zip(feats) {
        match r.split {
            Split::Train => train.push((f, r.label)),
            Split::Test => test.push((f, r.label)),
        }
    }
    (train, test)
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn extract_all<T: Real, L: Label + Send + Sync>(
    rows: &[ManifestRow<L>],
    cfg: &PipelineConfig,
    jobs: usize,
    segments: bool,
) -> Result<Vec<ClipFeatures<T>>> {
    par_map(rows, jobs, |r| {
        extract_clip_features::<T>(&r.path, cfg, segments).map_err(|e| Error::InvalidTrainingData(format!("{}: {e}", r.path.display())))
    })?
    .into_iter()
    .collect()
}

fn tree_predictions<T: Real>(tree: &DecisionTree<T>, set: &[(ClipFeatures<T>, EnvironmentLabel)]) -> Result<Metrics> {
    let pred: Vec<EnvironmentLabel> =
        set.iter().map(|(f, _)| tree.predict(&f.environment_features).map(|p| p.0)).collect::<Result<_>>()?;
    let truth: Vec<EnvironmentLabel> = set.iter().map(|(_, l)| *l).collect();
    metrics_from_labels(&pred, &truth)
}

/// Clip-level mood of extracted features, as in analysis.
fn clip_mood_of<T: Real>(model: &MlpModel<T>, f: &ClipFeatures<T>) -> Result<MoodLabel> {
    let mut acc = vec![T::zero(); model.n_classes()];
    for s in &f.segments {
        let p = model.predict_proba(&s.vector.values)?;
        let w = T::from_count(s.end_frame - s.start_frame);
        acc.iter_mut().zip(p).for_each(|(a, v)| *a = *a + w * v);
    }
    MoodLabel::from_index(crate::classify::argmax(&acc)).ok_or_else(|| Error::Model("class index out of range".into()))
}

fn mlp_predictions<T: Real>(model: &MlpModel<T>, set: &[(ClipFeatures<T>, MoodLabel)]) -> Result<Metrics> {
    let pred: Vec<MoodLabel> = set.iter().map(|(f, _)| clip_mood_of(model, f)).collect::<Result<_>>()?;
    let truth: Vec<MoodLabel> = set.iter().map(|(_, l)| *l).collect();
    metrics_from_labels(&pred, &truth)
}

/// Trains the environment tree on the manifest's train rows and evaluates
/// on its test rows. Writes the model into `models_dir` and the report into `out_dir`.
pub fn run_train_tree<T: Real>(
    manifest: &Path,
    models_dir: &Path,
    out_dir: &Path,
    cfg: &PipelineConfig,
    jobs: usize,
) -> Result<TrainReport> {
    let rows = load_manifest::<EnvironmentLabel>(manifest)?;
    let feats = extract_all::<T, _>(&rows, cfg, jobs, false)?;
    let (train, test) = split_rows(&rows, feats);
    let x: Vec<Vec<T>> = train.iter().map(|(f, _)| f.environment_features.clone()).collect();
    let y: Vec<EnvironmentLabel> = train.iter().map(|(_, l)| *l).collect();
    if x.is_empty() {
        return Err(Error::InvalidTrainingData("manifest has no train rows".into()));
    }
    let tree = train_tree(&x, &y, &cfg.tree)?;
    if tree.single_class {
        log::warn!("environment training data holds a single class");
    }
    let (model_path, _) = cfg.models.resolve(models_dir);
    write_json(&model_path, &tree)?;
    let report = TrainReport {
        target: Target::Tree,
        n_train: train.len(),
        n_test: test.len(),
        model_path,
        train: tree_predictions(&tree, &train)?,
        test: if test.is_empty() { None } else { Some(tree_predictions(&tree, &test)?) },
    };
    write_json(&out_dir.join("metrics_tree.json"), &report)?;
    Ok(report)
}

/// Trains the mood network on every segment of the train clips (each
/// segment inherits its clip's label); metrics are per clip.
pub fn run_train_mlp<T: Real>(
    manifest: &Path,
    models_dir: &Path,
    out_dir: &Path,
    cfg: &PipelineConfig,
    jobs: usize,
) -> Result<TrainReport> {
    let rows = load_manifest::<MoodLabel>(manifest)?;
    let feats = extract_all::<T, _>(&rows, cfg, jobs, true)?;
    let (train, test) = split_rows(&rows, feats);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (f, l) in &train {
        for s in &f.segments {
            x.push(s.vector.values.clone());
            y.push(*l);
        }
    }
    if x.is_empty() {
        return Err(Error::InvalidTrainingData("manifest has no train rows".into()));
    }
    let model = train_mlp(&x, &y, &cfg.mlp)?;
    let (_, model_path) = cfg.models.resolve(models_dir);
    write_json(&model_path, &model)?;
    let report = TrainReport {
        target: Target::Mlp,
        n_train: train.len(),
        n_test: test.len(),
        model_path,
        train: mlp_predictions(&model, &train)?,
        test: if test.is_empty() { None } else { Some(mlp_predictions(&model, &test)?) },
    };
    write_json(&out_dir.join("metrics_mlp.json"), &report)?;
    Ok(report)
}

/// Evaluates a stored model on the manifest's test rows.
pub fn run_evaluate<T: Real>(
    target: Target,
    manifest: &Path,
    models_dir: &Path,
    out_dir: &Path,
    cfg: &PipelineConfig,
    jobs: usize,
) -> Result<Metrics> {
    let (tree_path, mlp_path) = cfg.models.resolve(models_dir);
    let metrics = match target {
        Target::Tree => {
            let tree: DecisionTree<T> = super::chain::read_model(&tree_path)?;
            let rows: Vec<_> = load_manifest::<EnvironmentLabel>(manifest)?.into_iter().filter(|r| r.split == Split::Test).collect();
            if rows.is_empty() {
                return Err(Error::EmptyTestSet);
            }
            let feats = extract_all::<T, _>(&rows, cfg, jobs, false)?;
            tree_predictions(&tree, &split_rows(&rows, feats).1)?
        }
        Target::Mlp => {
            let model: MlpModel<T> = super::chain::read_model(&mlp_path)?;
            let rows: Vec<_> = load_manifest::<MoodLabel>(manifest)?.into_iter().filter(|r| r.split == Split::Test).collect();
            if rows.is_empty() {
                return Err(Error::EmptyTestSet);
            }
            let feats = extract_all::<T, _>(&rows, cfg, jobs, true)?;
            mlp_predictions(&model, &split_rows(&rows, feats).1)?
        }
    };
    let name = match target {
        Target::Tree => "evaluation_tree.json",
        Target::Mlp => "evaluation_mlp.json",
    };
    write_json(&out_dir.join(name), &metrics)?;
    Ok(metrics)
}
