use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classify::{MlpConfig, TreeConfig};
use crate::denoise::DenoiseConfig;
use crate::diarize::DiarizeConfig;
use crate::error::{Error, Result};
use crate::features::FeatureConfig;
use crate::vad::VadConfig;

pub const TREE_FILE: &str = "environment_tree.json";
pub const MLP_FILE: &str = "mood_mlp.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelFiles {
    pub environment_tree: PathBuf,
    pub mood_mlp: PathBuf,
}

impl Default for ModelFiles {
    fn default() -> Self {
        Self { environment_tree: TREE_FILE.into(), mood_mlp: MLP_FILE.into() }
    }
}

impl ModelFiles {
    /// Paths resolved against the models directory (absolute paths pass through).
    pub fn resolve(&self, models_dir: &Path) -> (PathBuf, PathBuf) {
        (models_dir.join(&self.environment_tree), models_dir.join(&self.mood_mlp))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DebugConfig {
    /// Record the executed stage names in every record.
    pub trace_stages: bool,
    /// Write per-frame denoiser gains as `<dir>/<source_id>.gains.csv`.
    pub gain_csv_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub vad: VadConfig,
    pub denoise: DenoiseConfig,
    pub diarize: DiarizeConfig,
    pub features: FeatureConfig,
    pub tree: TreeConfig,
    pub mlp: MlpConfig,
    pub models: ModelFiles,
    pub debug: DebugConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let seed = 7;
        let mut cfg = Self {
            seed,
            vad: VadConfig::default(),
            denoise: DenoiseConfig::default(),
            diarize: DiarizeConfig::default(),
            features: FeatureConfig::default(),
            tree: TreeConfig::default(),
            mlp: MlpConfig::default(),
            models: ModelFiles::default(),
            debug: DebugConfig::default(),
        };
        cfg.set_seed(seed);
        cfg
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.set_seed(cfg.seed);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The run seed drives diarization seeding and network initialization.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.diarize.seed = seed;
        self.mlp.seed = seed;
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.vad.window_frames == 0 {
            return fail("vad.window_frames must be positive");
        }
        if !(0.0..1.0).contains(&self.vad.smoothing) {
            return fail("vad.smoothing must lie in [0, 1)");
        }
        if self.denoise.minima_window == 0 {
            return fail("denoise.minima_window must be positive");
        }
        if self.diarize.min_turn_frames == 0 || self.diarize.smooth_frames == 0 || self.diarize.max_iter == 0 {
            return fail("diarize frame counts and max_iter must be positive");
        }
        if self.features.keep == 0 {
            return fail("features.keep must be positive");
        }
        if self.features.pitch.f0_min_hz <= 0.0 || self.features.pitch.f0_min_hz >= self.features.pitch.f0_max_hz {
            return fail("features.pitch needs 0 < f0_min_hz < f0_max_hz");
        }
        if self.mlp.hidden.is_empty() || self.mlp.hidden.contains(&0) {
            return fail("mlp.hidden must list positive layer widths");
        }
        if !(0.0..1.0).contains(&self.mlp.dropout) {
            return fail("mlp.dropout must lie in [0, 1)");
        }
        if !(self.mlp.learning_rate > 0.0) || self.mlp.batch_size == 0 || self.mlp.epochs == 0 {
            return fail("mlp.learning_rate, batch_size and epochs must be positive");
        }
        if self.tree.max_depth == 0 || self.tree.min_leaf == 0 {
            return fail("tree.max_depth and tree.min_leaf must be positive");
        }
        Ok(())
    }
}
