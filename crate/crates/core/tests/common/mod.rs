#![allow(dead_code)]

use std::path::{Path, PathBuf};

use dalkit::audio::{write_wav, AudioClip};
use dalkit::classify::{EnvironmentLabel, Label, MoodLabel};
use dalkit::synth;

pub struct ClipInfo {
    pub name: String,
    pub mood: MoodLabel,
    pub environment: EnvironmentLabel,
    pub train: bool,
}

/// Synthetic labelled corpus on disk: `clips/train/*.wav`, `clips/test/*.wav`
/// and two manifests (`mood.csv`, `environment.csv`) next to them.
pub struct Corpus {
    pub dir: tempfile::TempDir,
    pub clips: Vec<ClipInfo>,
}

impl Corpus {
    /// `per_mood` clips per mood class; the first `n_train` of each class are
    /// training clips; environments rotate through the three profiles.
    pub fn build(per_mood: usize, n_train: usize, duration_s: f64, seed: u64) -> Self {
        let dir = tempfile::tempdir().unwrap();
        for sub in ["clips/train", "clips/test"] {
            std::fs::create_dir_all(dir.path().join(sub)).unwrap();
        }
        let mut clips = Vec::new();
        let mut mood_csv = String::from("path,label,split\n");
        let mut env_csv = String::from("path,label,split\n");
        for (m, &mood) in MoodLabel::ALL.iter().enumerate() {
            for j in 0..per_mood {
                let environment = EnvironmentLabel::ALL[j % 3];
                let train = j < n_train;
                let split = if train { "train" } else { "test" };
                let name = format!("{mood}_{j:02}.wav");
                let rel = format!("clips/{split}/{name}");
                let x = synth::mood_clip(mood, environment, duration_s, seed + (m * 1000 + j) as u64);
                write_wav(&AudioClip::new(x, 11025, name.clone()).unwrap(), dir.path().join(&rel)).unwrap();
                mood_csv += &format!("{rel},{mood},{split}\n");
                env_csv += &format!("{rel},{environment},{split}\n");
                clips.push(ClipInfo { name, mood, environment, train });
            }
        }
        std::fs::write(dir.path().join("mood.csv"), mood_csv).unwrap();
        std::fs::write(dir.path().join("environment.csv"), env_csv).unwrap();
        Self { dir, clips }
    }

    pub fn root(&self) -> &Path {
        self.dir.path()
    }

    pub fn mood_manifest(&self) -> PathBuf {
        self.root().join("mood.csv")
    }

    pub fn environment_manifest(&self) -> PathBuf {
        self.root().join("environment.csv")
    }

    pub fn test_dir(&self) -> PathBuf {
        self.root().join("clips/test")
    }

    pub fn info(&self, name: &str) -> &ClipInfo {
        self.clips.iter().find(|c| c.name == name).unwrap()
    }
}
