mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dalkit::classify::{EnvironmentLabel, Label, MoodLabel};
use dalkit::pipeline::{AnalysisRecord, MLP_FILE, RECORDS_FILE, STAGES, SUMMARY_FILE, TREE_FILE};

use common::Corpus;

fn dalkit(args: &[&str], paths: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dalkit"));
    cmd.args(args);
    for (flag, p) in paths {
        cmd.arg(flag).arg(p);
    }
    cmd.output().unwrap()
}

/// Small corpus with both models trained through the binary.
struct Fixture {
    corpus: Corpus,
    models: PathBuf,
    all_clips: PathBuf,
}

fn fixture(seed: u64) -> Fixture {
    let corpus = Corpus::build(2, 1, 2.0, seed);
    let models = corpus.root().join("models");
    let out = corpus.root().join("train_out");
    for (cmd, manifest) in [("train-tree", corpus.environment_manifest()), ("train-mlp", corpus.mood_manifest())] {
        let o = dalkit(&[cmd, "--jobs", "2"], &[("--input", &manifest), ("--models", &models), ("--out", &out)]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let all_clips = corpus.root().join("all");
    std::fs::create_dir_all(&all_clips).unwrap();
    for sub in ["clips/train", "clips/test"] {
        for e in std::fs::read_dir(corpus.root().join(sub)).unwrap() {
            let p = e.unwrap().path();
            std::fs::copy(&p, all_clips.join(p.file_name().unwrap())).unwrap();
        }
    }
    Fixture { corpus, models, all_clips }
}

fn read_records(out: &Path) -> Vec<AnalysisRecord<f64>> {
    std::fs::read_to_string(out.join(RECORDS_FILE))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn read_summary(out: &Path) -> std::collections::HashMap<String, String> {
    let mut r = csv::Reader::from_path(out.join(SUMMARY_FILE)).unwrap();
    let header = r.headers().unwrap().clone();
    let row = r.records().next().unwrap().unwrap();
    header.iter().map(String::from).zip(row.iter().map(String::from)).collect()
}

#[test]
fn summary_counts_match_records() {
    let f = fixture(31);
    let out = f.corpus.root().join("out");
    let o = dalkit(&["analyze"], &[("--input", &f.all_clips), ("--models", &f.models), ("--out", &out)]);
    assert!(o.status.success());
    assert!(f.models.join(TREE_FILE).exists() && f.models.join(MLP_FILE).exists());
    let records = read_records(&out);
    assert_eq!(records.len(), 10);
    let names: Vec<&str> = records.iter().map(|r| r.source_id.as_str()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted, "records follow sorted input order");

    let summary = read_summary(&out);
    assert_eq!(summary["clips"], "10");
    let analyzed = records.iter().filter(|r| r.mood.is_some()).count();
    assert_eq!(summary["analyzed"], analyzed.to_string());
    for label in MoodLabel::ALL {
        let n = records.iter().filter(|r| r.mood.as_ref().is_some_and(|m| m.label == *label)).count();
        assert_eq!(summary[&format!("mood_{label}")], n.to_string(), "{label}");
    }
    for label in EnvironmentLabel::ALL {
        let n = records.iter().filter(|r| r.environment.as_ref().is_some_and(|e| e.label == *label)).count();
        assert_eq!(summary[&format!("environment_{label}")], n.to_string(), "{label}");
    }
}

#[test]
fn corrupt_clip_is_isolated() {
    let f = fixture(32);
    std::fs::write(f.all_clips.join("broken.wav"), b"RIFF not really a wave file").unwrap();
    let out = f.corpus.root().join("out");
    let o = dalkit(&["analyze", "--jobs", "3"], &[("--input", &f.all_clips), ("--models", &f.models), ("--out", &out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let records = read_records(&out);
    assert_eq!(records.len(), 11);
    let broken = records.iter().find(|r| r.source_id == "broken.wav").unwrap();
    assert!(broken.mood.is_none() && !broken.warnings.is_empty());
    assert!(records.iter().filter(|r| r.source_id != "broken.wav").all(|r| r.mood.is_some()));
}

#[test]
fn stage_trace_follows_chain_order() {
    let f = fixture(33);
    let cfg = f.corpus.root().join("trace.json");
    std::fs::write(&cfg, r#"{"debug": {"trace_stages": true}}"#).unwrap();
    let out = f.corpus.root().join("out");
    let o = dalkit(
        &["analyze"],
        &[("--input", &f.corpus.test_dir()), ("--models", &f.models), ("--out", &out), ("--config", &cfg)],
    );
    assert!(o.status.success());
    for r in read_records(&out) {
        assert_eq!(r.stages, STAGES.to_vec(), "{}", r.source_id);
    }
}

#[test]
fn exit_codes() {
    let f = fixture(34);
    let out = f.corpus.root().join("out");

    let empty = tempfile::tempdir().unwrap();
    let o = dalkit(&["analyze"], &[("--input", empty.path()), ("--models", &f.models), ("--out", &out)]);
    assert_eq!(o.status.code(), Some(2));

    let bad = f.corpus.root().join("bad.json");
    std::fs::write(&bad, r#"{"no_such_section": 1}"#).unwrap();
    let o = dalkit(
        &["analyze"],
        &[("--input", &f.all_clips), ("--models", &f.models), ("--out", &out), ("--config", &bad)],
    );
    assert_eq!(o.status.code(), Some(3));

    let nowhere = f.corpus.root().join("no_models");
    let o = dalkit(&["analyze"], &[("--input", &f.all_clips), ("--models", &nowhere), ("--out", &out)]);
    assert_eq!(o.status.code(), Some(4));

    std::fs::write(f.models.join(TREE_FILE), "{ truncated").unwrap();
    let o = dalkit(&["analyze"], &[("--input", &f.all_clips), ("--models", &f.models), ("--out", &out)]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn evaluate_and_feature_dump() {
    let f = fixture(35);
    let out = f.corpus.root().join("out");
    let o = dalkit(
        &["evaluate", "--target", "mlp"],
        &[("--input", &f.corpus.mood_manifest()), ("--models", &f.models), ("--out", &out)],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let eval: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("evaluation_mlp.json")).unwrap()).unwrap();
    assert_eq!(eval["n"], 5);

    let o = dalkit(&["features"], &[("--input", &f.all_clips), ("--out", &out)]);
    assert!(o.status.success());
    let dump = std::fs::read_to_string(out.join(dalkit::pipeline::FEATURES_FILE)).unwrap();
    assert_eq!(dump.lines().count(), 10);
    let mut csv = csv::Reader::from_path(out.join(dalkit::pipeline::FEATURES_CSV)).unwrap();
    let width = csv.headers().unwrap().len();
    assert_eq!(width, 4 + 12 + 117);
    let rows: Vec<csv::StringRecord> = csv.records().map(|r| r.unwrap()).collect();
    assert!(rows.len() >= 10);
    assert!(rows.iter().all(|r| r.len() == width));
}

#[test]
fn seed_flag_changes_nothing_when_repeated() {
    let corpus = Corpus::build(1, 1, 2.0, 36);
    let mut models = Vec::new();
    for tag in ["a", "b"] {
        let dir = corpus.root().join(tag);
        let o = dalkit(
            &["train-mlp", "--seed", "99"],
            &[("--input", &corpus.mood_manifest()), ("--models", &dir), ("--out", &dir)],
        );
        assert!(o.status.success());
        models.push(std::fs::read(dir.join(MLP_FILE)).unwrap());
    }
    assert_eq!(models[0], models[1]);
}
