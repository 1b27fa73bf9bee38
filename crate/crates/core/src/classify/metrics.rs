use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::labels::Label;
use super::mlp::MlpModel;
use super::tree::DecisionTree;
use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    /// 0 when the class is never predicted.
    pub precision: f64,
    /// 0 when the class never occurs.
    pub recall: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n: usize,
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    /// `confusion[truth][predicted]`.
    pub confusion: Vec<Vec<usize>>,
}

pub fn metrics_from_indices(predicted: &[usize], truth: &[usize], class_names: &[String]) -> Result<Metrics> {
    if truth.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch { left: predicted.len(), right: truth.len() });
    }
    let k = class_names.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for (&p, &t) in predicted.iter().zip(truth) {
        if p >= k || t >= k {
            return Err(Error::InvalidTrainingData(format!("class index outside 0..{k}")));
        }
        confusion[t][p] += 1;
    }
    let correct: usize = (0..k).map(|i| confusion[i][i]).sum();
    let per_class = (0..k)
        .map(|c| {
            let tp = confusion[c][c] as f64;
            let predicted_c: usize = confusion.iter().map(|row| row[c]).sum();
            let support: usize = confusion[c].iter().sum();
            ClassMetrics {
                label: class_names[c].clone(),
                precision: if predicted_c > 0 { tp / predicted_c as f64 } else { 0.0 },
                recall: if support > 0 { tp / support as f64 } else { 0.0 },
                support,
            }
        })
        .collect();
    Ok(Metrics { n: truth.len(), accuracy: correct as f64 / truth.len() as f64, per_class, confusion })
}

pub fn metrics_from_labels<L: Label>(predicted: &[L], truth: &[L]) -> Result<Metrics> {
    let p: Vec<usize> = predicted.iter().map(|l| l.index()).collect();
    let t: Vec<usize> = truth.iter().map(|l| l.index()).collect();
    let names: Vec<String> = L::ALL.iter().map(|l| l.to_string()).collect();
    metrics_from_indices(&p, &t, &names)
}

pub fn evaluate_tree<T: Real, L: Label>(tree: &DecisionTree<T>, rows: &[Vec<T>], truth: &[L]) -> Result<Metrics> {
    let p: Vec<L> = rows.iter().map(|r| tree.predict::<L>(r).map(|x| x.0)).collect::<Result<_>>()?;
    metrics_from_labels(&p, truth)
}

pub fn evaluate_mlp<T: Real, L: Label>(model: &MlpModel<T>, rows: &[Vec<T>], truth: &[L]) -> Result<Metrics> {
    let p: Vec<L> = rows.iter().map(|r| model.predict::<L>(r).map(|x| x.0)).collect::<Result<_>>()?;
    metrics_from_labels(&p, truth)
}

impl Metrics {
    /// Plain-text report: accuracy, per-class precision/recall, confusion matrix.
    pub fn table(&self) -> String {
        let w = self.per_class.iter().map(|c| c.label.len()).max().unwrap_or(5).max(9);
        let mut s = String::new();
        let _ = writeln!(s, "accuracy {:.4} (n = {})", self.accuracy, self.n);
        let _ = writeln!(s, "{:<w$} {:>9} {:>9} {:>7}", "class", "precision", "recall", "support");
        for c in &self.per_class {
            let _ = writeln!(s, "{:<w$} {:>9.4} {:>9.4} {:>7}", c.label, c.precision, c.recall, c.support);
        }
        let _ = write!(s, "{:<w$}", "truth\\pred");
        for c in &self.per_class {
            let _ = write!(s, " {:>w$}", c.label);
        }
        s.push('\n');
        for (c, row) in self.per_class.iter().zip(&self.confusion) {
            let _ = write!(s, "{:<w$}", c.label);
            for v in row {
                let _ = write!(s, " {v:>w$}");
            }
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::MoodLabel;

    #[test]
    fn perfect_predictions() {
        let t = [MoodLabel::Laugh, MoodLabel::Cry, MoodLabel::Sigh, MoodLabel::Cry];
        let m = metrics_from_labels(&t, &t).unwrap();
        assert_eq!(m.accuracy, 1.0);
        for (i, row) in m.confusion.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert!(i == j || v == 0);
            }
        }
    }

    #[test]
    fn constant_predictor_on_balanced_set() {
        let truth: Vec<MoodLabel> = MoodLabel::ALL.iter().flat_map(|&l| [l; 4]).collect();
        let m = metrics_from_labels(&[MoodLabel::Sing; 20], &truth).unwrap();
        assert!((m.accuracy - 0.2).abs() < 1e-15);
        assert_eq!(m.per_class[1].recall, 1.0);
        assert_eq!(m.per_class[1].precision, 0.2);
        assert_eq!(m.per_class[0].precision, 0.0);
    }

    #[test]
    fn hand_counted_confusion() {
        let names: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
        let truth = [0, 0, 1, 1, 2, 2];
        let pred = [0, 1, 1, 1, 0, 2];
        let m = metrics_from_indices(&pred, &truth, &names).unwrap();
        assert_eq!(m.confusion, vec![vec![1, 1, 0], vec![0, 2, 0], vec![1, 0, 1]]);
        assert!((m.accuracy - 4.0 / 6.0).abs() < 1e-15);
        assert!((m.per_class[0].precision - 0.5).abs() < 1e-15);
        assert!((m.per_class[1].precision - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.per_class[2].recall - 0.5).abs() < 1e-15);
        assert!(m.table().contains("accuracy 0.6667"));
    }

    #[test]
    fn empty_test_set() {
        assert!(matches!(metrics_from_indices(&[], &[], &[]), Err(Error::EmptyTestSet)));
    }
}
