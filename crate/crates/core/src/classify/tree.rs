//! Binary decision tree grown by gain ratio over midpoint thresholds.

use serde::{Deserialize, Serialize};

use super::labels::Label;
use super::EnvironmentLabel;
use crate::error::{Error, Result};
use crate::real::Real;

pub const TREE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self { max_depth: 12, min_leaf: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", bound = "T: Real")]
pub enum Node<T> {
    /// `x[feature] <= threshold` goes left.
    Split { feature: usize, threshold: T, left: usize, right: usize },
    Leaf { label: usize, distribution: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DecisionTree<T> {
    pub version: u32,
    pub classes: Vec<String>,
    pub n_features: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Set when the training labels held a single class.
    pub single_class: bool,
    /// Node 0 is the root.
    pub nodes: Vec<Node<T>>,
}

impl<T: Real> DecisionTree<T> {
    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[Node<T>], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn root_split(&self) -> Option<(usize, T)> {
        match self.nodes.first()? {
            Node::Split { feature, threshold, .. } => Some((*feature, *threshold)),
            Node::Leaf { .. } => None,
        }
    }

    /// Class index of the reached leaf and that class's share of the leaf.
    pub fn predict_index(&self, x: &[T]) -> Result<(usize, f64)> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch { expected: self.n_features, got: x.len() });
        }
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split { feature, threshold, left, right } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf { label, distribution } => return Ok((*label, distribution[*label])),
            }
        }
    }

    pub fn predict<L: Label>(&self, x: &[T]) -> Result<(L, f64)> {
        let (i, p) = self.predict_index(x)?;
        let label = L::from_index(i).ok_or_else(|| Error::Model(format!("class index {i} out of range")))?;
        Ok((label, p))
    }
}

pub fn classify_environment<T: Real>(tree: &DecisionTree<T>, x: &[T]) -> Result<(EnvironmentLabel, f64)> {
    tree.predict(x)
}

pub(crate) fn entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.log2()
        })
        .sum()
}

/// Gain ratio of splitting `labels` into the given left/right class counts.
pub fn gain_ratio(left: &[usize], right: &[usize]) -> f64 {
    let nl: usize = left.iter().sum();
    let nr: usize = right.iter().sum();
    let n = (nl + nr) as f64;
    if nl == 0 || nr == 0 {
        return 0.0;
    }
    let parent: Vec<usize> = left.iter().zip(right).map(|(a, b)| a + b).collect();
    let (pl, pr) = (nl as f64 / n, nr as f64 / n);
    let gain = entropy(&parent) - pl * entropy(left) - pr * entropy(right);
    let split_info = -pl * pl.log2() - pr * pr.log2();
    gain.max(0.0) / split_info
}

struct Grower<'a, T> {
    rows: &'a [Vec<T>],
    y: &'a [usize],
    n_classes: usize,
    cfg: &'a TreeConfig,
    nodes: Vec<Node<T>>,
}

impl<T: Real> Grower<'_, T> {
    fn leaf(&self, idx: &[usize]) -> Node<T> {
        let mut counts = vec![0usize; self.n_classes];
        idx.iter().for_each(|&i| counts[self.y[i]] += 1);
        let n = idx.len().max(1) as f64;
        let label = argmax_first(&counts);
        Node::Leaf { label, distribution: counts.iter().map(|&c| c as f64 / n).collect() }
    }

    /// Best (feature, threshold, gain ratio); ties keep the earliest candidate.
    fn best_split(&self, idx: &[usize]) -> Option<(usize, T, f64)> {
        let d = self.rows[idx[0]].len();
        let min_leaf = self.cfg.min_leaf.max(1);
        let mut total = vec![0usize; self.n_classes];
        idx.iter().for_each(|&i| total[self.y[i]] += 1);
        let mut best: Option<(usize, T, f64)> = None;
        let mut order = idx.to_vec();
        for f in 0..d {
            order.sort_by(|&a, &b| self.rows[a][f].partial_cmp(&self.rows[b][f]).expect("finite features"));
            let mut left = vec![0usize; self.n_classes];
            for k in 0..order.len() - 1 {
                left[self.y[order[k]]] += 1;
                let (a, b) = (self.rows[order[k]][f], self.rows[order[k + 1]][f]);
                if a == b {
                    continue;
                }
                let nl = k + 1;
                if nl < min_leaf || order.len() - nl < min_leaf {
                    continue;
                }
                let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
                let gr = gain_ratio(&left, &right);
                if best.as_ref().is_none_or(|b| gr > b.2 + 1e-12) {
                    best = Some((f, (a + b) / T::lit(2.0), gr));
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let slot = self.nodes.len();
        self.nodes.push(self.leaf(&idx));
        let pure = idx.iter().all(|&i| self.y[i] == self.y[idx[0]]);
        if pure || depth >= self.cfg.max_depth {
            return slot;
        }
        let Some((feature, threshold, _)) = self.best_split(&idx) else {
            return slot;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.rows[i][feature] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[slot] = Node::Split { feature, threshold, left, right };
        slot
    }
}

fn argmax_first(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

/// Grows a tree on class indices in `0..class_names.len()`.
pub fn train_tree_indices<T: Real>(
    rows: &[Vec<T>],
    y: &[usize],
    class_names: &[String],
    cfg: &TreeConfig,
) -> Result<DecisionTree<T>> {
    if rows.is_empty() {
        return Err(Error::InvalidTrainingData("no rows".into()));
    }
    if rows.len() != y.len() {
        return Err(Error::LengthMismatch { left: rows.len(), right: y.len() });
    }
    let d = rows[0].len();
    if let Some(r) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: r.len() });
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidTrainingData("non-finite feature value".into()));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= class_names.len()) {
        return Err(Error::InvalidTrainingData(format!("class index {bad} out of range")));
    }
    let single_class = y.iter().all(|&c| c == y[0]);
    let mut g = Grower { rows, y, n_classes: class_names.len(), cfg, nodes: Vec::new() };
    g.grow((0..rows.len()).collect(), 0);
    Ok(DecisionTree {
        version: TREE_FORMAT_VERSION,
        classes: class_names.to_vec(),
        n_features: d,
        max_depth: cfg.max_depth,
        min_leaf: cfg.min_leaf,
        single_class,
        nodes: g.nodes,
    })
}

/// Grows a tree over the full label set `L`. A single-class input still
/// yields a (one-leaf) tree, marked by [`DecisionTree::single_class`].
pub fn train_tree<T: Real, L: Label>(rows: &[Vec<T>], labels: &[L], cfg: &TreeConfig) -> Result<DecisionTree<T>> {
    let y: Vec<usize> = labels.iter().map(|l| l.index()).collect();
    let names: Vec<String> = L::ALL.iter().map(|l| l.to_string()).collect();
    train_tree_indices(rows, &y, &names, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    fn full() -> TreeConfig {
        TreeConfig { max_depth: usize::MAX, min_leaf: 1 }
    }

    #[test]
    fn separable_line() {
        let rows: Vec<Vec<f64>> = [0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9].iter().map(|&v| vec![v]).collect();
        let y = [0, 0, 0, 0, 1, 1, 1, 1];
        let t = train_tree_indices(&rows, &y, &names(2), &full()).unwrap();
        assert_eq!(t.nodes.len(), 3);
        let (f, th) = t.root_split().unwrap();
        assert_eq!(f, 0);
        assert!((th - 0.5).abs() < 1e-12);
        assert_eq!(t.predict_index(&[0.9]).unwrap(), (1, 1.0));
        assert_eq!(t.predict_index(&[0.05]).unwrap(), (0, 1.0));
    }

    #[test]
    fn xor_needs_depth_two() {
        let rows = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let y = [0, 1, 1, 0];
        let t = train_tree_indices(&rows, &y, &names(2), &full()).unwrap();
        assert_eq!(t.depth(), 2);
        assert_eq!(t.n_leaves(), 4);
        assert_eq!(t.root_split(), Some((0, 0.5)));
        for (r, &c) in rows.iter().zip(&y) {
            assert_eq!(t.predict_index(r).unwrap().0, c);
        }
    }

    #[test]
    fn identical_rows_make_one_leaf() {
        let rows = vec![vec![1.0, 2.0]; 6];
        let y = [0, 1, 1, 2, 1, 0];
        let t = train_tree_indices(&rows, &y, &names(3), &full()).unwrap();
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.predict_index(&[5.0, 5.0]).unwrap().0, 1);
        assert!(!t.single_class);
    }

    #[test]
    fn single_class_is_flagged() {
        let rows = vec![vec![1.0], vec![2.0]];
        let t = train_tree::<f64, EnvironmentLabel>(&rows, &[EnvironmentLabel::Outdoor; 2], &full()).unwrap();
        assert!(t.single_class);
        assert_eq!(classify_environment(&t, &[9.0]).unwrap(), (EnvironmentLabel::Outdoor, 1.0));
        assert!(matches!(classify_environment(&t, &[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn min_leaf_and_depth_caps() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64]).collect();
        let y: Vec<usize> = (0..40).map(|i| (i / 3) % 2).collect();
        let t = train_tree_indices(&rows, &y, &names(2), &TreeConfig { max_depth: 3, min_leaf: 5 }).unwrap();
        assert!(t.depth() <= 3);
        fn check(t: &DecisionTree<f64>, rows: &[Vec<f64>]) {
            for n in &t.nodes {
                if let Node::Split { feature, threshold, .. } = n {
                    let l = rows.iter().filter(|r| r[*feature] <= *threshold).count();
                    assert!(l >= 1);
                }
            }
        }
        check(&t, &rows);
    }

    #[test]
    fn gain_ratio_known_values() {
        // perfect split of a balanced pair: gain 1 bit, split info 1 bit
        assert!((gain_ratio(&[2, 0], &[0, 2]) - 1.0).abs() < 1e-15);
        assert_eq!(gain_ratio(&[1, 1], &[1, 1]), 0.0);
        assert_eq!(gain_ratio(&[0, 0], &[1, 1]), 0.0);
    }

    proptest! {
        #[test]
        fn full_tree_fits_distinct_rows(
            pts in proptest::collection::btree_set((0i32..50, 0i32..50), 2..40),
            seed in 0u64..1000,
        ) {
            let rows: Vec<Vec<f64>> = pts.iter().map(|&(a, b)| vec![a as f64, b as f64]).collect();
            let y: Vec<usize> = (0..rows.len()).map(|i| ((i as u64 * 2654435761 + seed) % 3) as usize).collect();
            let t = train_tree_indices(&rows, &y, &names(3), &full()).unwrap();
            for (r, &c) in rows.iter().zip(&y) {
                prop_assert_eq!(t.predict_index(r).unwrap().0, c);
            }
            for n in &t.nodes {
                if let Node::Leaf { distribution, .. } = n {
                    prop_assert!((distribution.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}
