//! Environment decision tree, mood network, and their evaluation.

mod labels;
mod metrics;
mod mlp;
mod tree;

pub use labels::{EnvironmentLabel, Label, MoodLabel};
pub use metrics::{evaluate_mlp, evaluate_tree, metrics_from_indices, metrics_from_labels, ClassMetrics, Metrics};
pub use mlp::{
    argmax, classify_mood, softmax, train_mlp, train_mlp_indices, Layer, MlpConfig, MlpModel, TrainedMlp,
    MLP_FORMAT_VERSION,
};
pub use tree::{
    classify_environment, gain_ratio, train_tree, train_tree_indices, DecisionTree, Node, TreeConfig,
    TREE_FORMAT_VERSION,
};
