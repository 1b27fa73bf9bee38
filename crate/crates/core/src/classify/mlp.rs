//! Feed-forward network: logistic hidden layers, softmax output, trained by
//! mini-batch SGD with momentum on cross-entropy, with inverted dropout.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::labels::Label;
use super::MoodLabel;
use crate::error::{Error, Result};
use crate::features::ZNorm;
use crate::real::Real;

pub const MLP_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub dropout: f64,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64, 64, 32, 32],
            learning_rate: 0.1,
            momentum: 0.9,
            epochs: 300,
            batch_size: 8,
            dropout: 0.2,
            seed: 42,
        }
    }
}

impl MlpConfig {
    /// The large topology: 2048, 2048, 1024, 1024 hidden units.
    pub fn full_scale() -> Self {
        Self { hidden: vec![2048, 2048, 1024, 1024], ..Self::default() }
    }
}

/// Dense layer, `weights` row-major `n_out x n_in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Layer<T> {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Real> Layer<T> {
    fn zeros(n_in: usize, n_out: usize) -> Self {
        Self { n_in, n_out, weights: vec![T::zero(); n_in * n_out], bias: vec![T::zero(); n_out] }
    }

    fn forward(&self, x: &[T]) -> Vec<T> {
        (0..self.n_out)
            .map(|o| {
                let w = &self.weights[o * self.n_in..(o + 1) * self.n_in];
                self.bias[o] + w.iter().zip(x).map(|(&a, &b)| a * b).sum::<T>()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MlpModel<T> {
    pub version: u32,
    /// Input, hidden..., output widths.
    pub sizes: Vec<usize>,
    pub hidden_activation: String,
    pub dropout: f64,
    pub classes: Vec<String>,
    pub layers: Vec<Layer<T>>,
    pub norm: ZNorm<T>,
}

fn sigmoid<T: Real>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

/// Numerically stable softmax.
pub fn softmax<T: Real>(z: &[T]) -> Vec<T> {
    let m = z.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let e: Vec<T> = z.iter().map(|&v| (v - m).exp()).collect();
    let s: T = e.iter().copied().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Index of the largest value; ties resolve to the lowest index.
pub fn argmax<T: Real>(p: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(Error::InvalidTrainingData(format!("bad layer sizes {sizes:?}")));
    }
    Ok(())
}

impl<T: Real> MlpModel<T> {
    fn with_layers(sizes: &[usize], layers: Vec<Layer<T>>) -> Self {
        let n_out = *sizes.last().unwrap();
        Self {
            version: MLP_FORMAT_VERSION,
            sizes: sizes.to_vec(),
            hidden_activation: "logistic".into(),
            dropout: 0.0,
            classes: (0..n_out).map(|i| format!("c{i}")).collect(),
            layers,
            norm: ZNorm::identity(sizes[0]),
        }
    }

    pub fn zeroed(sizes: &[usize]) -> Result<Self> {
        check_sizes(sizes)?;
        let layers = sizes.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect();
        Ok(Self::with_layers(sizes, layers))
    }

    /// Uniform initialization in +-sqrt(6 / (fan_in + fan_out)), zero biases.
    pub fn random(sizes: &[usize], seed: u64) -> Result<Self> {
        check_sizes(sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let limit = (6.0 / (w[0] + w[1]) as f64).sqrt();
                let mut l = Layer::zeros(w[0], w[1]);
                l.weights.iter_mut().for_each(|v| *v = T::lit(rng.gen_range(-limit..=limit)));
                l
            })
            .collect();
        Ok(Self::with_layers(sizes, layers))
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn n_classes(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    fn param_slot(&self, mut i: usize) -> (usize, bool, usize) {
        for (k, l) in self.layers.iter().enumerate() {
            if i < l.weights.len() {
                return (k, true, i);
            }
            i -= l.weights.len();
            if i < l.bias.len() {
                return (k, false, i);
            }
            i -= l.bias.len();
        }
        panic!("parameter index out of range");
    }

    /// Parameter `i` in layer order, each layer's weights then biases.
    pub fn param(&self, i: usize) -> T {
        let (k, w, j) = self.param_slot(i);
        if w {
            self.layers[k].weights[j]
        } else {
            self.layers[k].bias[j]
        }
    }

    pub fn set_param(&mut self, i: usize, v: T) {
        let (k, w, j) = self.param_slot(i);
        if w {
            self.layers[k].weights[j] = v;
        } else {
            self.layers[k].bias[j] = v;
        }
    }

    /// Output logits for an already-normalized input, no dropout.
    pub fn logits_normalized(&self, x: &[T]) -> Vec<T> {
        let mut a = x.to_vec();
        let last = self.layers.len() - 1;
        for (k, l) in self.layers.iter().enumerate() {
            a = l.forward(&a);
            if k < last {
                a.iter_mut().for_each(|v| *v = sigmoid(*v));
            }
        }
        a
    }

    /// Class probabilities for a raw (unnormalized) feature vector.
    pub fn predict_proba(&self, x: &[T]) -> Result<Vec<T>> {
        let z = self.norm.apply(x)?;
        Ok(softmax(&self.logits_normalized(&z)))
    }

    pub fn predict_index(&self, x: &[T]) -> Result<(usize, Vec<T>)> {
        let p = self.predict_proba(x)?;
        Ok((argmax(&p), p))
    }

    pub fn predict<L: Label>(&self, x: &[T]) -> Result<(L, Vec<T>)> {
        let (i, p) = self.predict_index(x)?;
        let label = L::from_index(i).ok_or_else(|| Error::Model(format!("class index {i} out of range")))?;
        Ok((label, p))
    }

    /// Mean cross-entropy over normalized rows and its gradient with respect
    /// to every parameter (in [`Self::param`] order), without dropout.
    pub fn loss_and_gradient(&self, rows: &[Vec<T>], y: &[usize]) -> (T, Vec<T>) {
        let mut grads: Vec<Layer<T>> = self.layers.iter().map(|l| Layer::zeros(l.n_in, l.n_out)).collect();
        let mut loss = T::zero();
        for (x, &c) in rows.iter().zip(y) {
            loss = loss + self.backprop(x, c, None, &mut grads);
        }
        let n = T::from_count(rows.len());
        let flat = grads.iter().flat_map(|g| g.weights.iter().chain(&g.bias).map(|&v| v / n)).collect();
        (loss / n, flat)
    }

    /// Accumulates the gradient of one example into `grads`; `masks` holds
    /// per-hidden-layer inverted-dropout multipliers.
    fn backprop(&self, x: &[T], c: usize, masks: Option<&[Vec<T>]>, grads: &mut [Layer<T>]) -> T {
        let last = self.layers.len() - 1;
        let mut acts = vec![x.to_vec()];
        for (k, l) in self.layers.iter().enumerate() {
            let mut a = l.forward(acts.last().unwrap());
            if k < last {
                a.iter_mut().for_each(|v| *v = sigmoid(*v));
                if let Some(m) = masks {
                    a.iter_mut().zip(&m[k]).for_each(|(v, &s)| *v = *v * s);
                }
            }
            acts.push(a);
        }
        let p = softmax(&acts[last + 1]);
        let loss = if p[c].is_nan() { p[c] } else { -p[c].max(T::min_positive_value()).ln() };
        let mut delta: Vec<T> = p;
        delta[c] = delta[c] - T::one();
        for k in (0..=last).rev() {
            let l = &self.layers[k];
            let input = &acts[k];
            let g = &mut grads[k];
            for o in 0..l.n_out {
                g.bias[o] = g.bias[o] + delta[o];
                let row = &mut g.weights[o * l.n_in..(o + 1) * l.n_in];
                row.iter_mut().zip(input).for_each(|(w, &a)| *w = *w + delta[o] * a);
            }
            if k == 0 {
                break;
            }
            let mut prev = vec![T::zero(); l.n_in];
            for o in 0..l.n_out {
                let row = &l.weights[o * l.n_in..(o + 1) * l.n_in];
                prev.iter_mut().zip(row).for_each(|(p, &w)| *p = *p + w * delta[o]);
            }
            // acts[k] already carries the dropout scale; recover the sigmoid output
            for (j, p) in prev.iter_mut().enumerate() {
                let s = masks.map_or(T::one(), |m| m[k - 1][j]);
                let a = if s > T::zero() { acts[k][j] / s } else { T::zero() };
                *p = *p * s * a * (T::one() - a);
            }
            delta = prev;
        }
        loss
    }
}

/// Per-epoch mean training loss alongside the trained model.
#[derive(Debug, Clone)]
pub struct TrainedMlp<T> {
    pub model: MlpModel<T>,
    pub epoch_loss: Vec<f64>,
}

/// Trains on class indices in `0..class_names.len()`.
pub fn train_mlp_indices<T: Real>(
    rows: &[Vec<T>],
    y: &[usize],
    class_names: &[String],
    cfg: &MlpConfig,
) -> Result<TrainedMlp<T>> {
    if rows.is_empty() {
        return Err(Error::InvalidTrainingData("no rows".into()));
    }
    if rows.len() != y.len() {
        return Err(Error::LengthMismatch { left: rows.len(), right: y.len() });
    }
    let n_classes = class_names.len();
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(Error::InvalidTrainingData(format!("class index {bad} out of range")));
    }
    if y.iter().all(|&c| c == y[0]) {
        return Err(Error::SingleClassInput);
    }
    if !(0.0..1.0).contains(&cfg.dropout) {
        return Err(Error::InvalidTrainingData(format!("dropout {} outside [0, 1)", cfg.dropout)));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidTrainingData("non-finite feature value".into()));
    }
    let norm = ZNorm::fit(rows)?;
    let x: Vec<Vec<T>> = rows.iter().map(|r| norm.apply(r)).collect::<Result<_>>()?;

    let mut sizes = vec![x[0].len()];
    sizes.extend(&cfg.hidden);
    sizes.push(n_classes);
    let mut model = MlpModel::<T>::random(&sizes, cfg.seed)?;
    model.norm = norm;
    model.dropout = cfg.dropout;
    model.classes = class_names.to_vec();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let lr = T::lit(cfg.learning_rate);
    let mu = T::lit(cfg.momentum);
    let keep = 1.0 - cfg.dropout;
    let mut velocity: Vec<Layer<T>> = model.layers.iter().map(|l| Layer::zeros(l.n_in, l.n_out)).collect();
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);
    let mut last_loss = f64::NAN;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size.max(1)) {
            let mut grads: Vec<Layer<T>> = model.layers.iter().map(|l| Layer::zeros(l.n_in, l.n_out)).collect();
            for &i in batch {
                let masks: Option<Vec<Vec<T>>> = (cfg.dropout > 0.0).then(|| {
                    cfg.hidden
                        .iter()
                        .map(|&h| {
                            (0..h).map(|_| if rng.gen::<f64>() < keep { T::lit(1.0 / keep) } else { T::zero() }).collect()
                        })
                        .collect()
                });
                total += model.backprop(&x[i], y[i], masks.as_deref(), &mut grads).to_f64_lossy();
            }
            let scale = lr / T::from_count(batch.len());
            for ((l, g), v) in model.layers.iter_mut().zip(&grads).zip(velocity.iter_mut()) {
                for ((w, &gw), vw) in l.weights.iter_mut().zip(&g.weights).zip(v.weights.iter_mut()) {
                    *vw = mu * *vw - scale * gw;
                    *w = *w + *vw;
                }
                for ((b, &gb), vb) in l.bias.iter_mut().zip(&g.bias).zip(v.bias.iter_mut()) {
                    *vb = mu * *vb - scale * gb;
                    *b = *b + *vb;
                }
            }
        }
        let mean = total / x.len() as f64;
        if !mean.is_finite() {
            return Err(Error::NonfiniteLoss { epoch, last_loss });
        }
        last_loss = mean;
        epoch_loss.push(mean);
    }
    Ok(TrainedMlp { model, epoch_loss })
}

pub fn train_mlp<T: Real, L: Label>(rows: &[Vec<T>], labels: &[L], cfg: &MlpConfig) -> Result<MlpModel<T>> {
    let y: Vec<usize> = labels.iter().map(|l| l.index()).collect();
    let names: Vec<String> = L::ALL.iter().map(|l| l.to_string()).collect();
    train_mlp_indices(rows, &y, &names, cfg).map(|t| t.model)
}

pub fn classify_mood<T: Real>(model: &MlpModel<T>, x: &[T]) -> Result<(MoodLabel, Vec<T>)> {
    model.predict(x)
}
