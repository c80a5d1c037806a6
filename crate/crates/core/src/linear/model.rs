//! Logistic classifier trained by full-batch gradient descent.
//!
//! Objective over `n` examples with labels `y ∈ {0, 1}`:
//!
//! ```text
//! L(w, b) = (1/n) Σ [softplus(s_i) - y_i s_i] + (λ/2) ‖w‖²,   s_i = w·x_i + b
//! ```
//!
//! Steps use the fixed size `1 / L_max` where
//! `L_max = (max_i ‖x_i‖² + 1) / 4 + λ` bounds the curvature, so the loss never
//! increases. Training stops when the gradient norm drops below the
//! tolerance or after `max_epochs` steps. The bias starts at the training
//! log-odds; with zero epochs the model predicts the majority class.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::features::{FeatureConfig, FeatureSpace, SparseVec};
use super::LinearError;
use crate::rng::{derive_seed, rng_from_seed, shuffle};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    pub l2_lambda: f64,
    pub max_epochs: usize,
    pub grad_tol: f64,
    pub features: FeatureConfig,
}

impl Default for Hyper {
    fn default() -> Self {
        Self { l2_lambda: 1e-3, max_epochs: 500, grad_tol: 1e-6, features: FeatureConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSplit {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for EvalSplit {
    fn default() -> Self {
        Self { train_fraction: 0.75, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub feature_space: FeatureSpace,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub l2_lambda: f64,
    pub train_seed: u64,
}

fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + libm::exp(-s))
    } else {
        let e = libm::exp(s);
        e / (1.0 + e)
    }
}

fn softplus(s: f64) -> f64 {
    if s > 0.0 {
        s + libm::log1p(libm::exp(-s))
    } else {
        libm::log1p(libm::exp(s))
    }
}

fn dot(w: &[f64], x: &SparseVec) -> f64 {
    x.iter().map(|&(i, v)| w[i] * v).sum()
}

impl LinearModel {
    /// A model with all-zero weights and bias over `space`.
    pub fn zeros(feature_space: FeatureSpace) -> Self {
        let n = feature_space.len();
        Self { feature_space, weights: vec![0.0; n], bias: 0.0, l2_lambda: 0.0, train_seed: 0 }
    }

    pub fn decision(&self, text: &str) -> f64 {
        self.decision_vector(&self.feature_space.transform(text))
    }

    pub fn decision_vector(&self, x: &SparseVec) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    pub fn predict_proba(&self, text: &str) -> f64 {
        sigmoid(self.decision(text))
    }

    /// Positive iff the probability exceeds 0.5; exactly 0.5 is negative.
    pub fn predict(&self, text: &str) -> bool {
        self.predict_proba(text) > 0.5
    }
}

/// The regularized logistic loss over pre-featurized rows.
#[derive(Debug, Clone)]
pub struct LogisticObjective<'a> {
    pub rows: &'a [SparseVec],
    pub labels: &'a [bool],
    pub l2_lambda: f64,
    pub dim: usize,
}

impl LogisticObjective<'_> {
    pub fn loss(&self, w: &[f64], b: f64) -> f64 {
        let n = self.rows.len() as f64;
        let data: f64 = self
            .rows
            .iter()
            .zip(self.labels)
            .map(|(x, &y)| {
                let s = dot(w, x) + b;
                softplus(s) - if y { s } else { 0.0 }
            })
            .sum();
        data / n + 0.5 * self.l2_lambda * w.iter().map(|v| v * v).sum::<f64>()
    }

    /// Returns `(∂L/∂w, ∂L/∂b)`.
    pub fn gradient(&self, w: &[f64], b: f64) -> (Vec<f64>, f64) {
        let n = self.rows.len() as f64;
        let mut gw: Vec<f64> = w.iter().map(|v| self.l2_lambda * v).collect();
        let mut gb = 0.0;
        for (x, &y) in self.rows.iter().zip(self.labels) {
            let r = (sigmoid(dot(w, x) + b) - if y { 1.0 } else { 0.0 }) / n;
            for &(i, v) in x {
                gw[i] += r * v;
            }
            gb += r;
        }
        (gw, gb)
    }

    /// Curvature bound used as the inverse step size.
    pub fn lipschitz(&self) -> f64 {
        let max_sq = self
            .rows
            .iter()
            .map(|x| x.iter().map(|e| e.1 * e.1).sum::<f64>())
            .fold(0.0, f64::max);
        0.25 * (max_sq + 1.0) + self.l2_lambda
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: LinearModel,
    pub held_out_accuracy: f64,
    /// `(P(positive), gold)` for each held-out example, in `eval_indices` order.
    pub held_out: Vec<(f64, bool)>,
    pub train_indices: Vec<usize>,
    pub eval_indices: Vec<usize>,
    /// Training loss before each update, plus the final loss.
    pub loss_history: Vec<f64>,
}

/// Stratified split: every class contributes `round(n_c · fraction)`
/// examples to training and the rest to evaluation. Indices come back sorted.
pub fn stratified_split(labels: &[bool], split: &EvalSplit) -> Result<(Vec<usize>, Vec<usize>), LinearError> {
    let f = split.train_fraction;
    if !(f > 0.0 && f < 1.0) {
        return Err(LinearError::InvalidSplit(f));
    }
    let mut train = Vec::new();
    let mut eval = Vec::new();
    for class in [false, true] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.is_empty() {
            return Err(LinearError::SingleClass);
        }
        let mut rng = rng_from_seed(derive_seed(split.seed, &[class as u64]));
        shuffle(&mut rng, &mut idx);
        let k = libm::round(idx.len() as f64 * f) as usize;
        if k == 0 || k == idx.len() {
            return Err(LinearError::DegenerateSplit);
        }
        eval.extend_from_slice(&idx[k..]);
        idx.truncate(k);
        train.extend(idx);
    }
    train.sort_unstable();
    eval.sort_unstable();
    Ok((train, eval))
}

/// Gradient descent on a fixed feature space. Returns the model and the loss history.
pub fn fit_on_space<S: AsRef<str>>(
    space: FeatureSpace,
    texts: &[S],
    labels: &[bool],
    hyper: &Hyper,
    seed: u64,
) -> Result<(LinearModel, Vec<f64>), LinearError> {
    if texts.len() != labels.len() {
        return Err(LinearError::LengthMismatch { left: texts.len(), right: labels.len() });
    }
    let pos = labels.iter().filter(|&&y| y).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(LinearError::SingleClass);
    }
    let rows: Vec<SparseVec> = texts.iter().map(|t| space.transform(t.as_ref())).collect();
    let objective = LogisticObjective { rows: &rows, labels, l2_lambda: hyper.l2_lambda, dim: space.len() };
    let step = 1.0 / objective.lipschitz();
    let mut w = vec![0.0; space.len()];
    let mut b = libm::log(pos as f64 / neg as f64);
    let mut history = Vec::new();
    for _ in 0..hyper.max_epochs {
        history.push(objective.loss(&w, b));
        let (gw, gb) = objective.gradient(&w, b);
        let norm = libm::sqrt(gw.iter().map(|g| g * g).sum::<f64>() + gb * gb);
        if norm < hyper.grad_tol {
            break;
        }
        for (wi, gi) in w.iter_mut().zip(&gw) {
            *wi -= step * gi;
        }
        b -= step * gb;
    }
    history.push(objective.loss(&w, b));
    let model = LinearModel { feature_space: space, weights: w, bias: b, l2_lambda: hyper.l2_lambda, train_seed: seed };
    Ok((model, history))
}

/// Stratified split, featurization on the training part, fit, and held-out accuracy.
pub fn fit<S: AsRef<str>>(
    texts: &[S],
    labels: &[bool],
    split: &EvalSplit,
    hyper: &Hyper,
) -> Result<FitReport, LinearError> {
    if texts.len() != labels.len() {
        return Err(LinearError::LengthMismatch { left: texts.len(), right: labels.len() });
    }
    if texts.is_empty() {
        return Err(LinearError::EmptyCorpus);
    }
    let (train_indices, eval_indices) = stratified_split(labels, split)?;
    let train_texts: Vec<&str> = train_indices.iter().map(|&i| texts[i].as_ref()).collect();
    let train_labels: Vec<bool> = train_indices.iter().map(|&i| labels[i]).collect();
    let space = FeatureSpace::fit(&train_texts, hyper.features)?;
    let (model, loss_history) = fit_on_space(space, &train_texts, &train_labels, hyper, split.seed)?;
    let held_out: Vec<(f64, bool)> = eval_indices
        .iter()
        .map(|&i| (model.predict_proba(texts[i].as_ref()), labels[i]))
        .collect();
    let correct = held_out.iter().filter(|(p, y)| (*p > 0.5) == *y).count();
    let held_out_accuracy = correct as f64 / held_out.len() as f64;
    Ok(FitReport { model, held_out_accuracy, held_out, train_indices, eval_indices, loss_history })
}
