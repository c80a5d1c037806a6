//! Text classification with a regularized logistic model.
//!
//! [`features`] builds unigram+bigram TF-IDF vectors, [`model`] fits the
//! classifier by full-batch gradient descent, and [`metrics`] holds
//! accuracy, precision/recall/F1, AUC and a one-feature logistic regression.

pub mod features;
pub mod metrics;
pub mod model;

use thiserror::Error;

pub use features::{FeatureConfig, FeatureSpace, SparseVec};
pub use metrics::{accuracy, auc, fit_univariate_logistic, precision_recall_f1, Averaging, Prf, UnivariateFit};
pub use model::{fit, fit_on_space, stratified_split, EvalSplit, FitReport, Hyper, LinearModel, LogisticObjective};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinearError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("both classes must be present")]
    SingleClass,
    #[error("split leaves a class without training or evaluation examples")]
    DegenerateSplit,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("input is empty")]
    EmptyInput,
    #[error("non-finite input value")]
    NonFinite,
    #[error("train fraction must lie in (0, 1), got {0}")]
    InvalidSplit(f64),
}
