//! Deterministic learners and loss functions used as the reconstruction
//! function inside Pick-To-Learn.
//!
//! Every learner is a pure function of `(config, data, seed)`: forests draw
//! bootstrap samples and MLPs draw initial weights, shuffles and dropout
//! masks from counter-based ChaCha streams.

mod forest;
mod loss;
mod mlp;
mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::seeding::derive_seed;

pub use forest::{bootstrap_indices, forest_fit, forest_predict, Forest};
pub use loss::{
    argmax, bounded_cross_entropy, mean, rms, zero_one, LossSpec, TargetBounds, DEFAULT_P_MIN,
    MIN_LOSS_RANGE,
};
pub use mlp::{log_softmax, mlp_train, Gradients, Layer, Mlp, MlpParams, Optimizer, OptimizerState};
pub use tree::{tree_build, Node, Tree, TreeParams};

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("training set is empty")]
    EmptyTrainSet,
    #[error("invalid learner parameters: {0}")]
    InvalidParams(String),
    #[error("learner and data are incompatible: {0}")]
    Incompatible(String),
    #[error("training diverged: {0}")]
    NonFinite(String),
    #[error("model file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", content = "params", rename_all = "snake_case")]
pub enum LearnerConfig {
    Tree(TreeParams),
    Forest(TreeParams),
    Mlp(MlpParams),
}

impl LearnerConfig {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerConfig::Tree(_) => "tree",
            LearnerConfig::Forest(_) => "forest",
            LearnerConfig::Mlp(_) => "mlp",
        }
    }

    pub fn is_classifier(&self) -> bool {
        matches!(self, LearnerConfig::Mlp(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Model {
    /// Predicts 0 everywhere; the starting point for tree-based P2L.
    Zero { n_features: usize },
    Tree(Tree),
    Forest(Forest),
    Mlp(Mlp),
}

impl Model {
    /// Real-valued prediction. Classifiers return the predicted class.
    pub fn predict(&self, x: &[f64]) -> f64 {
        match self {
            Model::Zero { .. } => 0.0,
            Model::Tree(t) => t.predict(x),
            Model::Forest(f) => f.predict(x),
            Model::Mlp(net) => argmax(&net.forward(x)) as f64,
        }
    }

    /// Class log-probabilities; `None` for regressors.
    pub fn log_probs(&self, x: &[f64]) -> Option<Vec<f64>> {
        match self {
            Model::Mlp(net) => Some(net.log_probs(x)),
            _ => None,
        }
    }
}

fn rows(data: &Dataset) -> Vec<&[f64]> {
    (0..data.len()).map(|i| data.row(i)).collect()
}

fn real_targets(data: &Dataset) -> Vec<f64> {
    (0..data.len()).map(|i| data.target_value(i)).collect()
}

/// Model before any training: zeros for tree learners, the seeded random
/// initialization for the MLP.
pub fn initial_model(config: &LearnerConfig, n_features: usize, n_classes: usize, seed: u64) -> Model {
    match config {
        LearnerConfig::Tree(_) | LearnerConfig::Forest(_) => Model::Zero { n_features },
        LearnerConfig::Mlp(p) => Model::Mlp(Mlp::init(
            n_features,
            &p.hidden,
            n_classes,
            derive_seed(seed, &[p.init_seed]),
        )),
    }
}

/// Fit a learner from scratch on all of `train`.
pub fn learner_fit(config: &LearnerConfig, train: &Dataset, seed: u64) -> Result<Model, LearnerError> {
    if train.is_empty() {
        return Err(LearnerError::EmptyTrainSet);
    }
    match config {
        LearnerConfig::Tree(p) => Ok(Model::Tree(tree_build(&rows(train), &real_targets(train), p)?)),
        LearnerConfig::Forest(p) => {
            let p = TreeParams {
                bootstrap_seed: derive_seed(seed, &[p.bootstrap_seed]),
                ..*p
            };
            Ok(Model::Forest(forest_fit(&rows(train), &real_targets(train), &p)?))
        }
        LearnerConfig::Mlp(p) => {
            let n_classes = train
                .n_classes()
                .ok_or_else(|| LearnerError::Incompatible("MLP needs class labels".into()))?;
            let Model::Mlp(mut net) = initial_model(config, train.n_features(), n_classes, seed) else {
                unreachable!()
            };
            let idx: Vec<usize> = (0..train.len()).collect();
            mlp_train(&mut net, train, &idx, None, p, seed, 0)?;
            Ok(Model::Mlp(net))
        }
    }
}

/// Per-sample loss. For `AbsoluteError` the prediction is first clipped to
/// `[y_lo, y_hi]`, which keeps the loss within `loss_max` for in-range
/// targets even for the all-zero start model.
///
/// Panics if a classification loss is applied to a regressor.
pub fn loss_eval(spec: &LossSpec, model: &Model, x: &[f64], y: f64) -> f64 {
    match spec {
        LossSpec::AbsoluteError { bounds } => {
            (model.predict(x).clamp(bounds.y_lo, bounds.y_hi) - y).abs()
        }
        LossSpec::ZeroOne => {
            let lp = model.log_probs(x).expect("classification loss needs a classifier");
            zero_one(&lp, y as usize)
        }
        LossSpec::BoundedCrossEntropy { p_min } => {
            let lp = model.log_probs(x).expect("classification loss needs a classifier");
            bounded_cross_entropy(lp[y as usize], *p_min)
        }
    }
}

pub fn sample_losses(spec: &LossSpec, model: &Model, data: &Dataset, idx: &[usize]) -> Vec<f64> {
    idx.iter()
        .map(|&i| loss_eval(spec, model, data.row(i), data.target_value(i)))
        .collect()
}

fn all_rows(data: &Dataset) -> Vec<usize> {
    (0..data.len()).collect()
}

/// Mean per-sample loss over `data`.
pub fn risk_eval(spec: &LossSpec, model: &Model, data: &Dataset) -> f64 {
    mean(&sample_losses(spec, model, data, &all_rows(data)))
}

/// Root mean square of per-sample losses (RMSE for `AbsoluteError`).
pub fn rms_risk_eval(spec: &LossSpec, model: &Model, data: &Dataset) -> f64 {
    rms(&sample_losses(spec, model, data, &all_rows(data)))
}

pub const MODEL_FORMAT: &str = "compress-cert-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: Model,
}

pub fn model_to_json(model: &Model) -> String {
    serde_json::to_string_pretty(&ModelFile {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        model: model.clone(),
    })
    .expect("models serialize")
}

pub fn model_from_json(text: &str) -> Result<Model, LearnerError> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| LearnerError::Format(e.to_string()))?;
    if file.format != MODEL_FORMAT {
        return Err(LearnerError::Format(format!("unknown format {:?}", file.format)));
    }
    if file.version != MODEL_VERSION {
        return Err(LearnerError::Format(format!("unsupported version {}", file.version)));
    }
    Ok(file.model)
}
