//! Datasets, loaders, splits and synthetic generators.

mod idx;
mod split;
mod synth;
mod tabular;
mod targets;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use idx::{filter_digit_pair, load_idx, parse_idx_images, parse_idx_labels};
pub use split::{split, Splits};
pub use synth::{synth_classify, synth_regress};
pub use tabular::{load_csv, parse_csv};
pub use targets::target_bounds;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("IDX parse error at byte {offset}: {message}")]
    Idx { offset: usize, message: String },
    #[error("CSV error: {0}")]
    Csv(String),
    #[error("invalid dataset: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub source: String,
    pub split_seed: Option<u64>,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Targets {
    Real(Vec<f64>),
    Class { labels: Vec<usize>, n_classes: usize },
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Real(v) => v.len(),
            Targets::Class { labels, .. } => labels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn select(&self, indices: &[usize]) -> Targets {
        match self {
            Targets::Real(v) => Targets::Real(indices.iter().map(|&i| v[i]).collect()),
            Targets::Class { labels, n_classes } => Targets::Class {
                labels: indices.iter().map(|&i| labels[i]).collect(),
                n_classes: *n_classes,
            },
        }
    }
}

/// Row-major feature matrix with targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<f64>,
    n_features: usize,
    targets: Targets,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        n_features: usize,
        targets: Targets,
        meta: DatasetMeta,
    ) -> Result<Self, DataError> {
        let n = targets.len();
        if n_features == 0 {
            return Err(DataError::Invalid("need at least one feature".into()));
        }
        if features.len() != n * n_features {
            return Err(DataError::Invalid(format!(
                "feature buffer has {} values, expected {n} x {n_features}",
                features.len()
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(DataError::Invalid(format!(
                "non-finite feature in row {}",
                pos / n_features
            )));
        }
        match &targets {
            Targets::Real(v) => {
                if let Some(i) = v.iter().position(|y| !y.is_finite()) {
                    return Err(DataError::Invalid(format!("non-finite target in row {i}")));
                }
            }
            Targets::Class { labels, n_classes } => {
                if let Some(i) = labels.iter().position(|&l| l >= *n_classes) {
                    return Err(DataError::Invalid(format!(
                        "label {} in row {i} outside 0..{n_classes}",
                        labels[i]
                    )));
                }
            }
        }
        Ok(Self {
            features,
            n_features,
            targets,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn targets(&self) -> &Targets {
        &self.targets
    }

    pub fn real_targets(&self) -> Option<&[f64]> {
        match &self.targets {
            Targets::Real(v) => Some(v),
            Targets::Class { .. } => None,
        }
    }

    pub fn labels(&self) -> Option<&[usize]> {
        match &self.targets {
            Targets::Class { labels, .. } => Some(labels),
            Targets::Real(_) => None,
        }
    }

    pub fn n_classes(&self) -> Option<usize> {
        match &self.targets {
            Targets::Class { n_classes, .. } => Some(*n_classes),
            Targets::Real(_) => None,
        }
    }

    /// Target of row `i` as a real number (class labels cast to `f64`).
    pub fn target_value(&self, i: usize) -> f64 {
        match &self.targets {
            Targets::Real(v) => v[i],
            Targets::Class { labels, .. } => labels[i] as f64,
        }
    }

    /// Rows at `indices`, in the given order. An empty selection is allowed.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Dataset {
            features,
            n_features: self.n_features,
            targets: self.targets.select(indices),
            meta: self.meta.clone(),
        }
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.meta.role = role;
        self
    }

    /// Row-wise concatenation; both sets must share feature count and
    /// target type.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset, DataError> {
        if self.n_features != other.n_features {
            return Err(DataError::Invalid("feature counts differ".into()));
        }
        let targets = match (&self.targets, &other.targets) {
            (Targets::Real(a), Targets::Real(b)) => {
                Targets::Real(a.iter().chain(b).copied().collect())
            }
            (
                Targets::Class {
                    labels: a,
                    n_classes: ca,
                },
                Targets::Class {
                    labels: b,
                    n_classes: cb,
                },
            ) => Targets::Class {
                labels: a.iter().chain(b).copied().collect(),
                n_classes: *ca.max(cb),
            },
            _ => return Err(DataError::Invalid("target types differ".into())),
        };
        let mut features = self.features.clone();
        features.extend_from_slice(&other.features);
        Ok(Dataset {
            features,
            n_features: self.n_features,
            targets,
            meta: self.meta.clone(),
        })
    }
}

impl DatasetMeta {
    /// Unsplit training data from `source`.
    pub fn new(source: impl Into<String>) -> Self {
        DatasetMeta {
            source: source.into(),
            split_seed: None,
            role: Role::Train,
        }
    }
}

pub(crate) fn meta(source: impl Into<String>) -> DatasetMeta {
    DatasetMeta::new(source)
}
