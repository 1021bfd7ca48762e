use serde::{Deserialize, Serialize};

/// Assumed range of the regression targets, plus the sub-Gaussian scale
/// used by the linear bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetBounds {
    pub y_lo: f64,
    pub y_hi: f64,
    pub margin_frac: f64,
    pub sigma: f64,
}

/// Floor on the loss range for constant targets.
pub const MIN_LOSS_RANGE: f64 = 1e-12;

impl TargetBounds {
    pub fn loss_max(&self) -> f64 {
        (self.y_hi - self.y_lo).max(MIN_LOSS_RANGE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSpec {
    ZeroOne,
    /// `-max(ln p_min, ln p_y)`, so the loss lies in `[0, -ln p_min]`.
    BoundedCrossEntropy { p_min: f64 },
    /// `|h(x) - y|`, bounded by `y_hi - y_lo` for predictions and targets
    /// inside the bounds.
    AbsoluteError { bounds: TargetBounds },
}

pub const DEFAULT_P_MIN: f64 = 1e-5;

impl LossSpec {
    pub fn bounded_cross_entropy() -> Self {
        LossSpec::BoundedCrossEntropy {
            p_min: DEFAULT_P_MIN,
        }
    }

    pub fn loss_max(&self) -> f64 {
        match self {
            LossSpec::ZeroOne => 1.0,
            LossSpec::BoundedCrossEntropy { p_min } => -p_min.ln(),
            LossSpec::AbsoluteError { bounds } => bounds.loss_max(),
        }
    }

    /// Label attached to certificates.
    pub fn label(&self) -> &'static str {
        match self {
            LossSpec::ZeroOne => "zero_one",
            LossSpec::BoundedCrossEntropy { .. } => "bounded_cross_entropy",
            LossSpec::AbsoluteError { .. } => "absolute_error",
        }
    }

    pub fn is_classification(&self) -> bool {
        !matches!(self, LossSpec::AbsoluteError { .. })
    }
}

/// Clamped cross-entropy from a log-probability of the true class.
pub fn bounded_cross_entropy(log_prob_true: f64, p_min: f64) -> f64 {
    -(log_prob_true.max(p_min.ln()))
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn zero_one(log_probs: &[f64], label: usize) -> f64 {
    if argmax(log_probs) == label {
        0.0
    } else {
        1.0
    }
}

/// Mean of per-sample losses.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Root of the mean of squares, the RMSE aggregate of absolute errors.
pub fn rms(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}
