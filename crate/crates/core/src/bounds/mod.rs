//! Generalization bounds for sample-compressed predictors.
//!
//! Every certificate consumes a [`BoundInputs`]: the training-set size `n`,
//! the compression-set size `m`, the mean loss on the `n - m` points left
//! out of the compression set, the message probability and the confidence
//! level `delta`. All functions here are pure; identical inputs give
//! identical outputs on every thread.
//!
//! The compression-set prior is `C(n, m)^{-1} * zeta(m)` with
//! `zeta(m) = 6 / (pi^2 (m+1)^2)`, so every bound carries the complexity
//! term `ln C(n, m) + ln(1 / (zeta(m) * msg_prob * delta))`.

mod binomial;
mod comparator;
mod kl;
mod p2l;
mod special;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use binomial::{binomial_approx_bound, binomial_tail_bound, binomial_tail_inv, complement_errors};
pub use comparator::{
    generic_compression_bound, linear_compression_bound, linear_compression_bound_grid,
    maurer_sum, optimal_lambda, ComparatorSpec, LambdaGrid,
};
pub use kl::{kl_compression_bound, kl_div, kl_inv, rescaled_kl_bound};
pub use p2l::{p2l_bound, p2l_bound_with_horizon, p2l_psi};
pub use special::{ln_zeta_prior, log_choose, log_sum_exp, zeta_prior, MAX_BISECTION_ITERS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

/// The tuple every certificate is computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n: u64,
    pub m: u64,
    /// Mean per-sample loss on the complement of the compression set.
    pub loss_complement: f64,
    pub delta: f64,
    pub msg_prob: f64,
}

impl BoundInputs {
    /// Inputs with `msg_prob = 1`, the empty-message case.
    pub fn new(n: u64, m: u64, loss_complement: f64, delta: f64) -> Self {
        Self {
            n,
            m,
            loss_complement,
            delta,
            msg_prob: 1.0,
        }
    }

    pub fn with_msg_prob(mut self, msg_prob: f64) -> Self {
        self.msg_prob = msg_prob;
        self
    }

    pub fn with_loss(mut self, loss_complement: f64) -> Self {
        self.loss_complement = loss_complement;
        self
    }

    /// Number of points outside the compression set.
    pub fn complement_size(&self) -> u64 {
        self.n - self.m
    }

    pub fn validate(&self) -> Result<(), BoundError> {
        if self.n == 0 {
            return Err(BoundError::Domain("n must be at least 1".into()));
        }
        if self.m > self.n {
            return Err(BoundError::Domain(format!(
                "m must not exceed n (m={}, n={})",
                self.m, self.n
            )));
        }
        if !(self.msg_prob > 0.0 && self.msg_prob <= 1.0) {
            return Err(BoundError::Domain(format!(
                "msg_prob must lie in (0, 1] (got {})",
                self.msg_prob
            )));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(BoundError::Domain(format!(
                "delta must lie in (0, 1] (got {})",
                self.delta
            )));
        }
        if !(self.loss_complement >= 0.0 && self.loss_complement.is_finite()) {
            return Err(BoundError::Domain(format!(
                "loss_complement must be finite and non-negative (got {})",
                self.loss_complement
            )));
        }
        Ok(())
    }

    /// `ln C(n, m) + ln(1 / (zeta(m) * msg_prob * delta))`, the complexity
    /// term shared by every compression bound.
    pub fn complexity(&self) -> Result<f64, BoundError> {
        Ok(log_choose(self.n, self.m)?
            - ln_zeta_prior(self.m)
            - self.msg_prob.ln()
            - self.delta.ln())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundKind {
    #[serde(rename = "kl")]
    KlBound,
    #[serde(rename = "linear")]
    LinearBound,
    #[serde(rename = "binom")]
    BinomialApprox,
    #[serde(rename = "binom-tail")]
    BinomialTailInv,
    #[serde(rename = "p2l")]
    P2LBound,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::KlBound => "kl",
            BoundKind::LinearBound => "linear",
            BoundKind::BinomialApprox => "binom",
            BoundKind::BinomialTailInv => "binom-tail",
            BoundKind::P2LBound => "p2l",
        }
    }
}

/// An upper bound on the true risk, in the loss's native units.
///
/// Serializes as a flat JSON object
/// `{kind, value, n, m, loss_complement, delta, msg_prob, scale}`; the
/// optional `loss` label and `vacuous` flag are emitted only when set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(rename = "kind")]
    pub bound_kind: BoundKind,
    #[serde(rename = "value")]
    pub bound_value: f64,
    #[serde(flatten)]
    pub inputs: BoundInputs,
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<String>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub vacuous: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

impl Certificate {
    pub(crate) fn new(bound_kind: BoundKind, bound_value: f64, inputs: BoundInputs) -> Self {
        Self {
            bound_kind,
            bound_value,
            inputs,
            scale: 1.0,
            loss: None,
            vacuous: false,
        }
    }

    pub fn with_loss_label(mut self, label: impl Into<String>) -> Self {
        self.loss = Some(label.into());
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certificate_json_shape() {
        let c = kl_compression_bound(&BoundInputs::new(100, 3, 0.1, 0.01)).unwrap();
        let v: serde_json::Value = serde_json::to_value(&c).unwrap();
        let obj = v.as_object().unwrap();
        let mut keys: Vec<_> = obj.keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            ["delta", "kind", "loss_complement", "m", "msg_prob", "n", "scale", "value"]
        );
        assert_eq!(obj["kind"], "kl");
        let back: Certificate = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        assert!(BoundInputs::new(0, 0, 0.0, 0.1).validate().is_err());
        assert!(BoundInputs::new(5, 6, 0.0, 0.1).validate().is_err());
        assert!(BoundInputs::new(5, 1, -0.1, 0.1).validate().is_err());
        assert!(BoundInputs::new(5, 1, 0.1, 0.0).validate().is_err());
        assert!(BoundInputs::new(5, 1, 0.1, 0.1)
            .with_msg_prob(0.0)
            .validate()
            .is_err());
        assert!(BoundInputs::new(5, 5, 0.0, 1.0).validate().is_ok());
    }
}
