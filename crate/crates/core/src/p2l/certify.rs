use serde::{Deserialize, Serialize};

use crate::bounds::{
    binomial_approx_bound, linear_compression_bound, linear_compression_bound_grid, p2l_bound_with_horizon,
    rescaled_kl_bound, kl_compression_bound, BoundError, BoundInputs, Certificate, LambdaGrid,
};
use crate::learners::LossSpec;

/// How the linear bound picks lambda.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LambdaMode {
    Fixed { lambda: f64 },
    Grid { lambda_min: f64, lambda_max: f64, count: usize },
}

impl Default for LambdaMode {
    fn default() -> Self {
        let g = LambdaGrid::default();
        LambdaMode::Grid {
            lambda_min: g.lambda_min,
            lambda_max: g.lambda_max,
            count: g.count,
        }
    }
}

/// What a checkpoint contributes to its certificates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointStats {
    pub m: usize,
    pub n: usize,
    /// P2L iterations run so far; the horizon of the P2L bound.
    pub iteration: usize,
    /// Mean complement loss the kl and linear bounds are computed on.
    pub certified_loss: f64,
    /// Complement zero-one error rate, classification only.
    pub zero_one: Option<f64>,
}

/// Certificates valid for one checkpoint, plus reasons for any omitted.
///
/// kl (rescaled when the loss range is not 1), linear (sigma from the
/// target bounds, else half the loss range), binomial approximation for
/// zero-one losses, and the P2L bound only when the complement error is
/// exactly zero.
pub fn certify_checkpoint(
    stats: &CheckpointStats,
    delta: f64,
    loss: &LossSpec,
    lambda_mode: &LambdaMode,
) -> (Vec<Certificate>, Vec<String>) {
    let mut certs = Vec::new();
    let mut omitted = Vec::new();
    let (label, loss_max, sigma) = match loss {
        LossSpec::AbsoluteError { bounds } => (loss.label(), bounds.loss_max(), bounds.sigma),
        // classification checkpoints are certified on the zero-one loss
        _ => ("zero_one", 1.0, 0.5),
    };
    let inputs = BoundInputs::new(stats.n as u64, stats.m as u64, stats.certified_loss, delta);
    let mut push = |name: &str, r: Result<Certificate, BoundError>| match r {
        Ok(c) => certs.push(c.with_loss_label(label)),
        Err(e) => omitted.push(format!("{name}: {e}")),
    };

    let kl = if loss_max == 1.0 {
        kl_compression_bound(&inputs)
    } else {
        rescaled_kl_bound(&inputs, loss_max)
    };
    push("kl", kl);

    if stats.zero_one.is_some() {
        push("binom", binomial_approx_bound(&inputs));
    }

    let linear = match *lambda_mode {
        LambdaMode::Fixed { lambda } => linear_compression_bound(&inputs, lambda, sigma),
        LambdaMode::Grid { lambda_min, lambda_max, count } => {
            let grid = LambdaGrid { lambda_min, lambda_max, count };
            linear_compression_bound_grid(&inputs, sigma, &grid).map(|(c, _)| c)
        }
    };
    push("linear", linear);

    match stats.zero_one {
        Some(e) if e == 0.0 => push(
            "p2l",
            p2l_bound_with_horizon(stats.m as u64, stats.n as u64, delta, stats.iteration.max(1) as u64),
        ),
        Some(e) => omitted.push(format!("p2l: complement error {e} is not zero")),
        None => omitted.push("p2l: needs a consistent classifier".into()),
    }
    (certs, omitted)
}
