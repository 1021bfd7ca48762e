use std::io::Write;

use clap::{Args, ValueEnum};

use super::{usage, CliError};
use crate::bounds::{
    binomial_approx_bound, binomial_tail_bound, kl_compression_bound, linear_compression_bound,
    linear_compression_bound_grid, p2l_bound, rescaled_kl_bound, BoundError, BoundInputs, Certificate,
    LambdaGrid,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Kl,
    Linear,
    Binom,
    BinomTail,
    P2l,
    All,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub kind: KindArg,
    /// Training-set size.
    #[arg(long)]
    pub n: u64,
    /// Compression-set size.
    #[arg(long)]
    pub m: u64,
    /// Mean loss on the complement, in `[0, loss-max]`.
    #[arg(long, default_value_t = 0.0)]
    pub loss: f64,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    #[arg(long = "loss-max", default_value_t = 1.0)]
    pub loss_max: f64,
    /// Sub-Gaussian scale for the linear bound; defaults to `loss-max / 2`.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Fixed lambda for the linear bound.
    #[arg(long, conflicts_with = "lambda_grid")]
    pub lambda: Option<f64>,
    /// Union over the default 20-point lambda grid (the default mode).
    #[arg(long = "lambda-grid")]
    pub lambda_grid: bool,
    /// Probability of the message accompanying the compression set.
    #[arg(long = "msg-prob", default_value_t = 1.0)]
    pub msg_prob: f64,
}

fn check(args: &BoundArgs) -> Result<(), CliError> {
    if args.n == 0 {
        return Err(usage("--n", "must be >= 1"));
    }
    if args.m > args.n {
        return Err(usage("--m", format!("must be <= n ({} > {})", args.m, args.n)));
    }
    if !(args.delta > 0.0 && args.delta < 1.0) {
        return Err(usage("--delta", format!("must lie in (0, 1) (got {})", args.delta)));
    }
    if !(args.loss_max > 0.0 && args.loss_max.is_finite()) {
        return Err(usage("--loss-max", format!("must be positive (got {})", args.loss_max)));
    }
    if !(args.loss >= 0.0 && args.loss <= args.loss_max) {
        return Err(usage("--loss", format!("must lie in [0, {}] (got {})", args.loss_max, args.loss)));
    }
    if !(args.msg_prob > 0.0 && args.msg_prob <= 1.0) {
        return Err(usage("--msg-prob", format!("must lie in (0, 1] (got {})", args.msg_prob)));
    }
    if let Some(s) = args.sigma {
        if !(s > 0.0 && s.is_finite()) {
            return Err(usage("--sigma", format!("must be positive (got {s})")));
        }
    }
    if let Some(l) = args.lambda {
        if !(l > 0.0 && l.is_finite()) {
            return Err(usage("--lambda", format!("must be positive (got {l})")));
        }
    }
    let unit_only = matches!(args.kind, KindArg::Binom | KindArg::BinomTail);
    if unit_only && args.loss_max != 1.0 {
        return Err(usage("--loss-max", "binomial bounds are for the zero-one loss (loss-max 1)"));
    }
    if args.kind == KindArg::P2l && args.loss != 0.0 {
        return Err(usage("--loss", "the P2L bound needs a consistent compression set (loss 0)"));
    }
    Ok(())
}

fn bound_err(kind: &str, e: BoundError) -> CliError {
    CliError::Usage(format!("{kind}: {e}"))
}

/// Every certificate requested by `args`, in the order kl, linear, binom,
/// binom-tail, p2l. With `--kind all`, bounds whose preconditions fail are
/// skipped.
pub fn certificates(args: &BoundArgs) -> Result<Vec<Certificate>, CliError> {
    check(args)?;
    let inputs = BoundInputs::new(args.n, args.m, args.loss, args.delta).with_msg_prob(args.msg_prob);
    let all = args.kind == KindArg::All;
    let wants = |k: KindArg| all || args.kind == k;
    let mut out = Vec::new();
    let mut add = |name: &str, r: Result<Certificate, BoundError>, required: bool| -> Result<(), CliError> {
        match r {
            Ok(c) => {
                out.push(c);
                Ok(())
            }
            Err(e) if required => Err(bound_err(name, e)),
            Err(_) => Ok(()),
        }
    };
    if wants(KindArg::Kl) {
        let r = if args.loss_max == 1.0 {
            kl_compression_bound(&inputs)
        } else {
            rescaled_kl_bound(&inputs, args.loss_max)
        };
        add("kl", r, !all)?;
    }
    if wants(KindArg::Linear) {
        let sigma = args.sigma.unwrap_or(args.loss_max / 2.0);
        let r = match args.lambda {
            Some(lambda) => linear_compression_bound(&inputs, lambda, sigma),
            None => linear_compression_bound_grid(&inputs, sigma, &LambdaGrid::default()).map(|(c, _)| c),
        };
        add("linear", r, !all)?;
    }
    let unit = args.loss_max == 1.0;
    if wants(KindArg::Binom) && unit {
        add("binom", binomial_approx_bound(&inputs), !all)?;
    }
    if wants(KindArg::BinomTail) && unit {
        add("binom-tail", binomial_tail_bound(&inputs), !all)?;
    }
    if wants(KindArg::P2l) && args.loss == 0.0 {
        add("p2l", p2l_bound(args.m, args.n, args.delta), !all)?;
    }
    Ok(out)
}

pub(super) fn cmd_bound(args: &BoundArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let certs = certificates(args)?;
    let text = serde_json::to_string_pretty(&certs).expect("certificates serialize");
    writeln!(out, "{text}").map_err(|e| CliError::Data(e.to_string()))
}
