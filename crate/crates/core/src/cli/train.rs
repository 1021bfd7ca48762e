use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{usage, write_atomic, CliError};
use crate::bounds::Certificate;
use crate::data::{
    filter_digit_pair, load_csv, load_idx, split, synth_classify, synth_regress, target_bounds, Dataset,
};
use crate::learners::{
    model_to_json, rms_risk_eval, LearnerConfig, LossSpec, MlpParams, Optimizer, TargetBounds, TreeParams,
};
use crate::p2l::{
    p2l_classify, p2l_regress, select_checkpoint, trace_to_csv, Checkpoint, LambdaMode, P2LConfig,
    SelectionCriterion, TraceStatus,
};

pub const REPORT_FORMAT: &str = "compress-cert-report";
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classify,
    Regress,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LearnerArg {
    Tree,
    Forest,
    Mlp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizerArg {
    Adam,
    Sgd,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub task: Task,
    /// CSV path, `idx:<images>,<labels>`, `synth:classify[:n=..,d=..,sep=..,seed=..]`
    /// or `synth:regress[:n=..,d=..,noise=..,seed=..]`.
    #[arg(long)]
    pub dataset: String,
    /// Built-in test set in the same syntax; when given, no test split is carved.
    #[arg(long)]
    pub test: Option<String>,
    /// Keep two digits of an IDX dataset, e.g. `0,8`.
    #[arg(long)]
    pub digits: Option<String>,
    #[arg(long, value_enum)]
    pub learner: LearnerArg,
    #[arg(long, default_value = "1,2,3,4,42")]
    pub seeds: String,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    /// Points added per P2L iteration.
    #[arg(long = "batch-R", default_value_t = 1)]
    pub batch_r: usize,
    /// Regression: iterations without improvement before stopping.
    #[arg(long, default_value_t = 10)]
    pub patience: usize,
    #[arg(long = "max-iterations")]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long = "max-depth", default_value_t = 10)]
    pub max_depth: usize,
    #[arg(long = "min-samples-leaf", default_value_t = 1)]
    pub min_samples_leaf: usize,
    #[arg(long = "n-estimators", default_value_t = 50)]
    pub n_estimators: usize,
    /// Hidden layer widths, e.g. `600,600,600`.
    #[arg(long, default_value = "32")]
    pub hidden: String,
    #[arg(long, default_value_t = 0.1)]
    pub dropout: f64,
    #[arg(long = "lr", default_value_t = 1e-3)]
    pub learning_rate: f64,
    #[arg(long, value_enum, default_value = "adam")]
    pub optimizer: OptimizerArg,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    /// MLP: epochs without validation improvement before stopping.
    #[arg(long = "epoch-patience", default_value_t = 3)]
    pub epoch_patience: usize,
    /// Target-range margin as a fraction of the observed range.
    #[arg(long, default_value_t = 0.1)]
    pub margin: f64,
    /// Fixed lambda for the linear bound (default: 20-point grid).
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub task: Task,
    pub dataset: String,
    pub test: Option<String>,
    pub digits: Option<String>,
    pub learner: LearnerConfig,
    pub seeds: Vec<u64>,
    pub delta: f64,
    pub batch_r: usize,
    pub patience: usize,
    pub max_iterations: Option<usize>,
    pub margin: f64,
    pub lambda_mode: LambdaMode,
    /// `zero_one` for classification, `rmse` for regression.
    pub test_metric: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSummary {
    pub iteration: usize,
    pub m: usize,
    pub complement_loss: f64,
    pub validation_loss: Option<f64>,
    pub certificates: Vec<Certificate>,
}

impl From<&Checkpoint> for CheckpointSummary {
    fn from(c: &Checkpoint) -> Self {
        Self {
            iteration: c.iteration,
            m: c.m(),
            complement_loss: c.certified_loss(),
            validation_loss: c.validation_loss,
            certificates: c.certificates.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub status: TraceStatus,
    pub n_train: usize,
    pub target_bounds: Option<TargetBounds>,
    /// Checkpoint of the returned model.
    pub returned: CheckpointSummary,
    pub min_kl: CheckpointSummary,
    pub test_loss: Option<f64>,
    pub trace_file: String,
    pub model_file: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation over seeds.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format: String,
    pub version: u32,
    pub config: ReportConfig,
    pub seeds: Vec<SeedResult>,
    /// Mean and std over seeds of the returned checkpoints' statistics.
    pub aggregate: BTreeMap<String, MeanStd>,
    pub unconverged_seeds: Vec<u64>,
}

fn parse_list<T: std::str::FromStr>(flag: &str, s: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(|p| p.trim().parse().map_err(|_| usage(flag, format!("cannot parse {p:?}"))))
        .collect()
}

fn synth_options(flag: &str, rest: &str) -> Result<BTreeMap<String, f64>, CliError> {
    let mut out = BTreeMap::new();
    for kv in rest.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| usage(flag, format!("expected key=value, got {kv:?}")))?;
        let v: f64 = v.parse().map_err(|_| usage(flag, format!("bad number in {kv:?}")))?;
        out.insert(k.to_string(), v);
    }
    Ok(out)
}

/// Load a dataset from its command-line description.
pub fn load_dataset(flag: &str, spec: &str, digits: Option<&str>) -> Result<Dataset, CliError> {
    let data_err = |e: crate::data::DataError| CliError::Data(format!("{spec}: {e}"));
    let data = if let Some(rest) = spec.strip_prefix("synth:") {
        let (kind, opts) = rest.split_once(':').unwrap_or((rest, ""));
        let o = synth_options(flag, opts)?;
        let get = |k: &str, d: f64| o.get(k).copied().unwrap_or(d);
        let allowed: &[&str] = match kind {
            "classify" => &["n", "d", "sep", "seed"],
            "regress" => &["n", "d", "noise", "seed"],
            _ => return Err(usage(flag, format!("unknown synthetic kind {kind:?}"))),
        };
        if let Some(k) = o.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(usage(flag, format!("unknown option {k:?} for synth:{kind}")));
        }
        let n = get("n", if kind == "classify" { 2000.0 } else { 500.0 }) as usize;
        let d = get("d", if kind == "classify" { 2.0 } else { 3.0 }) as usize;
        if n == 0 || d == 0 {
            return Err(usage(flag, "n and d must be positive"));
        }
        let seed = get("seed", 0.0) as u64;
        if kind == "classify" {
            synth_classify(n, d, get("sep", 4.0), seed)
        } else {
            synth_regress(n, d, get("noise", 0.3), seed)
        }
    } else if let Some(rest) = spec.strip_prefix("idx:") {
        let (img, lab) = rest
            .split_once(',')
            .ok_or_else(|| usage(flag, "expected idx:<images>,<labels>"))?;
        load_idx(img, lab).map_err(data_err)?
    } else {
        load_csv(spec).map_err(data_err)?
    };
    match digits {
        None => Ok(data),
        Some(d) => {
            let pair: Vec<usize> = parse_list("--digits", d)?;
            if pair.len() != 2 {
                return Err(usage("--digits", "expected two digits, e.g. 0,8"));
            }
            filter_digit_pair(&data, pair[0], pair[1]).map_err(|e| usage("--digits", e))
        }
    }
}

fn learner_config(args: &TrainArgs) -> Result<LearnerConfig, CliError> {
    let tree = TreeParams {
        max_depth: args.max_depth,
        min_samples_leaf: args.min_samples_leaf,
        n_estimators: args.n_estimators,
        ..TreeParams::default()
    };
    let cfg = match (args.task, args.learner) {
        (Task::Regress, LearnerArg::Tree) => LearnerConfig::Tree(tree),
        (Task::Regress, LearnerArg::Forest) => LearnerConfig::Forest(tree),
        (Task::Classify, LearnerArg::Mlp) => LearnerConfig::Mlp(MlpParams {
            hidden: parse_list("--hidden", &args.hidden)?,
            dropout_prob: args.dropout,
            learning_rate: args.learning_rate,
            optimizer: match args.optimizer {
                OptimizerArg::Adam => Optimizer::adam(),
                OptimizerArg::Sgd => Optimizer::Sgd,
            },
            max_epochs: args.epochs,
            patience_epochs: args.epoch_patience,
            ..MlpParams::default()
        }),
        (Task::Classify, _) => return Err(usage("--learner", "classification uses the mlp learner")),
        (Task::Regress, _) => return Err(usage("--learner", "regression uses the tree or forest learner")),
    };
    match &cfg {
        LearnerConfig::Mlp(p) => p.validate(),
        LearnerConfig::Tree(p) | LearnerConfig::Forest(p) => p.validate(),
    }
    .map_err(|e| usage("--learner", e))?;
    Ok(cfg)
}

fn test_loss(task: Task, model: &crate::learners::Model, test: &Dataset, loss: &LossSpec) -> f64 {
    match task {
        Task::Classify => crate::learners::risk_eval(&LossSpec::ZeroOne, model, test),
        Task::Regress => rms_risk_eval(loss, model, test),
    }
}

fn run_seed(
    args: &TrainArgs,
    learner: &LearnerConfig,
    base: &P2LConfig,
    data: &Dataset,
    test: Option<&Dataset>,
    seed: u64,
) -> Result<SeedResult, CliError> {
    let splits = split(data, seed, test.is_some()).map_err(|e| CliError::Data(e.to_string()))?;
    let test_set = test.or(splits.test.as_ref());
    let (outcome, bounds, loss) = match args.task {
        Task::Classify => {
            let cfg = P2LConfig { seed, ..base.clone() };
            let out = p2l_classify(&splits.train, Some(&splits.val), learner, &cfg)
                .map_err(|e| CliError::Data(e.to_string()))?;
            (out, None, cfg.loss)
        }
        Task::Regress => {
            let y = splits.train.real_targets().expect("checked regression targets");
            let bounds = target_bounds(y, args.margin).map_err(|e| CliError::Data(e.to_string()))?;
            let cfg = P2LConfig {
                seed,
                loss: LossSpec::AbsoluteError { bounds },
                ..base.clone()
            };
            let out = p2l_regress(&splits.train, Some(&splits.val), learner, &cfg)
                .map_err(|e| CliError::Data(e.to_string()))?;
            (out, Some(bounds), cfg.loss)
        }
    };
    let trace = &outcome.trace;
    let trace_file = format!("trace_seed{seed}.csv");
    let model_file = format!("model_seed{seed}.json");
    let io = |e: std::io::Error| CliError::Data(format!("{}: {e}", args.out.display()));
    write_atomic(&args.out.join(&trace_file), trace_to_csv(&trace.rows()).as_bytes()).map_err(io)?;
    write_atomic(&args.out.join(&model_file), model_to_json(&outcome.model).as_bytes()).map_err(io)?;
    Ok(SeedResult {
        seed,
        status: trace.status,
        n_train: splits.train.len(),
        target_bounds: bounds,
        returned: (&trace.checkpoints[trace.returned]).into(),
        min_kl: select_checkpoint(trace, SelectionCriterion::MinKlBound).into(),
        test_loss: test_set
            .filter(|t| !t.is_empty())
            .map(|t| test_loss(args.task, &outcome.model, t, &loss)),
        trace_file,
        model_file,
    })
}

fn aggregate(results: &[SeedResult]) -> BTreeMap<String, MeanStd> {
    let mut cols: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in results {
        let c = &r.returned;
        cols.entry("m".into()).or_default().push(c.m as f64);
        cols.entry("complement_loss".into()).or_default().push(c.complement_loss);
        if let Some(v) = c.validation_loss {
            cols.entry("validation_loss".into()).or_default().push(v);
        }
        if let Some(t) = r.test_loss {
            cols.entry("test_loss".into()).or_default().push(t);
        }
        for cert in &c.certificates {
            cols.entry(format!("{}_bound", cert.bound_kind.as_str()))
                .or_default()
                .push(cert.bound_value);
        }
        cols.entry("min_kl_m".into()).or_default().push(r.min_kl.m as f64);
        if let Some(kl) = r.min_kl.certificates.iter().find(|c| c.bound_kind == crate::bounds::BoundKind::KlBound) {
            cols.entry("min_kl_bound".into()).or_default().push(kl.bound_value);
        }
    }
    // a statistic missing for some seeds would not be recomputable per seed
    cols.into_iter()
        .filter(|(_, v)| v.len() == results.len())
        .map(|(k, v)| (k, MeanStd::of(&v)))
        .collect()
}

pub(super) fn cmd_train(args: &TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let seeds: Vec<u64> = parse_list("--seeds", &args.seeds)?;
    if seeds.is_empty() {
        return Err(usage("--seeds", "need at least one seed"));
    }
    let mut seen = seeds.clone();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(usage("--seeds", "seeds must be distinct"));
    }
    if !(args.delta > 0.0 && args.delta < 1.0) {
        return Err(usage("--delta", format!("must lie in (0, 1) (got {})", args.delta)));
    }
    if args.batch_r == 0 {
        return Err(usage("--batch-R", "must be >= 1"));
    }
    if args.patience == 0 {
        return Err(usage("--patience", "must be >= 1"));
    }
    if !(0.0..=1.0).contains(&args.margin) {
        return Err(usage("--margin", "must lie in [0, 1]"));
    }
    if let Some(l) = args.lambda {
        if !(l > 0.0 && l.is_finite()) {
            return Err(usage("--lambda", "must be positive"));
        }
    }
    let learner = learner_config(args)?;
    let data = load_dataset("--dataset", &args.dataset, args.digits.as_deref())?;
    let test = args
        .test
        .as_deref()
        .map(|t| load_dataset("--test", t, args.digits.as_deref()))
        .transpose()?;
    let is_class = data.labels().is_some();
    if is_class != (args.task == Task::Classify) {
        return Err(usage("--task", format!("dataset {:?} does not fit task {:?}", args.dataset, args.task)));
    }
    if let Some(t) = &test {
        if t.n_features() != data.n_features() || t.labels().is_some() != is_class {
            return Err(CliError::Data("test set does not match the training data".into()));
        }
    }
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::Data(format!("{}: {e}", args.out.display())))?;

    let lambda_mode = args.lambda.map_or_else(LambdaMode::default, |lambda| LambdaMode::Fixed { lambda });
    let base = P2LConfig {
        pick_batch: args.batch_r,
        patience: args.patience,
        max_iterations: args.max_iterations,
        delta: args.delta,
        lambda_mode,
        ..P2LConfig::classification(0)
    };
    let results: Vec<SeedResult> = seeds
        .par_iter()
        .map(|&s| run_seed(args, &learner, &base, &data, test.as_ref(), s))
        .collect::<Result<_, _>>()?;

    let unconverged: Vec<u64> = results
        .iter()
        .filter(|r| r.status == TraceStatus::Unconverged)
        .map(|r| r.seed)
        .collect();
    for s in &unconverged {
        let _ = writeln!(err, "warning: seed {s} hit the iteration cap before converging");
    }
    let report = RunReport {
        format: REPORT_FORMAT.into(),
        version: REPORT_VERSION,
        config: ReportConfig {
            task: args.task,
            dataset: args.dataset.clone(),
            test: args.test.clone(),
            digits: args.digits.clone(),
            learner,
            seeds,
            delta: args.delta,
            batch_r: args.batch_r,
            patience: args.patience,
            max_iterations: args.max_iterations,
            margin: args.margin,
            lambda_mode,
            test_metric: match args.task {
                Task::Classify => "zero_one".into(),
                Task::Regress => "rmse".into(),
            },
        },
        aggregate: aggregate(&results),
        seeds: results,
        unconverged_seeds: unconverged,
    };
    let path: &Path = &args.out.join("report.json");
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    write_atomic(path, text.as_bytes()).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    writeln!(out, "{}", path.display()).map_err(|e| CliError::Data(e.to_string()))
}
