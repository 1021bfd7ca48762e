//! Pick-To-Learn: grow a compression set by repeatedly adding the worst
//! complement points and refitting, certifying every iteration.
//!
//! Classification uses an MLP warm-started from the previous iteration and
//! stops once every complement point has cross-entropy below `ln 2`.
//! Regression refits a tree or forest from scratch and stops after
//! `patience` iterations without a new best complement RMSE, returning the
//! model that achieved the best.

mod certify;
mod index;
mod trace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::learners::{
    argmax, bounded_cross_entropy, initial_model, learner_fit, loss_eval, mean, mlp_train, rms, LearnerConfig,
    LearnerError, LossSpec, Mlp, MlpParams, Model, TargetBounds,
};

pub use certify::{certify_checkpoint, CheckpointStats, LambdaMode};
pub use index::IndexVector;
pub use trace::{
    parse_trace_csv, select_checkpoint, select_row, trace_to_csv, Checkpoint, CompressionTrace,
    SelectionCriterion, TraceRow, TraceStatus, TRACE_HEADER,
};

#[derive(Debug, Error)]
pub enum P2LError {
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error("invalid P2L configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct P2LConfig {
    /// Points added per iteration (R).
    pub pick_batch: usize,
    /// Classification stops once every complement loss is below this.
    pub stop_threshold: f64,
    /// Regression stops after this many iterations without improvement (T).
    pub patience: usize,
    /// Defaults to the training-set size.
    pub max_iterations: Option<usize>,
    pub seed: u64,
    pub delta: f64,
    pub loss: LossSpec,
    pub lambda_mode: LambdaMode,
}

impl P2LConfig {
    pub fn classification(seed: u64) -> Self {
        Self {
            pick_batch: 1,
            stop_threshold: 2f64.ln(),
            patience: 10,
            max_iterations: None,
            seed,
            delta: 0.01,
            loss: LossSpec::bounded_cross_entropy(),
            lambda_mode: LambdaMode::default(),
        }
    }

    pub fn regression(bounds: TargetBounds, seed: u64) -> Self {
        Self {
            loss: LossSpec::AbsoluteError { bounds },
            ..Self::classification(seed)
        }
    }

    fn validate(&self) -> Result<(), P2LError> {
        if self.pick_batch == 0 {
            return Err(P2LError::Config("pick_batch must be >= 1".into()));
        }
        if self.patience == 0 {
            return Err(P2LError::Config("patience must be >= 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(P2LError::Config(format!("delta must lie in (0, 1) (got {})", self.delta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct P2LOutcome {
    pub trace: CompressionTrace,
    /// Model of checkpoint `trace.returned`.
    pub model: Model,
}

/// Per-complement-point losses under the current model.
struct Evaluation {
    complement: Vec<usize>,
    losses: Vec<f64>,
    zero_one: Option<Vec<f64>>,
}

fn evaluate(model: &Model, train: &Dataset, set: &IndexVector, loss: &LossSpec) -> Evaluation {
    let complement = set.complement();
    match loss {
        LossSpec::BoundedCrossEntropy { p_min } => {
            let labels = train.labels().expect("classification data");
            let (losses, zero_one) = complement
                .iter()
                .map(|&i| {
                    let lp = model.log_probs(train.row(i)).expect("classifier");
                    let y = labels[i];
                    (bounded_cross_entropy(lp[y], *p_min), f64::from(u8::from(argmax(&lp) != y)))
                })
                .unzip();
            Evaluation { complement, losses, zero_one: Some(zero_one) }
        }
        _ => {
            let losses = complement
                .iter()
                .map(|&i| loss_eval(loss, model, train.row(i), train.target_value(i)))
                .collect();
            Evaluation { complement, losses, zero_one: None }
        }
    }
}

/// Validation loss reported per checkpoint: mean bounded cross-entropy for
/// classification, RMSE for regression.
fn validation_loss(model: &Model, val: Option<&Dataset>, loss: &LossSpec) -> Option<f64> {
    let val = val.filter(|v| !v.is_empty())?;
    let losses: Vec<f64> = (0..val.len())
        .map(|i| loss_eval(loss, model, val.row(i), val.target_value(i)))
        .collect();
    Some(match loss {
        LossSpec::AbsoluteError { .. } => rms(&losses),
        _ => mean(&losses),
    })
}

/// Up to `r` complement positions with loss at least `threshold`, largest
/// loss first, ties to the lowest dataset index.
fn pick(eval: &Evaluation, r: usize, threshold: f64) -> Vec<usize> {
    let mut cand: Vec<usize> = (0..eval.losses.len()).filter(|&k| eval.losses[k] >= threshold).collect();
    cand.sort_by(|&a, &b| {
        eval.losses[b]
            .total_cmp(&eval.losses[a])
            .then(eval.complement[a].cmp(&eval.complement[b]))
    });
    cand.truncate(r);
    cand.into_iter().map(|k| eval.complement[k]).collect()
}

struct Run<'a> {
    train: &'a Dataset,
    val: Option<&'a Dataset>,
    cfg: &'a P2LConfig,
    checkpoints: Vec<Checkpoint>,
}

impl Run<'_> {
    fn record(&mut self, iteration: usize, set: &IndexVector, added: &[usize], model: &Model, eval: &Evaluation) {
        let n = self.train.len();
        let zero_one = eval.zero_one.as_ref().map(|z| mean(z));
        let complement_loss_mean = mean(&eval.losses);
        let stats = CheckpointStats {
            m: set.len(),
            n,
            iteration,
            certified_loss: zero_one.unwrap_or(complement_loss_mean),
            zero_one,
        };
        let (certificates, omitted) = certify_checkpoint(&stats, self.cfg.delta, &self.cfg.loss, &self.cfg.lambda_mode);
        self.checkpoints.push(Checkpoint {
            iteration,
            compression: set.clone(),
            added: IndexVector::new(added.to_vec(), n).expect("picks are distinct complement points"),
            complement_loss_mean,
            complement_rms: rms(&eval.losses),
            complement_zero_one: zero_one,
            validation_loss: validation_loss(model, self.val, &self.cfg.loss),
            certificates,
            omitted,
        });
    }
}

fn mlp_params(learner: &LearnerConfig) -> Result<&MlpParams, P2LError> {
    match learner {
        LearnerConfig::Mlp(p) => Ok(p),
        other => Err(P2LError::Learner(LearnerError::Incompatible(format!(
            "classification P2L needs the mlp learner, got {}",
            other.name()
        )))),
    }
}

fn start_net(learner: &LearnerConfig, train: &Dataset, seed: u64) -> Result<Mlp, P2LError> {
    let n_classes = train
        .n_classes()
        .ok_or_else(|| LearnerError::Incompatible("classification P2L needs class labels".into()))?;
    match initial_model(learner, train.n_features(), n_classes, seed) {
        Model::Mlp(net) => Ok(net),
        _ => unreachable!("mlp learner"),
    }
}

/// Classification P2L with the MLP learner.
///
/// The MLP is never trained before the first pick. After each pick it is
/// trained further on the current compression set (warm start), with the
/// shuffling stream keyed by the iteration number, so the model is a
/// function of the per-iteration compression sets, the config and the seed.
pub fn p2l_classify(
    train: &Dataset,
    val: Option<&Dataset>,
    learner: &LearnerConfig,
    cfg: &P2LConfig,
) -> Result<P2LOutcome, P2LError> {
    cfg.validate()?;
    let params = mlp_params(learner)?;
    if !matches!(cfg.loss, LossSpec::BoundedCrossEntropy { .. }) {
        return Err(P2LError::Config("classification P2L uses the bounded cross-entropy".into()));
    }
    let n = train.len();
    let max_iter = cfg.max_iterations.unwrap_or(n);
    let mut net = start_net(learner, train, cfg.seed)?;
    let mut model = Model::Mlp(net.clone());
    let mut set = IndexVector::empty(n);
    let mut run = Run { train, val, cfg, checkpoints: Vec::new() };
    let mut eval = evaluate(&model, train, &set, &cfg.loss);
    run.record(0, &set, &[], &model, &eval);
    let mut iteration = 0;
    let status = loop {
        if eval.complement.is_empty() {
            break TraceStatus::Exhausted;
        }
        if eval.losses.iter().all(|&l| l < cfg.stop_threshold) {
            break TraceStatus::Converged;
        }
        if iteration >= max_iter {
            break TraceStatus::Unconverged;
        }
        let picked = pick(&eval, cfg.pick_batch, cfg.stop_threshold);
        set.insert_all(&picked);
        iteration += 1;
        mlp_train(&mut net, train, set.indices(), val, params, cfg.seed, iteration as u64)?;
        model = Model::Mlp(net.clone());
        eval = evaluate(&model, train, &set, &cfg.loss);
        run.record(iteration, &set, &picked, &model, &eval);
    };
    let returned = run.checkpoints.len() - 1;
    Ok(P2LOutcome {
        trace: CompressionTrace { n, status, checkpoints: run.checkpoints, returned },
        model,
    })
}

/// Regression P2L with a tree or forest learner, starting from the all-zero
/// model and refitting from scratch on the compression set each iteration.
pub fn p2l_regress(
    train: &Dataset,
    val: Option<&Dataset>,
    learner: &LearnerConfig,
    cfg: &P2LConfig,
) -> Result<P2LOutcome, P2LError> {
    cfg.validate()?;
    if learner.is_classifier() {
        return Err(P2LError::Learner(LearnerError::Incompatible(
            "regression P2L needs the tree or forest learner".into(),
        )));
    }
    if !matches!(cfg.loss, LossSpec::AbsoluteError { .. }) {
        return Err(P2LError::Config("regression P2L uses the absolute error".into()));
    }
    let n = train.len();
    let max_iter = cfg.max_iterations.unwrap_or(n);
    let mut model = initial_model(learner, train.n_features(), 0, cfg.seed);
    let mut set = IndexVector::empty(n);
    let mut run = Run { train, val, cfg, checkpoints: Vec::new() };
    let mut eval = evaluate(&model, train, &set, &cfg.loss);
    run.record(0, &set, &[], &model, &eval);

    let mut best = f64::INFINITY;
    let mut best_at = 0;
    let mut best_model = model.clone();
    let mut counter = 0;
    let mut iteration = 0;
    let status = loop {
        if counter > cfg.patience {
            break TraceStatus::Patience;
        }
        if eval.complement.is_empty() {
            break TraceStatus::Exhausted;
        }
        if iteration >= max_iter {
            break TraceStatus::Unconverged;
        }
        let picked = pick(&eval, cfg.pick_batch, f64::NEG_INFINITY);
        set.insert_all(&picked);
        iteration += 1;
        model = learner_fit(learner, &train.subset(set.indices()), cfg.seed)?;
        eval = evaluate(&model, train, &set, &cfg.loss);
        run.record(iteration, &set, &picked, &model, &eval);
        let current = rms(&eval.losses);
        if current < best {
            best = current;
            best_at = run.checkpoints.len() - 1;
            best_model = model.clone();
            counter = 0;
        } else {
            counter += 1;
        }
    };
    Ok(P2LOutcome {
        trace: CompressionTrace { n, status, checkpoints: run.checkpoints, returned: best_at },
        model: best_model,
    })
}

/// Rebuild the model of checkpoint `at` from the compression set alone.
///
/// Only the rows in that checkpoint's compression set are read (plus the
/// validation set, which steers MLP early stopping). Trees and forests are
/// refit on the set; the MLP replays its per-iteration training calls on
/// the recorded nested sets.
pub fn replay_model(
    train: &Dataset,
    val: Option<&Dataset>,
    learner: &LearnerConfig,
    cfg: &P2LConfig,
    trace: &CompressionTrace,
    at: usize,
) -> Result<Model, P2LError> {
    let target = &trace.checkpoints[at];
    let kept = target.compression.indices();
    let compressed = train.subset(kept);
    match learner {
        LearnerConfig::Tree(_) | LearnerConfig::Forest(_) => {
            if kept.is_empty() {
                return Ok(initial_model(learner, train.n_features(), 0, cfg.seed));
            }
            Ok(learner_fit(learner, &compressed, cfg.seed)?)
        }
        LearnerConfig::Mlp(params) => {
            let mut net = start_net(learner, train, cfg.seed)?;
            for cp in &trace.checkpoints[1..=at] {
                // positions of this iteration's set inside the compressed rows
                let local: Vec<usize> = cp
                    .compression
                    .indices()
                    .iter()
                    .map(|i| kept.binary_search(i).expect("compression sets are nested"))
                    .collect();
                mlp_train(&mut net, &compressed, &local, val, params, cfg.seed, cp.iteration as u64)?;
            }
            Ok(Model::Mlp(net))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{kl_compression_bound, BoundInputs};
    use crate::data::{meta, split, synth_classify, synth_regress, target_bounds, Targets};
    use crate::learners::TreeParams;

    fn line_data(n: usize) -> Dataset {
        Dataset::new(
            (0..n).map(|i| i as f64).collect(),
            1,
            Targets::Real((0..n).map(|i| 3.0 * i as f64).collect()),
            meta("3x"),
        )
        .unwrap()
    }

    fn tree() -> LearnerConfig {
        LearnerConfig::Tree(TreeParams { max_depth: 10, ..TreeParams::default() })
    }

    /// The regression loop spelled out directly on a 1-d tree.
    fn oracle_loop(data: &Dataset, bounds: TargetBounds, patience: usize) -> (Vec<usize>, Vec<f64>) {
        let y = data.real_targets().unwrap();
        let n = y.len();
        let clip = |p: f64| p.clamp(bounds.y_lo, bounds.y_hi);
        let mut set: Vec<usize> = vec![];
        let mut preds = vec![0.0; n];
        let (mut best, mut counter) = (f64::INFINITY, 0);
        let mut order = vec![];
        let mut rmses = vec![];
        while counter <= patience && set.len() < n {
            let next = (0..n)
                .filter(|i| !set.contains(i))
                .fold(None, |acc: Option<usize>, i| match acc {
                    Some(j) if (clip(preds[j]) - y[j]).abs() >= (clip(preds[i]) - y[i]).abs() => Some(j),
                    _ => Some(i),
                })
                .unwrap();
            set.push(next);
            set.sort();
            order.push(next);
            let sub = data.subset(&set);
            let m = learner_fit(&tree(), &sub, 0).unwrap();
            preds = (0..n).map(|i| m.predict(data.row(i))).collect();
            let comp: Vec<f64> = (0..n).filter(|i| !set.contains(i)).map(|i| (clip(preds[i]) - y[i]).abs()).collect();
            let r = rms(&comp);
            rmses.push(r);
            if r < best {
                best = r;
                counter = 0;
            } else {
                counter += 1;
            }
        }
        (order, rmses)
    }

    #[test]
    fn regression_matches_hand_loop() {
        let data = line_data(20);
        let bounds = target_bounds(data.real_targets().unwrap(), 0.1).unwrap();
        let cfg = P2LConfig { patience: 3, ..P2LConfig::regression(bounds, 0) };
        let out = p2l_regress(&data, None, &tree(), &cfg).unwrap();
        let (order, rmses) = oracle_loop(&data, bounds, 3);
        let got_order: Vec<usize> = out.trace.checkpoints[1..].iter().map(|c| c.added.indices()[0]).collect();
        assert_eq!(got_order, order);
        let got_rms: Vec<f64> = out.trace.checkpoints[1..].iter().map(|c| c.complement_rms).collect();
        assert_eq!(got_rms, rmses);
        // running minimum of the RMS sequence never increases
        let mut running = f64::INFINITY;
        for r in &got_rms {
            assert!(r.min(running) <= running);
            running = running.min(*r);
        }
        assert!(running < 3.0 * 20.0 * 0.1);
    }

    #[test]
    fn patience_one_on_noise_stops_early() {
        let mut d = synth_regress(200, 2, 0.0, 1);
        // replace targets with noise unrelated to the features
        let noise = synth_regress(200, 1, 1.0, 99);
        d = Dataset::new(
            (0..200).flat_map(|i| d.row(i).to_vec()).collect(),
            2,
            Targets::Real(noise.real_targets().unwrap().to_vec()),
            meta("noise"),
        )
        .unwrap();
        let bounds = target_bounds(d.real_targets().unwrap(), 0.1).unwrap();
        let cfg = P2LConfig { patience: 1, ..P2LConfig::regression(bounds, 0) };
        let out = p2l_regress(&d, None, &tree(), &cfg).unwrap();
        assert_eq!(out.trace.status, TraceStatus::Patience);
        assert!(out.trace.last().m() < 100);
        // the stop comes exactly patience + 1 iterations after the best
        assert_eq!(out.trace.checkpoints.len() - 1, out.trace.returned + cfg.patience + 1);
    }

    #[test]
    fn regression_returns_best_and_replays() {
        let data = synth_regress(120, 3, 0.3, 5);
        let bounds = target_bounds(data.real_targets().unwrap(), 0.1).unwrap();
        let cfg = P2LConfig { patience: 5, ..P2LConfig::regression(bounds, 2) };
        let learner = LearnerConfig::Forest(TreeParams { n_estimators: 5, max_depth: 5, ..TreeParams::default() });
        let out = p2l_regress(&data, None, &learner, &cfg).unwrap();
        let best = &out.trace.checkpoints[out.trace.returned];
        assert!(out.trace.checkpoints[1..].iter().all(|c| c.complement_rms >= best.complement_rms));
        let replayed = replay_model(&data, None, &learner, &cfg, &out.trace, out.trace.returned).unwrap();
        assert_eq!(replayed, out.model);
        for cp in &out.trace.checkpoints {
            assert!(cp.bound(crate::bounds::BoundKind::P2LBound).is_none());
            assert!(cp.kl_bound().is_some());
        }
    }

    fn classify_setup(seed: u64) -> (Dataset, Dataset, LearnerConfig) {
        let data = synth_classify(400, 2, 4.0, seed);
        let s = split(&data, seed, true).unwrap();
        let learner = LearnerConfig::Mlp(MlpParams { hidden: vec![8], learning_rate: 1e-2, ..MlpParams::default() });
        (s.train, s.val, learner)
    }

    #[test]
    fn classification_converges_and_replays() {
        let (train, val, learner) = classify_setup(3);
        let cfg = P2LConfig::classification(3);
        let out = p2l_classify(&train, Some(&val), &learner, &cfg).unwrap();
        assert_eq!(out.trace.status, TraceStatus::Converged);
        let last = out.trace.last();
        assert_eq!(last.complement_zero_one, Some(0.0));
        assert!(last.m() < train.len() / 4);
        assert!(last.bound(crate::bounds::BoundKind::P2LBound).is_some());
        // nested, strictly growing by one
        for w in out.trace.checkpoints.windows(2) {
            assert_eq!(w[1].m(), w[0].m() + 1);
            assert!(w[0].compression.indices().iter().all(|&i| w[1].compression.contains(i)));
        }
        let replayed = replay_model(&train, Some(&val), &learner, &cfg, &out.trace, out.trace.returned).unwrap();
        assert_eq!(replayed, out.model);
        let again = p2l_classify(&train, Some(&val), &learner, &cfg).unwrap();
        assert_eq!(again.trace, out.trace);
    }

    #[test]
    fn batched_picks() {
        let (train, val, learner) = classify_setup(4);
        let cfg = P2LConfig { pick_batch: 8, ..P2LConfig::classification(4) };
        let out = p2l_classify(&train, Some(&val), &learner, &cfg).unwrap();
        let cps = &out.trace.checkpoints;
        for k in 0..cps.len() - 1 {
            let model = replay_model(&train, Some(&val), &learner, &cfg, &out.trace, k).unwrap();
            let eval = evaluate(&model, &train, &cps[k].compression, &cfg.loss);
            let above = eval.losses.iter().filter(|&&l| l >= cfg.stop_threshold).count();
            assert_eq!(cps[k + 1].m() - cps[k].m(), above.min(8));
            assert_eq!(cps[k + 1].added.len(), above.min(8));
        }
    }

    #[test]
    fn trace_kl_matches_standalone_call() {
        let (train, val, learner) = classify_setup(5);
        let cfg = P2LConfig::classification(5);
        let out = p2l_classify(&train, Some(&val), &learner, &cfg).unwrap();
        for cp in &out.trace.checkpoints {
            let direct = kl_compression_bound(&BoundInputs::new(train.len() as u64, cp.m() as u64, cp.certified_loss(), 0.01))
                .unwrap()
                .bound_value;
            assert_eq!(cp.kl_bound().unwrap().to_bits(), direct.to_bits());
        }
        let sel = select_checkpoint(&out.trace, SelectionCriterion::MinKlBound);
        assert!(sel.m() <= out.trace.last().m());
    }

    #[test]
    fn rejects_mismatched_learners() {
        let (train, val, _) = classify_setup(1);
        let cfg = P2LConfig::classification(1);
        assert!(p2l_classify(&train, Some(&val), &tree(), &cfg).is_err());
        let data = line_data(20);
        let bounds = target_bounds(data.real_targets().unwrap(), 0.1).unwrap();
        let learner = LearnerConfig::Mlp(MlpParams::default());
        assert!(p2l_regress(&data, None, &learner, &P2LConfig::regression(bounds, 0)).is_err());
        let bad = P2LConfig { pick_batch: 0, ..P2LConfig::regression(bounds, 0) };
        assert!(p2l_regress(&data, None, &tree(), &bad).is_err());
    }
}
