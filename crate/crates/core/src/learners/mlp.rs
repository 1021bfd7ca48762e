//! Dense ReLU network trained on the bounded cross-entropy.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::{bounded_cross_entropy, DEFAULT_P_MIN};
use super::LearnerError;
use crate::data::Dataset;
use crate::seeding::{rng_for, TAG_MLP_INIT, TAG_MLP_TRAIN};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Optimizer {
    Sgd,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Optimizer {
    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: Vec<usize>,
    pub dropout_prob: f64,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience_epochs: usize,
    pub init_seed: u64,
    pub p_min: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self {
            hidden: vec![32],
            dropout_prob: 0.1,
            learning_rate: 1e-3,
            optimizer: Optimizer::adam(),
            batch_size: 64,
            max_epochs: 200,
            patience_epochs: 3,
            init_seed: 0,
            p_min: DEFAULT_P_MIN,
        }
    }
}

impl MlpParams {
    pub fn validate(&self) -> Result<(), LearnerError> {
        if self.hidden.contains(&0) {
            return Err(LearnerError::InvalidParams("layer widths must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_prob) {
            return Err(LearnerError::InvalidParams("dropout_prob must lie in [0, 1)".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(LearnerError::InvalidParams("learning_rate must be finite and >= 0".into()));
        }
        if self.batch_size == 0 {
            return Err(LearnerError::InvalidParams("batch_size must be >= 1".into()));
        }
        if !(self.p_min > 0.0 && self.p_min < 1.0) {
            return Err(LearnerError::InvalidParams("p_min must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub n_in: usize,
    pub n_out: usize,
    /// Row-major `n_out x n_in`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
}

/// Gradients with the same shapes as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros(net: &Mlp) -> Self {
        Self {
            weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            bias: net.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|z| z - lse).collect()
}

struct Trace {
    /// Input to each layer (post-activation, post-dropout of the previous).
    inputs: Vec<Vec<f64>>,
    /// Dropout scale per hidden unit (0 or 1/(1-p)); empty when inactive.
    masks: Vec<Vec<f64>>,
    logits: Vec<f64>,
}

impl Mlp {
    /// PyTorch-style uniform init in `+-1/sqrt(fan_in)` from `seed`.
    pub fn init(n_in: usize, hidden: &[usize], n_out: usize, seed: u64) -> Self {
        let mut rng = rng_for(seed, &[TAG_MLP_INIT]);
        let mut widths = vec![n_in];
        widths.extend_from_slice(hidden);
        widths.push(n_out);
        let layers = widths
            .windows(2)
            .map(|w| {
                let bound = 1.0 / (w[0] as f64).sqrt();
                let mut draw = || rng.random_range(-bound..bound);
                let weights = (0..w[0] * w[1]).map(|_| draw()).collect();
                let bias = (0..w[1]).map(|_| draw()).collect();
                Layer {
                    n_in: w[0],
                    n_out: w[1],
                    weights,
                    bias,
                }
            })
            .collect();
        Self { layers }
    }

    pub fn n_inputs(&self) -> usize {
        self.layers[0].n_in
    }

    pub fn n_outputs(&self) -> usize {
        self.layers.last().map_or(0, |l| l.n_out)
    }

    fn forward_trace(&self, x: &[f64], dropout: Option<(f64, &mut ChaCha8Rng)>) -> Trace {
        let mut dropout = dropout.filter(|(p, _)| *p > 0.0);
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut masks = Vec::new();
        let mut a = x.to_vec();
        for (li, layer) in self.layers.iter().enumerate() {
            let mut z = layer.bias.clone();
            for (o, zo) in z.iter_mut().enumerate() {
                let row = &layer.weights[o * layer.n_in..(o + 1) * layer.n_in];
                *zo += row.iter().zip(&a).map(|(w, v)| w * v).sum::<f64>();
            }
            inputs.push(std::mem::take(&mut a));
            if li == last {
                return Trace {
                    inputs,
                    masks,
                    logits: z,
                };
            }
            for v in z.iter_mut() {
                *v = v.max(0.0);
            }
            if let Some((p, rng)) = dropout.as_mut() {
                let keep = 1.0 / (1.0 - *p);
                let mask: Vec<f64> = (0..z.len())
                    .map(|_| if rng.random::<f64>() < *p { 0.0 } else { keep })
                    .collect();
                for (v, m) in z.iter_mut().zip(&mask) {
                    *v *= m;
                }
                masks.push(mask);
            }
            a = z;
        }
        unreachable!("network has at least one layer")
    }

    /// Evaluation-mode logits (no dropout).
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.forward_trace(x, None).logits
    }

    pub fn log_probs(&self, x: &[f64]) -> Vec<f64> {
        log_softmax(&self.forward(x))
    }

    fn backward_one(&self, trace: &Trace, label: usize, p_min: f64, scale: f64, grads: &mut Gradients) -> f64 {
        let lp = log_softmax(&trace.logits);
        let loss = bounded_cross_entropy(lp[label], p_min);
        if lp[label] < p_min.ln() {
            // clamped region: zero gradient
            return loss;
        }
        let mut delta: Vec<f64> = lp.iter().map(|l| l.exp() * scale).collect();
        delta[label] -= scale;
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let input = &trace.inputs[li];
            for o in 0..layer.n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                grads.bias[li][o] += d;
                let gw = &mut grads.weights[li][o * layer.n_in..(o + 1) * layer.n_in];
                for (g, v) in gw.iter_mut().zip(input) {
                    *g += d * v;
                }
            }
            if li == 0 {
                break;
            }
            let mut prev = vec![0.0; layer.n_in];
            for o in 0..layer.n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let row = &layer.weights[o * layer.n_in..(o + 1) * layer.n_in];
                for (p, w) in prev.iter_mut().zip(row) {
                    *p += d * w;
                }
            }
            // `input` is relu(z) * mask, so relu'(z) is input > 0
            let mask = trace.masks.get(li - 1);
            for (j, p) in prev.iter_mut().enumerate() {
                if input[j] <= 0.0 {
                    *p = 0.0;
                } else if let Some(m) = mask {
                    *p *= m[j];
                }
            }
            delta = prev;
        }
        loss
    }

    /// Mean bounded cross-entropy over `batch` and its exact gradient.
    /// Dropout is applied when `dropout` is given.
    pub fn loss_and_grad(
        &self,
        data: &Dataset,
        batch: &[usize],
        p_min: f64,
        mut dropout: Option<(f64, &mut ChaCha8Rng)>,
    ) -> Result<(f64, Gradients), LearnerError> {
        if batch.is_empty() {
            return Err(LearnerError::InvalidParams("empty batch".into()));
        }
        let labels = data
            .labels()
            .ok_or_else(|| LearnerError::Incompatible("MLP needs class labels".into()))?;
        let mut grads = Gradients::zeros(self);
        let scale = 1.0 / batch.len() as f64;
        let mut total = 0.0;
        for &i in batch {
            let drop = dropout.as_mut().map(|(p, rng)| (*p, &mut **rng));
            let trace = self.forward_trace(data.row(i), drop);
            total += self.backward_one(&trace, labels[i], p_min, scale, &mut grads);
        }
        let loss = total * scale;
        if !loss.is_finite() {
            return Err(LearnerError::NonFinite(format!("batch loss is {loss}")));
        }
        Ok((loss, grads))
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut Vec<f64>> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weights, &mut l.bias])
    }

    /// Mean bounded cross-entropy on `data` in evaluation mode.
    pub fn mean_loss(&self, data: &Dataset, p_min: f64) -> f64 {
        let labels = data.labels().expect("class labels");
        let total: f64 = (0..data.len())
            .map(|i| bounded_cross_entropy(self.log_probs(data.row(i))[labels[i]], p_min))
            .sum();
        total / data.len().max(1) as f64
    }
}

/// Optimizer state for one training call.
pub struct OptimizerState {
    optimizer: Optimizer,
    lr: f64,
    step: i32,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl OptimizerState {
    pub fn new(net: &Mlp, optimizer: Optimizer, lr: f64) -> Self {
        let zeros: Vec<Vec<f64>> = net
            .layers
            .iter()
            .flat_map(|l| [vec![0.0; l.weights.len()], vec![0.0; l.bias.len()]])
            .collect();
        Self {
            optimizer,
            lr,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn step(&mut self, net: &mut Mlp, grads: &Gradients) {
        self.step += 1;
        let flat_grads = grads
            .weights
            .iter()
            .zip(&grads.bias)
            .flat_map(|(w, b)| [w, b]);
        match self.optimizer {
            Optimizer::Sgd => {
                for (p, g) in net.params_mut().zip(flat_grads) {
                    for (pi, gi) in p.iter_mut().zip(g) {
                        *pi -= self.lr * gi;
                    }
                }
            }
            Optimizer::Adam { beta1, beta2, eps } => {
                let c1 = 1.0 - beta1.powi(self.step);
                let c2 = 1.0 - beta2.powi(self.step);
                for (((p, g), m), v) in net
                    .params_mut()
                    .zip(flat_grads)
                    .zip(self.m.iter_mut())
                    .zip(self.v.iter_mut())
                {
                    for k in 0..p.len() {
                        m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
                        v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
                        let mhat = m[k] / c1;
                        let vhat = v[k] / c2;
                        p[k] -= self.lr * mhat / (vhat.sqrt() + eps);
                    }
                }
            }
        }
    }
}

/// Train `net` in place on the rows `train_idx` of `data`.
///
/// Each epoch shuffles the rows and takes minibatch steps. Training stops
/// after `max_epochs`, or once the monitored loss (on `val` if given, else
/// on the training rows) has not decreased for `patience_epochs` epochs.
/// All randomness comes from `(seed, stream)`, so the call is a pure
/// function of its arguments.
pub fn mlp_train(
    net: &mut Mlp,
    data: &Dataset,
    train_idx: &[usize],
    val: Option<&Dataset>,
    params: &MlpParams,
    seed: u64,
    stream: u64,
) -> Result<usize, LearnerError> {
    params.validate()?;
    if train_idx.is_empty() {
        return Err(LearnerError::EmptyTrainSet);
    }
    let mut opt = OptimizerState::new(net, params.optimizer, params.learning_rate);
    let monitor = |net: &Mlp| -> f64 {
        match val {
            Some(v) if !v.is_empty() => net.mean_loss(v, params.p_min),
            _ => {
                let train = data.subset(train_idx);
                net.mean_loss(&train, params.p_min)
            }
        }
    };
    let mut best = f64::INFINITY;
    let mut stale = 0;
    let mut order = train_idx.to_vec();
    for epoch in 0..params.max_epochs {
        let mut rng = rng_for(seed, &[TAG_MLP_TRAIN, stream, epoch as u64]);
        order.copy_from_slice(train_idx);
        order.shuffle(&mut rng);
        for batch in order.chunks(params.batch_size) {
            let (_, grads) = net.loss_and_grad(data, batch, params.p_min, Some((params.dropout_prob, &mut rng)))?;
            opt.step(net, &grads);
        }
        let current = monitor(net);
        if !current.is_finite() {
            return Err(LearnerError::NonFinite(format!("monitored loss is {current} at epoch {epoch}")));
        }
        if current < best {
            best = current;
            stale = 0;
        } else {
            stale += 1;
            if stale >= params.patience_epochs {
                return Ok(epoch + 1);
            }
        }
    }
    Ok(params.max_epochs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{meta, Targets};
    use rand::SeedableRng;

    fn toy(n: usize, d: usize, classes: usize, seed: u64) -> Dataset {
        let mut rng = rng_for(seed, &[99]);
        let features = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let labels = (0..n).map(|_| rng.random_range(0..classes)).collect();
        Dataset::new(features, d, Targets::Class { labels, n_classes: classes }, meta("toy")).unwrap()
    }

    fn perturbed_loss(net: &Mlp, data: &Dataset, batch: &[usize], layer: usize, is_bias: bool, k: usize, h: f64) -> f64 {
        let mut n = net.clone();
        if is_bias {
            n.layers[layer].bias[k] += h;
        } else {
            n.layers[layer].weights[k] += h;
        }
        n.loss_and_grad(data, batch, DEFAULT_P_MIN, None).unwrap().0
    }

    /// Largest relative error between analytic and central-difference
    /// gradients, with a floor on the denominator for tiny gradients.
    fn max_rel_err(net: &Mlp, data: &Dataset) -> f64 {
        let batch: Vec<usize> = (0..data.len()).collect();
        let (_, g) = net.loss_and_grad(data, &batch, DEFAULT_P_MIN, None).unwrap();
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for li in 0..net.layers.len() {
            for (is_bias, analytic) in [(false, &g.weights[li]), (true, &g.bias[li])] {
                for (k, &a) in analytic.iter().enumerate() {
                    let fd = (perturbed_loss(net, data, &batch, li, is_bias, k, h)
                        - perturbed_loss(net, data, &batch, li, is_bias, k, -h))
                        / (2.0 * h);
                    let err = (a - fd).abs() / (a.abs() + fd.abs()).max(1e-6);
                    worst = worst.max(err);
                }
            }
        }
        worst
    }

    #[test]
    fn gradient_check_2_4_2() {
        let net = Mlp::init(2, &[4], 2, 11);
        let data = toy(8, 2, 2, 1);
        assert!(max_rel_err(&net, &data) < 1e-4);
    }

    #[test]
    fn gradient_check_random_nets() {
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = rng.random_range(1..5);
            let hidden: Vec<usize> = (0..rng.random_range(1..3)).map(|_| rng.random_range(1..6)).collect();
            let classes = rng.random_range(2..4);
            let net = Mlp::init(d, &hidden, classes, seed);
            let data = toy(6, d, classes, seed + 100);
            let err = max_rel_err(&net, &data);
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
    }

    #[test]
    fn clamped_region_has_zero_gradient() {
        let mut net = Mlp::init(1, &[], 2, 0);
        // logits (100x, -100x): class 1 gets probability ~e^-200 at x=1
        net.layers[0].weights = vec![100.0, -100.0];
        net.layers[0].bias = vec![0.0, 0.0];
        let data = Dataset::new(vec![1.0], 1, Targets::Class { labels: vec![1], n_classes: 2 }, meta("t")).unwrap();
        let (loss, g) = net.loss_and_grad(&data, &[0], DEFAULT_P_MIN, None).unwrap();
        assert!((loss - 1e5f64.ln()).abs() < 1e-12);
        assert!(g.weights.iter().chain(&g.bias).flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_learning_rate_leaves_parameters() {
        let data = toy(20, 3, 2, 4);
        let mut net = Mlp::init(3, &[5], 2, 4);
        let before = net.clone();
        let params = MlpParams { learning_rate: 0.0, max_epochs: 3, ..MlpParams::default() };
        let idx: Vec<usize> = (0..20).collect();
        mlp_train(&mut net, &data, &idx, None, &params, 1, 0).unwrap();
        assert_eq!(net, before);
    }

    #[test]
    fn zero_dropout_matches_eval_forward() {
        let net = Mlp::init(3, &[5, 4], 3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = [0.3, -0.2, 0.9];
        assert_eq!(net.forward_trace(&x, Some((0.0, &mut rng))).logits, net.forward(&x));
        // with dropout the masks are seeded
        let a = net.forward_trace(&x, Some((0.5, &mut ChaCha8Rng::seed_from_u64(1)))).logits;
        let b = net.forward_trace(&x, Some((0.5, &mut ChaCha8Rng::seed_from_u64(1)))).logits;
        assert_eq!(a, b);
    }

    #[test]
    fn training_is_deterministic_and_learns() {
        let data = crate::data::synth_classify(200, 2, 3.0, 7);
        let idx: Vec<usize> = (0..200).collect();
        let params = MlpParams { learning_rate: 1e-2, max_epochs: 30, ..MlpParams::default() };
        let mut a = Mlp::init(2, &params.hidden, 2, 3);
        let start = a.mean_loss(&data, DEFAULT_P_MIN);
        let mut b = a.clone();
        mlp_train(&mut a, &data, &idx, None, &params, 5, 0).unwrap();
        mlp_train(&mut b, &data, &idx, None, &params, 5, 0).unwrap();
        assert_eq!(a, b);
        assert!(a.mean_loss(&data, DEFAULT_P_MIN) < start);
    }

    #[test]
    fn log_softmax_uniform() {
        let lp = log_softmax(&[0.0; 10]);
        assert!((bounded_cross_entropy(lp[3], DEFAULT_P_MIN) - 10f64.ln()).abs() < 1e-12);
    }
}
