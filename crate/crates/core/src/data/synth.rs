//! Seeded synthetic datasets for desk-scale runs.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{meta, Dataset, Targets};
use crate::seeding::{rng_for, TAG_SYNTH};

/// Two unit-variance Gaussians centred at `-separation * e1` (label 0) and
/// `+separation * e1` (label 1), labels drawn uniformly.
pub fn synth_classify(n: usize, d: usize, separation: f64, seed: u64) -> Dataset {
    let mut rng = rng_for(seed, &[TAG_SYNTH, 0]);
    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let label = usize::from(rng.random_bool(0.5));
        let centre = if label == 1 { separation } else { -separation };
        for j in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            features.push(if j == 0 { centre + z } else { z });
        }
        labels.push(label);
    }
    Dataset::new(
        features,
        d,
        Targets::Class { labels, n_classes: 2 },
        meta(format!("synth-classify:n={n},d={d},sep={separation},seed={seed}")),
    )
    .expect("synthetic data is finite")
}

/// `y = w . x + noise * e` with `w`, `x`, `e` standard normal.
pub fn synth_regress(n: usize, d: usize, noise: f64, seed: u64) -> Dataset {
    let mut rng = rng_for(seed, &[TAG_SYNTH, 1]);
    let w: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let mut features = Vec::with_capacity(n * d);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let x: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let e: f64 = rng.sample(StandardNormal);
        targets.push(x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + noise * e);
        features.extend(x);
    }
    Dataset::new(
        features,
        d,
        Targets::Real(targets),
        meta(format!("synth-regress:n={n},d={d},noise={noise},seed={seed}")),
    )
    .expect("synthetic data is finite")
}
