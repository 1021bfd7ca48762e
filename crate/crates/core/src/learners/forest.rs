//! Bagged regression trees.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{tree_build, Tree, TreeParams};
use super::LearnerError;
use crate::seeding::{rng_for, TAG_BOOTSTRAP};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let (lo, hi, sum) = self.trees.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, 0.0),
            |(lo, hi, sum), t| {
                let p = t.predict(x);
                (lo.min(p), hi.max(p), sum + p)
            },
        );
        (sum / self.trees.len() as f64).clamp(lo, hi)
    }
}

/// Bootstrap sample of size `n` for tree `tree_index`. Each tree draws from
/// its own stream, so tree `t` is the same whatever `n_estimators` is.
pub fn bootstrap_indices(seed: u64, tree_index: usize, n: usize) -> Vec<usize> {
    let mut rng = rng_for(seed, &[TAG_BOOTSTRAP, tree_index as u64]);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Fit `params.n_estimators` trees on bootstrap resamples drawn from
/// `params.bootstrap_seed`. Trees are fit in parallel; the result does not
/// depend on scheduling.
pub fn forest_fit(rows: &[&[f64]], y: &[f64], params: &TreeParams) -> Result<Forest, LearnerError> {
    params.validate()?;
    if y.is_empty() {
        return Err(LearnerError::EmptyTrainSet);
    }
    let n = y.len();
    let trees = (0..params.n_estimators)
        .into_par_iter()
        .map(|t| {
            let idx = bootstrap_indices(params.bootstrap_seed, t, n);
            let r: Vec<&[f64]> = idx.iter().map(|&i| rows[i]).collect();
            let yy: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
            tree_build(&r, &yy, params)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Forest { trees })
}

pub fn forest_predict(forest: &Forest, x: &[f64]) -> f64 {
    forest.predict(x)
}
