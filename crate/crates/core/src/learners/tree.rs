//! CART regression trees grown by variance reduction.

use serde::{Deserialize, Serialize};

use super::LearnerError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Used by forests only.
    pub n_estimators: usize,
    pub bootstrap_seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: 10,
            min_samples_split: 2,
            min_samples_leaf: 1,
            n_estimators: 50,
            bootstrap_seed: 0,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<(), LearnerError> {
        if self.min_samples_leaf < 1 {
            return Err(LearnerError::InvalidParams("min_samples_leaf must be >= 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(LearnerError::InvalidParams("min_samples_split must be >= 2".into()));
        }
        if self.n_estimators < 1 {
            return Err(LearnerError::InvalidParams("n_estimators must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
        samples: usize,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub n_features: usize,
    pub root: Node,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { value, .. } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(n: &Node) -> usize {
            match n {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(left).max(go(right)),
            }
        }
        go(&self.root)
    }

    pub fn n_leaves(&self) -> usize {
        fn go(n: &Node) -> usize {
            match n {
                Node::Leaf { .. } => 1,
                Node::Split { left, right, .. } => go(left) + go(right),
            }
        }
        go(&self.root)
    }
}

struct Builder<'a> {
    rows: &'a [&'a [f64]],
    y: &'a [f64],
    params: TreeParams,
    n_features: usize,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Builder<'_> {
    fn leaf(&self, idx: &[usize]) -> Node {
        let sum: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let mean = sum / idx.len() as f64;
        // keep the mean inside the observed range despite rounding
        let (lo, hi) = idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
            (lo.min(self.y[i]), hi.max(self.y[i]))
        });
        Node::Leaf {
            value: mean.clamp(lo, hi),
            samples: idx.len(),
        }
    }

    fn best_split(&self, idx: &[usize]) -> Option<BestSplit> {
        let n = idx.len();
        let min_leaf = self.params.min_samples_leaf;
        let total: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let mut best: Option<BestSplit> = None;
        let mut order = idx.to_vec();
        for f in 0..self.n_features {
            order.sort_by(|&a, &b| self.rows[a][f].total_cmp(&self.rows[b][f]).then(a.cmp(&b)));
            let mut left_sum = 0.0;
            for k in 0..n - 1 {
                left_sum += self.y[order[k]];
                let (a, b) = (self.rows[order[k]][f], self.rows[order[k + 1]][f]);
                let n_left = k + 1;
                if a == b || n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let right_sum = total - left_sum;
                // maximizing this is equivalent to minimizing the children's SSE
                let score = left_sum * left_sum / n_left as f64
                    + right_sum * right_sum / (n - n_left) as f64;
                if best.as_ref().is_none_or(|bs| score > bs.score) {
                    let mut threshold = 0.5 * (a + b);
                    if threshold >= b {
                        threshold = a;
                    }
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        score,
                    });
                }
            }
        }
        best
    }

    fn grow(&self, idx: &[usize], depth: usize) -> Node {
        let first = self.y[idx[0]];
        let pure = idx.iter().all(|&i| self.y[i] == first);
        if pure || depth >= self.params.max_depth || idx.len() < self.params.min_samples_split {
            return self.leaf(idx);
        }
        let Some(split) = self.best_split(idx) else {
            return self.leaf(idx);
        };
        let (left, right): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.rows[i][split.feature] <= split.threshold);
        Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(self.grow(&left, depth + 1)),
            right: Box::new(self.grow(&right, depth + 1)),
        }
    }
}

/// Grow a tree on `rows` (each of equal length) with targets `y`.
///
/// Every impure node that the depth and size limits allow is split at the
/// candidate with the largest variance reduction, even when that reduction
/// is zero. Equal scores keep the first candidate found, i.e. the lowest
/// feature index and then the lowest threshold.
pub fn tree_build(rows: &[&[f64]], y: &[f64], params: &TreeParams) -> Result<Tree, LearnerError> {
    params.validate()?;
    if y.is_empty() {
        return Err(LearnerError::EmptyTrainSet);
    }
    if rows.len() != y.len() {
        return Err(LearnerError::InvalidParams(format!(
            "{} rows but {} targets",
            rows.len(),
            y.len()
        )));
    }
    let n_features = rows[0].len();
    let builder = Builder {
        rows,
        y,
        params: *params,
        n_features,
    };
    let idx: Vec<usize> = (0..y.len()).collect();
    Ok(Tree {
        n_features,
        root: builder.grow(&idx, 0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(xs: &[Vec<f64>], y: &[f64], depth: usize) -> Tree {
        let rows: Vec<&[f64]> = xs.iter().map(|r| r.as_slice()).collect();
        let params = TreeParams {
            max_depth: depth,
            ..TreeParams::default()
        };
        tree_build(&rows, y, &params).unwrap()
    }

    #[test]
    fn perfect_split() {
        let t = build(&[vec![0.0], vec![1.0]], &[0.0, 1.0], 1);
        assert_eq!(t.predict(&[0.0]), 0.0);
        assert_eq!(t.predict(&[1.0]), 1.0);
        assert_eq!(t.root, Node::Split {
            feature: 0,
            threshold: 0.5,
            left: Box::new(Node::Leaf { value: 0.0, samples: 1 }),
            right: Box::new(Node::Leaf { value: 1.0, samples: 1 }),
        });
    }

    #[test]
    fn pure_node_is_leaf() {
        let t = build(&[vec![0.0], vec![1.0], vec![2.0]], &[4.0; 3], 5);
        assert_eq!(t.n_leaves(), 1);
        assert_eq!(t.predict(&[7.0]), 4.0);
    }

    /// Score every threshold at one node by brute force, returning the best
    /// (feature, threshold) by SSE with lowest-index ties.
    fn brute_force_split(xs: &[Vec<f64>], y: &[f64]) -> (usize, f64) {
        let sse = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|a| (a - m) * (a - m)).sum::<f64>()
        };
        let mut best = (usize::MAX, 0.0, f64::INFINITY);
        for f in 0..xs[0].len() {
            let mut vals: Vec<f64> = xs.iter().map(|r| r[f]).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            for w in vals.windows(2) {
                let t = 0.5 * (w[0] + w[1]);
                let (l, r): (Vec<f64>, Vec<f64>) = {
                    let mut l = vec![];
                    let mut r = vec![];
                    for (row, &yy) in xs.iter().zip(y) {
                        if row[f] <= t { l.push(yy) } else { r.push(yy) }
                    }
                    (l, r)
                };
                let s = sse(&l) + sse(&r);
                if s < best.2 - 1e-12 {
                    best = (f, t, s);
                }
            }
        }
        (best.0, best.1)
    }

    #[test]
    fn identity_on_four_points_depth_two() {
        let xs: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
        let y = [0.0, 1.0, 2.0, 3.0];
        let t = build(&xs, &y, 2);
        assert_eq!(t.n_leaves(), 4);
        for (x, &yy) in xs.iter().zip(&y) {
            assert_eq!(t.predict(x), yy);
        }
        let (f, thr) = brute_force_split(&xs, &y);
        match &t.root {
            Node::Split { feature, threshold, .. } => {
                assert_eq!((*feature, *threshold), (f, thr));
            }
            _ => panic!("root should split"),
        }
    }

    #[test]
    fn root_split_matches_brute_force() {
        let xs: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![((i * 7) % 12) as f64, ((i * 5) % 3) as f64, (i / 4) as f64])
            .collect();
        let y: Vec<f64> = (0..12).map(|i| ((i * i) % 7) as f64).collect();
        let t = build(&xs, &y, 1);
        let (f, thr) = brute_force_split(&xs, &y);
        match &t.root {
            Node::Split { feature, threshold, .. } => assert_eq!((*feature, *threshold), (f, thr)),
            _ => panic!("root should split"),
        }
    }

    #[test]
    fn ties_prefer_lowest_feature() {
        // both features carry the same information
        let xs = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let t = build(&xs, &[0.0, 1.0], 1);
        assert!(matches!(t.root, Node::Split { feature: 0, .. }));
    }

    #[test]
    fn zero_gain_split_still_taken() {
        let xs = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let y = [0.0, 0.0, 1.0, 1.0];
        let t = build(&xs, &y, 2);
        for (x, &yy) in xs.iter().zip(&y) {
            assert_eq!(t.predict(x), yy);
        }
    }

    #[test]
    fn respects_min_leaf_and_depth() {
        let xs: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let rows: Vec<&[f64]> = xs.iter().map(|r| r.as_slice()).collect();
        let p = TreeParams { max_depth: 10, min_samples_leaf: 3, ..TreeParams::default() };
        let t = tree_build(&rows, &y, &p).unwrap();
        fn min_leaf(n: &Node) -> usize {
            match n {
                Node::Leaf { samples, .. } => *samples,
                Node::Split { left, right, .. } => min_leaf(left).min(min_leaf(right)),
            }
        }
        assert!(min_leaf(&t.root) >= 3);
        assert!(build(&xs, &y, 2).depth() <= 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(tree_build(&[], &[], &TreeParams::default()).is_err());
        let p = TreeParams { min_samples_leaf: 0, ..TreeParams::default() };
        assert!(tree_build(&[&[0.0]], &[1.0], &p).is_err());
    }
}
