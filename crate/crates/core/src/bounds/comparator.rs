use std::fmt;
use std::sync::Arc;

use super::kl::kl_div;
use super::special::log_choose;
use super::{BoundError, BoundInputs, BoundKind, Certificate};

type BinaryFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type MomentFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// The comparator `Delta(empirical, true)` and a bound on its log moment
/// `ln E exp(k * Delta(L_T, L_D))` over fresh samples `T` of size `k`.
#[derive(Clone)]
pub enum ComparatorSpec {
    /// Binary kl; log moment bounded by `ln(2 sqrt(k))`.
    Kl,
    /// `lambda * (true - empirical)` for a `sigma^2`-sub-Gaussian loss; log
    /// moment bounded by `k lambda^2 sigma^2 / 2`.
    Linear { lambda: f64, sigma: f64 },
    Custom {
        comparator: BinaryFn,
        log_moment_bound: MomentFn,
    },
}

impl fmt::Debug for ComparatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComparatorSpec::Kl => write!(f, "Kl"),
            ComparatorSpec::Linear { lambda, sigma } => f
                .debug_struct("Linear")
                .field("lambda", lambda)
                .field("sigma", sigma)
                .finish(),
            ComparatorSpec::Custom { .. } => write!(f, "Custom(..)"),
        }
    }
}

impl ComparatorSpec {
    pub fn custom<D, M>(comparator: D, log_moment_bound: M) -> Self
    where
        D: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        M: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        ComparatorSpec::Custom {
            comparator: Arc::new(comparator),
            log_moment_bound: Arc::new(log_moment_bound),
        }
    }

    /// Evaluate `Delta(empirical, true_risk)`.
    pub fn delta(&self, empirical: f64, true_risk: f64) -> f64 {
        match self {
            ComparatorSpec::Kl => kl_div(empirical, true_risk),
            ComparatorSpec::Linear { lambda, .. } => lambda * (true_risk - empirical),
            ComparatorSpec::Custom { comparator, .. } => comparator(empirical, true_risk),
        }
    }

    pub fn log_moment(&self, k: u64) -> f64 {
        match self {
            ComparatorSpec::Kl => (2.0 * (k as f64).sqrt()).ln(),
            ComparatorSpec::Linear { lambda, sigma } => {
                k as f64 * lambda * lambda * sigma * sigma / 2.0
            }
            ComparatorSpec::Custom {
                log_moment_bound, ..
            } => log_moment_bound(k),
        }
    }

    fn validate(&self) -> Result<(), BoundError> {
        if let ComparatorSpec::Linear { lambda, sigma } = self {
            if !(*lambda > 0.0 && lambda.is_finite()) {
                return Err(BoundError::Domain(format!(
                    "lambda must be positive (got {lambda})"
                )));
            }
            if !(*sigma > 0.0 && sigma.is_finite()) {
                return Err(BoundError::Domain(format!(
                    "sigma must be positive (got {sigma})"
                )));
            }
        }
        Ok(())
    }
}

/// Right-hand side of the general comparator bound:
/// `(ln C(n,m) + ln E_Delta(n-m) + ln(1 / (zeta(m) P delta))) / (n - m)`.
///
/// With probability `1 - delta`, `Delta(loss_complement, true_risk)` is at
/// most this value for every compression set simultaneously.
pub fn generic_compression_bound(
    inputs: &BoundInputs,
    comp: &ComparatorSpec,
) -> Result<f64, BoundError> {
    inputs.validate()?;
    comp.validate()?;
    let k = inputs.complement_size();
    if k == 0 {
        return Err(BoundError::Degenerate(
            "compression set covers the whole sample (m = n)".into(),
        ));
    }
    let log_moment = comp.log_moment(k);
    if !log_moment.is_finite() {
        return Err(BoundError::Domain(format!(
            "log moment bound is not finite at {k}"
        )));
    }
    Ok((inputs.complexity()? + log_moment) / k as f64)
}

/// Linear-comparator bound for a `sigma^2`-sub-Gaussian loss at a fixed
/// `lambda`: `loss + lambda sigma^2 / 2 + complexity / (lambda (n - m))`.
pub fn linear_compression_bound(
    inputs: &BoundInputs,
    lambda: f64,
    sigma: f64,
) -> Result<Certificate, BoundError> {
    let eps = generic_compression_bound(inputs, &ComparatorSpec::Linear { lambda, sigma })?;
    let value = inputs.loss_complement + eps / lambda;
    Ok(Certificate::new(BoundKind::LinearBound, value, *inputs))
}

/// Geometric grid of `count` lambdas between `lambda_min` and `lambda_max`.
/// Each grid point is certified at `delta / count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaGrid {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub count: usize,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self {
            lambda_min: 1e-4,
            lambda_max: 10.0,
            count: 20,
        }
    }
}

impl LambdaGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lambda_min];
        }
        let ratio = (self.lambda_max / self.lambda_min).powf(1.0 / (self.count - 1) as f64);
        (0..self.count)
            .map(|j| self.lambda_min * ratio.powi(j as i32))
            .collect()
    }
}

/// Union bound over a lambda grid; returns the tightest certificate and the
/// lambda that produced it. The certificate echoes the caller's full delta.
pub fn linear_compression_bound_grid(
    inputs: &BoundInputs,
    sigma: f64,
    grid: &LambdaGrid,
) -> Result<(Certificate, f64), BoundError> {
    if grid.count == 0 || !(grid.lambda_min > 0.0) || grid.lambda_max < grid.lambda_min {
        return Err(BoundError::Domain(format!("invalid lambda grid {grid:?}")));
    }
    inputs.validate()?;
    let per_point = BoundInputs {
        delta: inputs.delta / grid.count as f64,
        ..*inputs
    };
    let mut best: Option<(f64, f64)> = None;
    for lambda in grid.values() {
        let v = linear_compression_bound(&per_point, lambda, sigma)?.bound_value;
        if best.is_none_or(|(b, _)| v < b) {
            best = Some((v, lambda));
        }
    }
    let (value, lambda) = best.expect("grid is non-empty");
    Ok((Certificate::new(BoundKind::LinearBound, value, *inputs), lambda))
}

/// The lambda minimizing the linear bound when chosen after seeing the data,
/// `sqrt(2 B / (sigma^2 (n - m)))`. A bound evaluated at this lambda is not a
/// valid certificate; use a fixed lambda or the grid.
pub fn optimal_lambda(inputs: &BoundInputs, sigma: f64) -> Result<f64, BoundError> {
    inputs.validate()?;
    let k = inputs.complement_size();
    if k == 0 {
        return Err(BoundError::Degenerate("m = n".into()));
    }
    Ok((2.0 * inputs.complexity()? / (sigma * sigma * k as f64)).sqrt())
}

/// `sum_{k=0}^{m} C(m,k) (k/m)^k (1 - k/m)^(m-k)` with `0^0 = 1`; the exact
/// supremum of the kl moment that `2 sqrt(m)` upper-bounds.
pub fn maurer_sum(m: u64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let mf = m as f64;
    (0..=m)
        .map(|k| {
            let kf = k as f64;
            let mut log_term = log_choose(m, k).expect("k <= m");
            if k > 0 {
                log_term += kf * (kf / mf).ln();
            }
            if k < m {
                log_term += (mf - kf) * (-(kf / mf)).ln_1p();
            }
            log_term.exp()
        })
        .sum()
}
