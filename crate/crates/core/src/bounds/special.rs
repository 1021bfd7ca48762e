//! Log-space numerics shared by every bound: binomial coefficients, the
//! compression-size prior, log-sum-exp and a bracketed bisection solver.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use super::BoundError;

/// Hard cap on bisection steps for every root-find in this module.
pub const MAX_BISECTION_ITERS: usize = 200;

/// `ln C(n, k)` via log-gamma.
pub fn log_choose(n: u64, k: u64) -> Result<f64, BoundError> {
    if k > n {
        return Err(BoundError::Domain(format!(
            "log_choose requires k <= n (got n={n}, k={k})"
        )));
    }
    if k == 0 || k == n {
        return Ok(0.0);
    }
    let (n, k) = (n as f64, k as f64);
    Ok(ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0))
}

/// Prior weight over compression-set sizes, `6 / (pi^2 (m+1)^2)`.
/// Sums to one over `m >= 0`.
pub fn zeta_prior(m: u64) -> f64 {
    let m1 = m as f64 + 1.0;
    6.0 / (PI * PI * m1 * m1)
}

/// `ln zeta_prior(m)`, evaluated without forming the (possibly tiny) product.
pub fn ln_zeta_prior(m: u64) -> f64 {
    (6.0 / (PI * PI)).ln() - 2.0 * (m as f64 + 1.0).ln()
}

/// Numerically stable `ln(sum(exp(x_i)))`. Empty input gives `-inf`.
///
/// Terms are accumulated in slice order so the result is reproducible.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = terms.iter().map(|&t| (t - max).exp()).sum();
    max + sum.ln()
}

/// Bisection for the boundary of a monotone predicate on `[lo, hi]`.
///
/// `below(lo)` must hold. Returns the largest point known to satisfy
/// `below`, once the bracket is narrower than `tol`, stops shrinking, or
/// `MAX_BISECTION_ITERS` is hit.
pub(crate) fn bisect_boundary<F>(mut lo: f64, mut hi: f64, tol: f64, mut below: F) -> f64
where
    F: FnMut(f64) -> bool,
{
    for _ in 0..MAX_BISECTION_ITERS {
        if hi - lo <= tol {
            break;
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
