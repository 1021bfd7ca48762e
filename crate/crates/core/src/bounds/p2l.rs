//! Consistent-case bound for Pick-To-Learn outputs.
//!
//! `eps_bar(k, delta)` is the root on `[k/n, 1]` of `Psi_{k,delta}(eps) = 1`,
//!
//! ```text
//! Psi(eps) = delta/(2N) sum_{j=k}^{n-1}  C(j,k)/C(n,k) (1-eps)^{-(n-j)}
//!          + delta/(6N) sum_{j=n+1}^{4N} C(j,k)/C(n,k) (1-eps)^{j-n}
//! ```
//!
//! The normalizer `N` (the "horizon") is a free parameter here. `p2l_bound`
//! sets it to the number of Pick-To-Learn iterations, which for one pick per
//! iteration equals `k`.

use super::special::{bisect_boundary, log_choose, log_sum_exp};
use super::{BoundError, BoundInputs, BoundKind, Certificate};

const PSI_TOL: f64 = 1e-10;
const UPPER_PROBE: f64 = 1.0 - 1e-12;

struct PsiTerms {
    /// `(ln weight, exponent of ln(1-eps))` for every summand.
    terms: Vec<(f64, f64)>,
}

impl PsiTerms {
    fn new(k: u64, n: u64, horizon: u64, delta: f64) -> Result<Self, BoundError> {
        let ln_cnk = log_choose(n, k)?;
        let big_n = horizon as f64;
        let ln_w1 = (delta / (2.0 * big_n)).ln();
        let ln_w2 = (delta / (6.0 * big_n)).ln();
        let mut terms = Vec::new();
        for j in k..n {
            let c = log_choose(j, k)? - ln_cnk;
            terms.push((ln_w1 + c, -((n - j) as f64)));
        }
        for j in (n + 1)..=(4 * horizon) {
            let c = log_choose(j, k)? - ln_cnk;
            terms.push((ln_w2 + c, (j - n) as f64));
        }
        Ok(Self { terms })
    }

    fn ln_psi(&self, eps: f64, scratch: &mut Vec<f64>) -> f64 {
        let ln_1me = (-eps).ln_1p();
        scratch.clear();
        scratch.extend(self.terms.iter().map(|&(w, e)| w + e * ln_1me));
        log_sum_exp(scratch)
    }
}

/// `Psi_{k,delta}(eps)` with normalizer `horizon`.
pub fn p2l_psi(k: u64, n: u64, horizon: u64, delta: f64, eps: f64) -> Result<f64, BoundError> {
    check(k, n, horizon, delta)?;
    let psi = PsiTerms::new(k, n, horizon, delta)?;
    Ok(psi.ln_psi(eps, &mut Vec::new()).exp())
}

/// P2L bound with the iteration-count horizon `N = max(m, 1)`.
pub fn p2l_bound(m: u64, n: u64, delta: f64) -> Result<Certificate, BoundError> {
    p2l_bound_with_horizon(m, n, delta, m.max(1))
}

/// P2L bound for a consistent compression set of size `m` out of `n`.
///
/// Returns 1 for `m = n`. When `Psi` does not cross 1 on
/// `[m/n, 1 - 1e-12]` the certificate is 1 and flagged vacuous.
pub fn p2l_bound_with_horizon(
    m: u64,
    n: u64,
    delta: f64,
    horizon: u64,
) -> Result<Certificate, BoundError> {
    check(m, n, horizon, delta)?;
    let inputs = BoundInputs::new(n, m, 0.0, delta);
    if m == n {
        return Ok(Certificate::new(BoundKind::P2LBound, 1.0, inputs));
    }
    let psi = PsiTerms::new(m, n, horizon, delta)?;
    let mut scratch = Vec::with_capacity(psi.terms.len());
    let lo = m as f64 / n as f64;
    // Psi rises from below 1 at m/n to +inf as eps -> 1.
    let below_at_lo = psi.ln_psi(lo, &mut scratch) <= 0.0;
    let above_at_hi = psi.ln_psi(UPPER_PROBE, &mut scratch) >= 0.0;
    if !(below_at_lo && above_at_hi) {
        let mut cert = Certificate::new(BoundKind::P2LBound, 1.0, inputs);
        cert.vacuous = true;
        return Ok(cert);
    }
    let root = bisect_boundary(lo, UPPER_PROBE, PSI_TOL, |eps| {
        psi.ln_psi(eps, &mut scratch) < 0.0
    });
    Ok(Certificate::new(BoundKind::P2LBound, root, inputs))
}

fn check(k: u64, n: u64, horizon: u64, delta: f64) -> Result<(), BoundError> {
    if n == 0 || k > n {
        return Err(BoundError::Domain(format!(
            "P2L bound needs 0 <= m <= n, n >= 1 (got m={k}, n={n})"
        )));
    }
    if horizon == 0 {
        return Err(BoundError::Domain("P2L horizon must be at least 1".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(BoundError::Domain(format!(
            "P2L bound needs delta in (0, 1) (got {delta})"
        )));
    }
    Ok(())
}
