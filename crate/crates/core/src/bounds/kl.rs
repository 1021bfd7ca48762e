use super::comparator::{generic_compression_bound, ComparatorSpec};
use super::special::bisect_boundary;
use super::{BoundError, BoundInputs, BoundKind, Certificate};

/// Bracket width at which `kl_inv` stops. Finer than the 1e-12 the
/// bound needs so that `kl(q, kl_inv(q, eps))` lands within 1e-9 of
/// `eps` even where the divergence is steep near `p = 1`.
const KL_INV_TOL: f64 = 1e-15;

/// Binary KL divergence `kl(q || p)` with `0 ln 0 = 0`.
///
/// Returns `+inf` when `p` sits on the boundary and `q` does not match it.
pub fn kl_div(q: f64, p: f64) -> f64 {
    let mut out = 0.0;
    if q > 0.0 {
        if p <= 0.0 {
            return f64::INFINITY;
        }
        out += q * (q.ln() - p.ln());
    }
    if q < 1.0 {
        if p >= 1.0 {
            return f64::INFINITY;
        }
        out += (1.0 - q) * ((-q).ln_1p() - (-p).ln_1p());
    }
    out.max(0.0)
}

/// `sup { p in [q, 1] : kl(q || p) <= eps }` by bisection.
pub fn kl_inv(q: f64, eps: f64) -> f64 {
    if q >= 1.0 {
        return 1.0;
    }
    let q = q.max(0.0);
    if eps <= 0.0 {
        return q;
    }
    bisect_boundary(q, 1.0, KL_INV_TOL, |p| kl_div(q, p) <= eps)
}

/// Sample-compression bound with the kl comparator, for losses in `[0, 1]`.
///
/// `kl_inv(loss, (ln C(n,m) + ln(2 sqrt(n-m) / (zeta(m) P delta))) / (n-m))`.
pub fn kl_compression_bound(inputs: &BoundInputs) -> Result<Certificate, BoundError> {
    inputs.validate()?;
    if inputs.loss_complement > 1.0 {
        return Err(BoundError::Domain(format!(
            "kl bound needs loss_complement in [0, 1] (got {})",
            inputs.loss_complement
        )));
    }
    if inputs.m == inputs.n {
        let mut cert = Certificate::new(BoundKind::KlBound, 1.0, *inputs);
        cert.vacuous = true;
        return Ok(cert);
    }
    let eps = generic_compression_bound(inputs, &ComparatorSpec::Kl)?;
    let value = kl_inv(inputs.loss_complement, eps);
    Ok(Certificate::new(BoundKind::KlBound, value, *inputs))
}

/// kl bound for a loss in `[0, loss_max]`: rescale to `[0, 1]`, bound,
/// multiply back.
pub fn rescaled_kl_bound(inputs: &BoundInputs, loss_max: f64) -> Result<Certificate, BoundError> {
    if !(loss_max > 0.0 && loss_max.is_finite()) {
        return Err(BoundError::Domain(format!(
            "loss_max must be positive and finite (got {loss_max})"
        )));
    }
    if inputs.loss_complement > loss_max {
        return Err(BoundError::Domain(format!(
            "loss_complement {} exceeds loss_max {loss_max}",
            inputs.loss_complement
        )));
    }
    let unit = inputs.with_loss(inputs.loss_complement / loss_max);
    let mut cert = kl_compression_bound(&unit)?;
    cert.bound_value *= loss_max;
    cert.inputs = *inputs;
    cert.scale = loss_max;
    Ok(cert)
}
