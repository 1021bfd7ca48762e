use super::special::{bisect_boundary, log_choose, log_sum_exp};
use super::{BoundError, BoundInputs, BoundKind, Certificate};

const TAIL_TOL: f64 = 1e-10;

/// Error count on the complement implied by a mean zero-one loss,
/// rounded to the nearest integer.
pub fn complement_errors(inputs: &BoundInputs) -> u64 {
    (inputs.loss_complement * inputs.complement_size() as f64).round() as u64
}

/// `sup { r in [0,1] : P[Binomial(m, r) <= k] >= delta }`.
pub fn binomial_tail_inv(k: u64, m: u64, delta: f64) -> Result<f64, BoundError> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(BoundError::Domain(format!(
            "delta must lie in (0, 1] (got {delta})"
        )));
    }
    binomial_tail_inv_ln(k, m, delta.ln())
}

/// Same as [`binomial_tail_inv`] but with the confidence given as
/// `ln delta`, so that `delta / C(n, m)` never underflows.
pub(crate) fn binomial_tail_inv_ln(k: u64, m: u64, ln_delta: f64) -> Result<f64, BoundError> {
    if m == 0 {
        return Err(BoundError::Domain("binomial tail needs m >= 1".into()));
    }
    if k > m {
        return Err(BoundError::Domain(format!(
            "binomial tail needs k <= m (got k={k}, m={m})"
        )));
    }
    if k == m {
        return Ok(1.0);
    }
    let coeffs: Vec<f64> = (0..=k)
        .map(|i| log_choose(m, i).expect("i <= m"))
        .collect();
    let mut terms = vec![0.0; coeffs.len()];
    let log_cdf = |r: f64, terms: &mut Vec<f64>| {
        let ln_r = r.ln();
        let ln_1mr = (-r).ln_1p();
        for (i, (t, c)) in terms.iter_mut().zip(&coeffs).enumerate() {
            let i = i as u64;
            let mut v = *c + (m - i) as f64 * ln_1mr;
            if i > 0 {
                v += i as f64 * ln_r;
            }
            *t = v;
        }
        log_sum_exp(terms)
    };
    // CDF(0) = 1 >= delta always holds; CDF is decreasing in r.
    Ok(bisect_boundary(0.0, 1.0, TAIL_TOL, |r| {
        log_cdf(r, &mut terms) >= ln_delta
    }))
}

/// Binomial tail inversion over the complement: `kappa` errors in `n - m`
/// trials at confidence `zeta(m) P delta / C(n, m)`.
pub fn binomial_tail_bound(inputs: &BoundInputs) -> Result<Certificate, BoundError> {
    inputs.validate()?;
    check_unit_loss(inputs)?;
    let trials = inputs.complement_size();
    if trials == 0 {
        let mut cert = Certificate::new(BoundKind::BinomialTailInv, 1.0, *inputs);
        cert.vacuous = true;
        return Ok(cert);
    }
    let kappa = complement_errors(inputs).min(trials);
    let ln_delta = -inputs.complexity()?;
    let value = binomial_tail_inv_ln(kappa, trials, ln_delta)?;
    Ok(Certificate::new(BoundKind::BinomialTailInv, value, *inputs))
}

/// Closed-form approximation of the binomial tail bound for the zero-one
/// loss: `1 - exp(-(ln C(n-m, kappa) + complexity) / (n - m - kappa))`.
pub fn binomial_approx_bound(inputs: &BoundInputs) -> Result<Certificate, BoundError> {
    inputs.validate()?;
    check_unit_loss(inputs)?;
    let trials = inputs.complement_size();
    let kappa = complement_errors(inputs);
    if kappa >= trials {
        return Err(BoundError::Degenerate(format!(
            "binomial approximation needs kappa < n - m (kappa={kappa}, n-m={trials})"
        )));
    }
    let exponent =
        (log_choose(trials, kappa)? + inputs.complexity()?) / (trials - kappa) as f64;
    let value = -(-exponent).exp_m1();
    Ok(Certificate::new(BoundKind::BinomialApprox, value, *inputs))
}

fn check_unit_loss(inputs: &BoundInputs) -> Result<(), BoundError> {
    if inputs.loss_complement > 1.0 {
        return Err(BoundError::Domain(format!(
            "zero-one loss must lie in [0, 1] (got {})",
            inputs.loss_complement
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::zeta_prior;

    fn binom_cdf(k: u64, m: u64, r: f64) -> f64 {
        // direct product form, fine for small m
        let mut total = 0.0;
        let mut coeff = 1.0;
        for i in 0..=k {
            if i > 0 {
                coeff *= (m - i + 1) as f64 / i as f64;
            }
            total += coeff * r.powi(i as i32) * (1.0 - r).powi((m - i) as i32);
        }
        total
    }

    #[test]
    fn tail_inv_closed_form_k0() {
        for &(m, d) in &[(1u64, 0.05), (10, 0.05), (1000, 0.01), (10_000, 0.3)] {
            let got = binomial_tail_inv(0, m, d).unwrap();
            let expected = 1.0 - d.powf(1.0 / m as f64);
            assert!((got - expected).abs() < 1e-9, "m={m} {got} {expected}");
        }
    }

    #[test]
    fn tail_inv_whole_support() {
        assert_eq!(binomial_tail_inv(7, 7, 0.01).unwrap(), 1.0);
        assert!(binomial_tail_inv(8, 7, 0.01).is_err());
        assert!(binomial_tail_inv(0, 0, 0.01).is_err());
        assert!(binomial_tail_inv(0, 3, 0.0).is_err());
    }

    #[test]
    fn tail_inv_matches_grid_scan() {
        let got = binomial_tail_inv(1, 10, 0.05).unwrap();
        let step = 1e-7;
        let mut best = 0.0;
        let mut i = 0u64;
        while (i as f64) * step <= 1.0 {
            let r = i as f64 * step;
            if binom_cdf(1, 10, r) >= 0.05 {
                best = r;
            } else {
                break;
            }
            i += 1;
        }
        assert!((got - best).abs() < 2e-7, "got={got} grid={best}");
        assert!((binom_cdf(1, 10, got) - 0.05).abs() < 1e-8);
    }

    #[test]
    fn approx_table_values() {
        let c = binomial_approx_bound(&BoundInputs::new(10597, 92, 0.0, 0.01)).unwrap();
        assert!((c.bound_value - 0.0500).abs() < 5e-5, "{}", c.bound_value);
        let c = binomial_approx_bound(&BoundInputs::new(10612, 237, 0.0, 0.01)).unwrap();
        assert!((c.bound_value - 0.1047).abs() < 5e-5, "{}", c.bound_value);
    }

    #[test]
    fn approx_empty_compression_set() {
        let n = 500u64;
        let c = binomial_approx_bound(&BoundInputs::new(n, 0, 0.0, 0.05)).unwrap();
        let expected = 1.0 - (-(1.0 / (zeta_prior(0) * 0.05)).ln() / n as f64).exp();
        assert!((c.bound_value - expected).abs() < 1e-14);
    }

    #[test]
    fn approx_degenerate_when_all_wrong() {
        let r = binomial_approx_bound(&BoundInputs::new(10, 2, 1.0, 0.05));
        assert!(matches!(r, Err(BoundError::Degenerate(_))));
        let r = binomial_approx_bound(&BoundInputs::new(10, 10, 0.0, 0.05));
        assert!(matches!(r, Err(BoundError::Degenerate(_))));
    }

    #[test]
    fn kappa_rounds_to_nearest() {
        let inputs = BoundInputs::new(110, 10, 0.034, 0.05);
        assert_eq!(complement_errors(&inputs), 3);
        let inputs = BoundInputs::new(110, 10, 0.036, 0.05);
        assert_eq!(complement_errors(&inputs), 4);
    }

    #[test]
    fn tail_bound_beats_or_matches_approx_with_errors() {
        for kappa in [0u64, 1, 3, 10] {
            let inputs = BoundInputs::new(400, 12, kappa as f64 / 388.0, 0.05);
            let tail = binomial_tail_bound(&inputs).unwrap().bound_value;
            let approx = binomial_approx_bound(&inputs).unwrap().bound_value;
            assert!(tail <= approx + 1e-9, "kappa={kappa} tail={tail} approx={approx}");
        }
    }
}
