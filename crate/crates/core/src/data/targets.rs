use super::DataError;
use crate::learners::TargetBounds;

/// Widen the observed target range by `p * (max - min)` on each side.
///
/// If the widened lower end drops below zero while every observed target is
/// non-negative, it is clamped to zero. The sub-Gaussian scale is half the
/// observed range.
pub fn target_bounds(targets: &[f64], p: f64) -> Result<TargetBounds, DataError> {
    if targets.len() < 2 {
        return Err(DataError::Invalid("target bounds need at least two targets".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(DataError::Invalid(format!("margin fraction must lie in [0, 1] (got {p})")));
    }
    let min = targets.iter().copied().fold(f64::INFINITY, f64::min);
    let max = targets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    if range == 0.0 {
        log::warn!("constant targets ({min}); loss range floored");
    }
    let mut y_lo = min - p * range;
    let y_hi = max + p * range;
    if y_lo < 0.0 && min >= 0.0 {
        y_lo = 0.0;
    }
    Ok(TargetBounds {
        y_lo,
        y_hi,
        margin_frac: p,
        sigma: range / 2.0,
    })
}
