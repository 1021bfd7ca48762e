use rand::seq::SliceRandom;

use super::{DataError, Dataset, Role};
use crate::seeding::{rng_for, TAG_SPLIT};

#[derive(Debug, Clone)]
pub struct Splits {
    pub train: Dataset,
    pub val: Dataset,
    /// `None` when the caller has a built-in test set.
    pub test: Option<Dataset>,
}

/// Seeded shuffle, then carve a test set of `floor(0.1 n)` (unless a
/// built-in test set exists) and a validation set of `floor(0.1 * rest)`.
pub fn split(data: &Dataset, seed: u64, has_builtin_test: bool) -> Result<Splits, DataError> {
    let n = data.len();
    if n < 10 {
        return Err(DataError::Invalid(format!("split needs at least 10 rows (got {n})")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_for(seed, &[TAG_SPLIT]));

    let n_test = if has_builtin_test { 0 } else { n / 10 };
    let n_val = (n - n_test) / 10;
    let (test_idx, rest) = order.split_at(n_test);
    let (val_idx, train_idx) = rest.split_at(n_val);

    let part = |idx: &[usize], role: Role| {
        let mut d = data.subset(idx).with_role(role);
        d.meta.split_seed = Some(seed);
        d
    };
    Ok(Splits {
        train: part(train_idx, Role::Train),
        val: part(val_idx, Role::Val),
        test: (!has_builtin_test).then(|| part(test_idx, Role::Test)),
    })
}
