//! Counter-based seed derivation. Every random draw in the crate comes from
//! a ChaCha stream keyed by `(seed, purpose, counters...)`, so a fit never
//! depends on how many draws some other component made.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a base seed with a path of counters into a fresh 64-bit seed.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

pub fn rng_for(seed: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, path))
}

// Purpose tags used as the first path element.
pub(crate) const TAG_SPLIT: u64 = 1;
pub(crate) const TAG_BOOTSTRAP: u64 = 2;
pub(crate) const TAG_MLP_INIT: u64 = 3;
pub(crate) const TAG_MLP_TRAIN: u64 = 4;
pub(crate) const TAG_SYNTH: u64 = 5;
