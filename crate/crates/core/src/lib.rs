//! Sample-compression generalization certificates and the Pick-To-Learn
//! (P2L) meta-algorithm.
//!
//! - [`bounds`]: kl, linear sub-Gaussian, binomial and P2L certificates from
//!   raw `(n, m, loss, delta)` inputs.
//! - [`learners`]: CART regression trees, bagged forests and a small MLP
//!   classifier, all deterministic under a seed.
//! - [`p2l`]: the greedy compression loop, its per-iteration certificate
//!   trace, checkpoint selection and replay from the compression set.
//! - [`data`]: IDX and CSV loaders, synthetic generators, splits and target
//!   bounds.
//! - [`cli`]: the `bound`, `train` and `select` subcommands behind the
//!   `compress-cert` binary.
//!
//! ```
//! use compress_cert::bounds::{kl_compression_bound, BoundInputs};
//!
//! let cert = kl_compression_bound(&BoundInputs::new(10597, 92, 0.0, 0.01)).unwrap();
//! assert!((cert.bound_value - 0.0505).abs() < 1e-3);
//! ```

pub mod bounds;
pub mod cli;
pub mod data;
pub mod learners;
pub mod p2l;
pub mod seeding;
