//! Certificates for consistent compression sets at the sizes reached on
//! binary MNIST pairs, at delta = 0.01.
//!
//! cargo run --example bounds_table

use compress_cert::bounds::{binomial_approx_bound, kl_compression_bound, p2l_bound, BoundInputs};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rows = [
        ("MNIST08", 10597, 92),
        ("MNIST17", 11707, 84),
        ("MNIST23", 10881, 176),
        ("MNIST49", 10612, 237),
        ("MNIST56", 10206, 117),
    ];
    println!("{:<8} {:>6} {:>4} {:>8} {:>8} {:>8}", "pair", "n", "m", "kl %", "binom %", "p2l %");
    for (name, n, m) in rows {
        let inputs = BoundInputs::new(n, m, 0.0, 0.01);
        let kl = kl_compression_bound(&inputs)?.bound_value;
        let binom = binomial_approx_bound(&inputs)?.bound_value;
        let p2l = p2l_bound(m, n, 0.01)?.bound_value;
        println!(
            "{name:<8} {n:>6} {m:>4} {:>8.3} {:>8.3} {:>8.3}",
            100.0 * kl,
            100.0 * binom,
            100.0 * p2l
        );
    }
    Ok(())
}
