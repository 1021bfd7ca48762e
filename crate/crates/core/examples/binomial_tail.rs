//! Binomial tail inversion against its closed-form approximation.
//!
//! cargo run --example binomial_tail

use compress_cert::bounds::{binomial_approx_bound, binomial_tail_bound, binomial_tail_inv, BoundInputs};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("test-set bound, 1000 points, delta 0.05");
    for k in [0, 1, 5, 20] {
        println!("  {k:>2} errors: {:.5}", binomial_tail_inv(k, 1000, 0.05)?);
    }

    println!("compression bound, n = 5000, m = 40, delta 0.01");
    println!("{:>10} {:>10} {:>10}", "error", "tail", "approx");
    for err in [0.0, 0.002, 0.01, 0.05] {
        let inputs = BoundInputs::new(5000, 40, err, 0.01);
        let tail = binomial_tail_bound(&inputs)?.bound_value;
        let approx = binomial_approx_bound(&inputs)?.bound_value;
        println!("{err:>10} {tail:>10.5} {approx:>10.5}");
    }
    Ok(())
}
