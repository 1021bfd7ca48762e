//! Binary MNIST pair from IDX files, then the certificate a compression set
//! of typical size for such a pair would earn.
//!
//! cargo run --release --example mnist_pair -- <train-images> <train-labels> [a b]

use compress_cert::bounds::{kl_compression_bound, p2l_bound, BoundInputs};
use compress_cert::data::{filter_digit_pair, load_idx, split};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() < 2 {
        eprintln!("usage: mnist_pair <train-images-idx3-ubyte> <train-labels-idx1-ubyte> [a b]");
        std::process::exit(2);
    }
    let (a, b) = match (args.get(2), args.get(3)) {
        (Some(a), Some(b)) => (a.parse()?, b.parse()?),
        _ => (0, 8),
    };
    let pool = filter_digit_pair(&load_idx(&args[0], &args[1])?, a, b)?;
    let s = split(&pool, 1, true)?;
    println!("digits {a}/{b}: {} points, train {} / val {}", pool.len(), s.train.len(), s.val.len());
    let n = s.train.len() as u64;
    for m in [50, 92, 200] {
        let kl = kl_compression_bound(&BoundInputs::new(n, m, 0.0, 0.01))?.bound_value;
        let p2l = p2l_bound(m, n, 0.01)?.bound_value;
        println!("consistent with m = {m:>3}: kl {:.3}%, p2l {:.3}%", 100.0 * kl, 100.0 * p2l);
    }
    Ok(())
}
