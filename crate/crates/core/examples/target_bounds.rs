//! Target ranges for regression certificates, and the split sizes they are
//! computed on.
//!
//! cargo run --example target_bounds

use compress_cert::data::{split, synth_regress, target_bounds};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // observed (min, max) of the training targets of five UCI datasets
    let observed = [
        ("Powerplant", 420.26, 495.76),
        ("Infrared", 35.75, 39.3),
        ("Airfoil", 103.38, 140.99),
        ("Parkinson", 5.04, 39.51),
        ("Concrete", 2.33, 82.6),
    ];
    println!("{:<11} {:>8} {:>8} {:>8} {:>8}", "dataset", "y_lo", "y_hi", "range", "sigma");
    for (name, lo, hi) in observed {
        let b = target_bounds(&[lo, hi], 0.1)?;
        println!("{name:<11} {:>8.2} {:>8.2} {:>8.2} {:>8.2}", b.y_lo, b.y_hi, b.loss_max(), b.sigma);
    }

    let data = synth_regress(9568, 4, 1.0, 0);
    for seed in [1, 2, 3, 4, 42] {
        let s = split(&data, seed, false)?;
        let test = s.test.as_ref().map_or(0, |t| t.len());
        println!("seed {seed:>2}: train {} / val {} / test {test}", s.train.len(), s.val.len());
    }
    Ok(())
}
