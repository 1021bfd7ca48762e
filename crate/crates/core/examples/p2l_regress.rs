//! Regression Pick-To-Learn with a tree and a forest, from a CSV file
//! (header row, target in the last column) or synthetic data.
//!
//! cargo run --release --example p2l_regress [-- data.csv]

use compress_cert::bounds::BoundKind;
use compress_cert::data::{load_csv, split, synth_regress, target_bounds};
use compress_cert::learners::{rms_risk_eval, LearnerConfig, TreeParams};
use compress_cert::p2l::{p2l_regress, P2LConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = match std::env::args().nth(1) {
        Some(path) => load_csv(path)?,
        None => synth_regress(600, 3, 0.3, 0),
    };
    let s = split(&data, 1, false)?;
    let bounds = target_bounds(s.train.real_targets().unwrap(), 0.1)?;
    println!("targets bounded in [{:.3}, {:.3}], sigma {:.3}", bounds.y_lo, bounds.y_hi, bounds.sigma);

    let tree = TreeParams { max_depth: 5, ..TreeParams::default() };
    for learner in [
        LearnerConfig::Tree(tree),
        LearnerConfig::Forest(TreeParams { n_estimators: 20, ..tree }),
    ] {
        let cfg = P2LConfig { patience: 10, ..P2LConfig::regression(bounds, 1) };
        let out = p2l_regress(&s.train, Some(&s.val), &learner, &cfg)?;
        let best = &out.trace.checkpoints[out.trace.returned];
        let test = s.test.as_ref().unwrap();
        println!(
            "{:<6} {:?}: best at m = {} of {}, complement RMSE {:.4}, test RMSE {:.4}",
            learner.name(),
            out.trace.status,
            best.m(),
            s.train.len(),
            best.complement_rms,
            rms_risk_eval(&cfg.loss, &out.model, test)
        );
        println!(
            "        MAE {:.4}: kl bound {:.4}, linear bound {:.4}",
            best.complement_loss_mean,
            best.bound(BoundKind::KlBound).unwrap_or(f64::NAN),
            best.bound(BoundKind::LinearBound).unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
