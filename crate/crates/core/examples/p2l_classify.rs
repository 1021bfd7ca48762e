//! Pick-To-Learn on two Gaussian blobs with a small MLP: the compression
//! set grows until every remaining point is classified with probability
//! above one half, and every iteration carries its own certificates.
//!
//! cargo run --release --example p2l_classify [-- <seed> <pick batch>]

use compress_cert::data::{split, synth_classify};
use compress_cert::learners::{LearnerConfig, MlpParams};
use compress_cert::p2l::{p2l_classify, select_checkpoint, P2LConfig, SelectionCriterion};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(Ok(1), |s| s.parse())?;
    let batch: usize = args.next().map_or(Ok(1), |s| s.parse())?;

    let data = synth_classify(2000, 2, 2.5, 0);
    let s = split(&data, seed, false)?;
    let learner = LearnerConfig::Mlp(MlpParams {
        hidden: vec![16],
        learning_rate: 1e-2,
        ..MlpParams::default()
    });
    let cfg = P2LConfig { pick_batch: batch, ..P2LConfig::classification(seed) };
    let out = p2l_classify(&s.train, Some(&s.val), &learner, &cfg)?;

    println!("status {:?} after {} iterations", out.trace.status, out.trace.checkpoints.len() - 1);
    println!("{:>4} {:>4} {:>9} {:>8} {:>8} {:>8}", "it", "m", "err", "kl", "binom", "p2l");
    for cp in &out.trace.checkpoints {
        let r = cp.row();
        let show = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        println!(
            "{:>4} {:>4} {:>9.5} {:>8} {:>8} {:>8}",
            r.iteration,
            r.m,
            r.complement_loss,
            show(r.kl_bound),
            show(r.binom_bound),
            show(r.p2l_bound)
        );
    }
    let best = select_checkpoint(&out.trace, SelectionCriterion::MinKlBound);
    println!("min-kl checkpoint: iteration {} with m = {}", best.iteration, best.m());
    if let Some(test) = &s.test {
        let err = compress_cert::learners::risk_eval(&compress_cert::learners::LossSpec::ZeroOne, &out.model, test);
        println!("test error of the final model: {err:.4}");
    }
    Ok(())
}
