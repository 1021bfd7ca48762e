//! A P2L model is a function of its compression set: rebuild it from the
//! stored set alone and compare predictions on fresh points.
//!
//! cargo run --release --example replay

use compress_cert::data::{split, synth_classify, synth_regress, target_bounds};
use compress_cert::learners::{LearnerConfig, MlpParams, TreeParams};
use compress_cert::p2l::{p2l_classify, p2l_regress, replay_model, P2LConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = synth_regress(300, 2, 0.5, 3);
    let s = split(&data, 7, false)?;
    let bounds = target_bounds(s.train.real_targets().unwrap(), 0.1)?;
    let learner = LearnerConfig::Forest(TreeParams { n_estimators: 10, ..TreeParams::default() });
    let cfg = P2LConfig::regression(bounds, 7);
    let out = p2l_regress(&s.train, None, &learner, &cfg)?;
    let rebuilt = replay_model(&s.train, None, &learner, &cfg, &out.trace, out.trace.returned)?;
    let probe = synth_regress(200, 2, 0.5, 99);
    let same = (0..probe.len()).all(|i| rebuilt.predict(probe.row(i)).to_bits() == out.model.predict(probe.row(i)).to_bits());
    println!("forest: {} of {} points kept, replay identical: {same}", out.trace.checkpoints[out.trace.returned].m(), s.train.len());

    let data = synth_classify(600, 2, 3.0, 3);
    let s = split(&data, 7, false)?;
    let learner = LearnerConfig::Mlp(MlpParams { hidden: vec![8], learning_rate: 1e-2, ..MlpParams::default() });
    let cfg = P2LConfig::classification(7);
    let out = p2l_classify(&s.train, Some(&s.val), &learner, &cfg)?;
    let rebuilt = replay_model(&s.train, Some(&s.val), &learner, &cfg, &out.trace, out.trace.returned)?;
    println!("mlp: {} of {} points kept, replay identical: {}", out.trace.last().m(), s.train.len(), rebuilt == out.model);
    Ok(())
}
