//! Write a trace CSV and pick checkpoints from it by three criteria.
//!
//! cargo run --release --example checkpoint_select

use compress_cert::data::{split, synth_classify};
use compress_cert::learners::{LearnerConfig, MlpParams};
use compress_cert::p2l::{p2l_classify, parse_trace_csv, select_row, trace_to_csv, P2LConfig, SelectionCriterion};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = synth_classify(1500, 2, 2.0, 5);
    let s = split(&data, 2, false)?;
    let learner = LearnerConfig::Mlp(MlpParams { hidden: vec![16], learning_rate: 1e-2, ..MlpParams::default() });
    let out = p2l_classify(&s.train, Some(&s.val), &learner, &P2LConfig::classification(2))?;

    let csv = trace_to_csv(&out.trace.rows());
    let rows = parse_trace_csv(&csv)?;
    print!("{csv}");
    for (name, c) in [
        ("final", SelectionCriterion::FinalConsistent),
        ("min-kl", SelectionCriterion::MinKlBound),
        ("min-val", SelectionCriterion::MinValidationLoss),
    ] {
        let r = rows[select_row(&rows, c).unwrap()];
        println!("{name:>8}: iteration {}, m {}, kl {:?}", r.iteration, r.m, r.kl_bound);
    }
    Ok(())
}
