use std::io::Write;
use std::path::PathBuf;

use clap::Args;

use super::{usage, CliError};
use crate::p2l::{parse_trace_csv, select_row, SelectionCriterion};

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Trace CSV written by `train`.
    #[arg(long)]
    pub trace: PathBuf,
    /// min-kl, final or min-val.
    #[arg(long, default_value = "min-kl")]
    pub criterion: String,
}

pub(super) fn cmd_select(args: &SelectArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let criterion = SelectionCriterion::parse(&args.criterion)
        .ok_or_else(|| usage("--criterion", format!("expected min-kl, final or min-val (got {:?})", args.criterion)))?;
    let text = std::fs::read_to_string(&args.trace)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.trace.display())))?;
    let rows = parse_trace_csv(&text).map_err(|e| usage("--trace", format!("{}: {e}", args.trace.display())))?;
    let row = rows[select_row(&rows, criterion).expect("parsed traces are non-empty")];
    let json = serde_json::to_string_pretty(&row).expect("rows serialize");
    writeln!(out, "{json}").map_err(|e| CliError::Data(e.to_string()))
}
