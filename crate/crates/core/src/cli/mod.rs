//! Command-line front end: `bound`, `train` and `select`.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error.

mod bound;
mod select;
mod train;

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand};

pub use bound::BoundArgs;
pub use select::SelectArgs;
pub use train::{RunReport, TrainArgs, REPORT_FORMAT, REPORT_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) => m,
        }
    }
}

pub(crate) fn usage(flag: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("{flag}: {msg}"))
}

#[derive(Debug, Parser)]
#[command(name = "compress-cert", version, about = "Sample-compression certificates and Pick-To-Learn runs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute certificates from raw numbers and print them as JSON.
    Bound(BoundArgs),
    /// Run P2L over several seeds and write traces and a report.
    Train(TrainArgs),
    /// Pick a checkpoint row from a trace CSV.
    Select(SelectArgs),
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Bound(a) => bound::cmd_bound(a, out),
        Command::Train(a) => train::cmd_train(a, out, err),
        Command::Select(a) => select::cmd_select(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.code()
        }
    }
}

/// Write `contents` to `path` through a temporary file in the same
/// directory and a rename.
pub(crate) fn write_atomic(path: &std::path::Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| std::path::Path::new("."));
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}
