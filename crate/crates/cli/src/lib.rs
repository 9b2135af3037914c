//! Command-line front end: configuration, suite orchestration and record,
//! CSV and SVG emission.
//!
//! Stdout carries JSON only: one line per check (for `verify`) followed by
//! the [`RunRecord`] on the final line. Human-readable text goes to stderr.

pub mod commands;
pub mod config;
pub mod error;
pub mod record;

use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

use clap::Parser;

pub use commands::execute;
pub use config::{Cli, ExperimentConfig, Mode, Params};
pub use error::{CliError, CliResult};
pub use record::{Check, RunRecord};

fn run_inner(args: Vec<OsString>, stdout: &mut dyn Write) -> CliResult<RunRecord> {
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Config(e.to_string()))?;
    let cfg = ExperimentConfig::from_cli(cli)?;
    let mut emit = |c: &Check| {
        let _ = writeln!(
            stdout,
            "{}",
            serde_json::to_string(c).expect("checks serialize")
        );
    };
    let record = execute(&cfg, &mut emit)?;
    if cfg.mode != Mode::Curve {
        if let Some(path) = &cfg.params.out {
            commands::write_file(path, &format!("{}\n", record.to_json()))?;
        }
    }
    let _ = writeln!(stdout, "{}", record.to_json());
    if record.passed {
        Ok(record)
    } else {
        Err(CliError::ChecksFailed(
            record.checks.iter().filter(|c| !c.passed).count(),
        ))
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if let Err(e) = Cli::try_parse_from(args.clone()) {
        // Help, version and usage errors are human text.
        let _ = write!(stderr, "{e}");
        return e.exit_code();
    }
    let start = Instant::now();
    match run_inner(args, stdout) {
        Ok(record) => {
            let _ = writeln!(
                stderr,
                "escape-dim {}: ok in {:.3} s",
                record.command,
                start.elapsed().as_secs_f64()
            );
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if matches!(e, CliError::Config(_)) {
                let _ = writeln!(stderr, "run `escape-dim <command> --help` for usage");
            }
            e.exit_code()
        }
    }
}
