mod bound;
mod curve;
mod simulate;
mod verify;

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

pub use curve::{curve_rows, render_svg, CURVE_POINTS};

use crate::config::{ExperimentConfig, Mode};
use crate::error::{CliError, CliResult};
use crate::record::{Check, RunRecord};

/// Runs one configured command. `emit` receives each check as it finishes.
pub fn execute(cfg: &ExperimentConfig, emit: &mut dyn FnMut(&Check)) -> CliResult<RunRecord> {
    match cfg.mode {
        Mode::Bound => bound::bound(cfg),
        Mode::Threshold => bound::threshold(cfg),
        Mode::Curve => curve::curve(cfg),
        Mode::Verify => verify::verify(cfg, emit),
        Mode::Simulate => simulate::simulate(cfg),
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn json(value: impl Serialize) -> Value {
    serde_json::to_value(value).expect("payload types serialize to JSON")
}

/// A CSV document with LF line endings.
pub(crate) fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
