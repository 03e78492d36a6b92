//! Experiment orchestration: config parsing, per-cell runs and persisted reports.
//!
//! An output directory holds
//!
//! * `experiment.json`, the validated config with its fingerprint,
//! * `manifest.csv`, the benchmark definitions used,
//! * `runs/<function>/<version>/run_<id>.{trace.csv,events.csv,json}` per cell,
//! * `journal.log`, an append-only log with wall times,
//! * the report: `summary.txt`, `summary.csv`, `ratios.csv`, `t_div_best.csv`,
//!   `final_errors.csv` and `traces/<function>__<version>.csv`.
//!
//! Everything except the journal is a pure function of the config.

mod config;
mod experiment;
mod report;

pub use config::{parse_config, parse_config_str, ExperimentConfig, DEFAULT_OUTPUT_DIR, DEFAULT_RUNS, OUTPUT_ENV};
pub use experiment::{cells, read_experiment, run_experiment, Cell, ExperimentOutcome};
pub use report::{report, ReportOutcome};

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Writes through a temporary sibling so readers never see a partial file.
pub(crate) fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
