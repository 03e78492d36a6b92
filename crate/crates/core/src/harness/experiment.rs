use std::fmt::Write as _;
use std::fs::{self, File, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::report::{report, ReportOutcome};
use super::write_atomic;
use crate::benchmarks::{manifest_to_string, ObjectiveFunction};
use crate::error::{Error, Result};
use crate::record::RunRecord;
use crate::redistribution::RedistParams;
use crate::restart::{Driver, RunMode};
use crate::rng::derive_seed;

/// One run of the experiment grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub function: String,
    pub mode: RunMode,
    pub t_div: Option<f64>,
    pub run: u64,
}

impl Cell {
    /// `OV`, `CRV` or `IRV@<t_div>`.
    pub fn version(&self) -> String {
        match self.t_div {
            Some(t) => format!("{}@{t:e}", self.mode),
            None => self.mode.to_string(),
        }
    }

    pub fn key(&self) -> String {
        format!("{}/{}/{}", self.function, self.version(), self.run)
    }

    pub fn seed(&self, master_seed: u64) -> u64 {
        derive_seed(master_seed, &self.key())
    }

    fn stem(&self, root: &Path) -> PathBuf {
        root.join("runs")
            .join(&self.function)
            .join(self.version().replace('@', "_tdiv_"))
            .join(format!("run_{:03}", self.run))
    }

    pub fn record_path(&self, root: &Path) -> PathBuf {
        self.stem(root).with_extension("json")
    }

    pub fn trace_path(&self, root: &Path) -> PathBuf {
        self.stem(root).with_extension("trace.csv")
    }

    pub fn events_path(&self, root: &Path) -> PathBuf {
        self.stem(root).with_extension("events.csv")
    }
}

/// The full grid: function × mode × T_DIV (IRV only) × run, in config order.
pub fn cells(config: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for function in &config.functions {
        for &mode in &config.modes {
            for t_div in config.t_divs_for(mode) {
                for &run in &config.seeds {
                    out.push(Cell {
                        function: function.clone(),
                        mode,
                        t_div,
                        run,
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub ran: usize,
    pub skipped: usize,
    /// Cells that could not be completed, with the reason.
    pub failed: Vec<(String, String)>,
    pub report: ReportOutcome,
}

#[derive(Serialize, Deserialize)]
struct ExperimentFile {
    fingerprint: String,
    config: ExperimentConfig,
}

pub(crate) fn experiment_path(root: &Path) -> PathBuf {
    root.join("experiment.json")
}

/// Loads the config stored in an output directory.
pub fn read_experiment(root: &Path) -> Result<ExperimentConfig> {
    let path = experiment_path(root);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let file: ExperimentFile = serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.clone(),
        message: e.to_string(),
    })?;
    let mut config = file.config;
    config.output_dir = root.to_path_buf();
    Ok(config)
}

fn trace_csv(record: &RunRecord) -> String {
    let mut out = String::from("fes,best_error\n");
    for s in &record.samples {
        let _ = writeln!(out, "{},{:?}", s.fes, s.best_error);
    }
    out
}

fn events_csv(record: &RunRecord) -> String {
    let mut out = String::from("fes,event,diversity,np\n");
    for e in &record.events {
        let _ = writeln!(out, "{},{},{:?},{}", e.fes, e.kind, e.diversity, e.np);
    }
    out
}

/// A completed cell from this config, if one is on disk.
fn completed(cell: &Cell, root: &Path, fingerprint: &str) -> bool {
    let Ok(text) = fs::read_to_string(cell.record_path(root)) else {
        return false;
    };
    serde_json::from_str::<RunRecord>(&text).is_ok_and(|r| r.fingerprint == fingerprint)
        && cell.trace_path(root).exists()
        && cell.events_path(root).exists()
}

fn run_cell(config: &ExperimentConfig, objective: &ObjectiveFunction, cell: &Cell, fingerprint: &str) -> Result<RunRecord> {
    let params = RedistParams {
        t_div: cell.t_div.unwrap_or(config.redistribution.t_div),
        ..config.redistribution.clone()
    };
    let mut driver = Driver::new(
        cell.mode,
        config.engine.clone(),
        objective,
        params,
        config.mfes,
        cell.seed(config.master_seed),
    )?;
    if config.keep_lpsr_on_restart {
        driver = driver.keep_lpsr_on_restart();
    }
    driver.run_to_end()?;
    Ok(driver.finish(&cell.function, fingerprint))
}

fn persist(cell: &Cell, root: &Path, record: &RunRecord) -> Result<()> {
    write_atomic(&cell.trace_path(root), trace_csv(record).as_bytes())?;
    write_atomic(&cell.events_path(root), events_csv(record).as_bytes())?;
    let json = serde_json::to_string_pretty(record).expect("record serializes");
    // the record goes last: its presence marks the cell complete
    write_atomic(&cell.record_path(root), json.as_bytes())
}

struct Journal(Mutex<File>);

impl Journal {
    fn open(path: &Path) -> Result<Self> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(Self(Mutex::new(file)))
    }

    fn line(&self, text: &str) {
        let mut f = self.0.lock().unwrap_or_else(|p| p.into_inner());
        let _ = writeln!(f, "{text}");
    }
}

/// Runs every missing cell in parallel, then writes the report.
///
/// Cells already completed under the same config are skipped unless
/// `force` is set. A failing cell is logged and the rest still run.
pub fn run_experiment(config: &ExperimentConfig, force: bool) -> Result<ExperimentOutcome> {
    let root = config.output_dir.as_path();
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let fingerprint = config.fingerprint();
    let file = ExperimentFile {
        fingerprint: fingerprint.clone(),
        config: config.clone(),
    };
    write_atomic(
        &experiment_path(root),
        serde_json::to_string_pretty(&file).expect("config serializes").as_bytes(),
    )?;
    let suite = config.suite()?;
    let manifest = suite.manifest()?;
    let used: Vec<_> = manifest.into_iter().filter(|m| config.functions.contains(&m.name)).collect();
    write_atomic(&root.join("manifest.csv"), manifest_to_string(&used).as_bytes())?;
    let objectives: Vec<(String, ObjectiveFunction)> = config
        .functions
        .iter()
        .map(|f| suite.build(f).map(|o| (f.clone(), o)))
        .collect::<Result<_>>()?;

    let journal = Journal::open(&root.join("journal.log"))?;
    journal.line(&format!("experiment {fingerprint} start"));
    let grid = cells(config);
    let results: Vec<(String, std::result::Result<bool, String>)> = grid
        .par_iter()
        .map(|cell| {
            let key = cell.key();
            if !force && completed(cell, root, &fingerprint) {
                journal.line(&format!("cell {key} skipped"));
                return (key, Ok(false));
            }
            let objective = &objectives.iter().find(|(n, _)| *n == cell.function).expect("built").1;
            let outcome = run_cell(config, objective, cell, &fingerprint).and_then(|record| {
                persist(cell, root, &record)?;
                Ok(record)
            });
            match outcome {
                Ok(record) => {
                    match &record.failure {
                        Some(msg) => journal.line(&format!("cell {key} objective failed: {msg}")),
                        None => journal.line(&format!("cell {key} done in {:.3}s", record.wall_time_secs)),
                    }
                    (key, Ok(true))
                }
                Err(e) => {
                    journal.line(&format!("cell {key} failed: {e}"));
                    (key, Err(e.to_string()))
                }
            }
        })
        .collect();

    let mut outcome_failed = Vec::new();
    let (mut ran, mut skipped) = (0, 0);
    for (key, r) in results {
        match r {
            Ok(true) => ran += 1,
            Ok(false) => skipped += 1,
            Err(e) => outcome_failed.push((key, e)),
        }
    }
    journal.line(&format!(
        "experiment {fingerprint} end: {ran} ran, {skipped} skipped, {} failed",
        outcome_failed.len()
    ));
    let report = report(root)?;
    Ok(ExperimentOutcome {
        ran,
        skipped,
        failed: outcome_failed,
        report,
    })
}
