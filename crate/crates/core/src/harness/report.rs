use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::experiment::{cells, read_experiment, Cell};
use super::write_atomic;
use crate::error::{Error, Result};
use crate::record::RunRecord;
use crate::stats::{best_error_trace_export, pair_label, summarize, Layout, ResultRow, Summary};

#[derive(Debug, Clone)]
pub struct ReportOutcome {
    pub summary: Summary,
    pub completed_cells: usize,
    pub expected_cells: usize,
    pub trace_files: usize,
}

fn load(cell: &Cell, root: &Path) -> Result<Option<RunRecord>> {
    let path = cell.record_path(root);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(Error::io(&path, e)),
    };
    serde_json::from_str(&text).map(Some).map_err(|e| Error::Format {
        path,
        message: e.to_string(),
    })
}

/// Builds the summary tables and mean traces from whatever cells are on disk.
///
/// Missing, stale or failed cells are listed under the summary's gaps.
pub fn report(root: &Path) -> Result<ReportOutcome> {
    let config = read_experiment(root)?;
    let fingerprint = config.fingerprint();
    let grid = cells(&config);
    let mut gaps = Vec::new();
    let mut loaded: Vec<(Cell, RunRecord)> = Vec::new();
    for cell in &grid {
        match load(cell, root)? {
            None => gaps.push(format!("{}: missing", cell.key())),
            Some(r) if r.fingerprint != fingerprint => gaps.push(format!("{}: from a different config", cell.key())),
            Some(r) if r.failure.is_some() => {
                gaps.push(format!("{}: failed ({})", cell.key(), r.failure.as_deref().unwrap_or("")))
            }
            Some(r) => loaded.push((cell.clone(), r)),
        }
    }

    let rows: Vec<ResultRow> = loaded
        .iter()
        .map(|(cell, r)| ResultRow {
            function: cell.function.clone(),
            mode: cell.mode,
            t_div: cell.t_div,
            final_error: r.final_best_error,
        })
        .collect();
    let layout = Layout {
        functions: config.functions.clone(),
        modes: config.modes.clone(),
        t_divs: config.t_divs.clone(),
    };
    let mut summary = summarize(&rows, &layout, config.alpha)?;
    gaps.append(&mut summary.gaps);
    summary.gaps = gaps;

    write_atomic(&root.join("summary.txt"), summary.to_text().as_bytes())?;
    write_atomic(&root.join("summary.csv"), summary.to_csv().as_bytes())?;

    let mut ratios = String::from("pair,wins,losses,ratio\n");
    for r in &summary.ratios {
        let _ = writeln!(ratios, "{},{},{},{}", pair_label(r.pair), r.wins, r.losses, r.ratio());
    }
    write_atomic(&root.join("ratios.csv"), ratios.as_bytes())?;

    let mut best = String::from("t_div,functions_best\n");
    for (t, c) in summary.t_divs.iter().zip(&summary.t_div_best_counts) {
        let _ = writeln!(best, "{t:e},{c}");
    }
    let _ = writeln!(best, "ratio,{}", summary.t_div_ratio());
    write_atomic(&root.join("t_div_best.csv"), best.as_bytes())?;

    let mut finals = String::from("function,version,run,seed,final_best_error,evaluations\n");
    for (cell, r) in &loaded {
        let _ = writeln!(
            finals,
            "{},{},{},{},{:?},{}",
            cell.function,
            cell.version(),
            cell.run,
            r.seed,
            r.final_best_error,
            r.evaluations
        );
    }
    write_atomic(&root.join("final_errors.csv"), finals.as_bytes())?;

    let versions: Vec<(String, String)> = loaded.iter().map(|(c, _)| (c.function.clone(), c.version())).collect();
    let traces = best_error_trace_export(
        versions.iter().zip(&loaded).map(|((f, v), (_, r))| (f.as_str(), v.as_str(), r)),
        config.mfes,
    );
    for t in &traces {
        let name = format!("{}__{}.csv", t.function, t.version);
        write_atomic(&root.join("traces").join(name), t.to_csv().as_bytes())?;
    }

    Ok(ReportOutcome {
        summary,
        completed_cells: loaded.len(),
        expected_cells: grid.len(),
        trace_files: traces.len(),
    })
}
