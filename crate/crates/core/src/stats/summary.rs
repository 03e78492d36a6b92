use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::wilcoxon::{median, wilcoxon_rank_sum, Decision, Method, MIN_SAMPLE};
use crate::error::Result;
use crate::record::RunRecord;
use crate::restart::RunMode;

/// Final error of one completed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub function: String,
    pub mode: RunMode,
    /// Diversity threshold of an IRV run; `None` for the other modes.
    pub t_div: Option<f64>,
    pub final_error: f64,
}

/// The pairs compared, first element tested against the second.
pub const PAIRS: [(RunMode, RunMode); 3] = [
    (RunMode::CompleteRestart, RunMode::Original),
    (RunMode::Redistribution, RunMode::Original),
    (RunMode::Redistribution, RunMode::CompleteRestart),
];

pub fn pair_label(pair: (RunMode, RunMode)) -> String {
    format!("{} vs {}", pair.0, pair.1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonCell {
    pub function: String,
    pub pair: (RunMode, RunMode),
    pub decision: Decision,
    pub p_value: f64,
    pub method: Method,
    pub median_a: f64,
    pub median_b: f64,
}

/// Tests sample `a` against `b` for one function.
pub fn compare(function: &str, pair: (RunMode, RunMode), a: &[f64], b: &[f64], alpha: f64) -> Result<ComparisonCell> {
    let r = wilcoxon_rank_sum(a, b, alpha)?;
    Ok(ComparisonCell {
        function: function.to_string(),
        pair,
        decision: r.decision,
        p_value: r.p_value,
        method: r.method,
        median_a: median(a),
        median_b: median(b),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRatio {
    pub pair: (RunMode, RunMode),
    pub wins: usize,
    pub losses: usize,
}

impl PairRatio {
    /// `"wins:losses"`.
    pub fn ratio(&self) -> String {
        format!("{}:{}", self.wins, self.losses)
    }
}

/// The threshold chosen for IRV on one function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestThreshold {
    pub function: String,
    /// Used for pairing; the first in sweep order among equal medians.
    pub selected: f64,
    /// Every sweep position that reached the lowest median.
    pub best_positions: Vec<usize>,
}

/// What the analysis expects to find.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub functions: Vec<String>,
    pub modes: Vec<RunMode>,
    pub t_divs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub alpha: f64,
    pub t_divs: Vec<f64>,
    pub cells: Vec<ComparisonCell>,
    pub ratios: Vec<PairRatio>,
    pub thresholds: Vec<BestThreshold>,
    /// Per sweep position, how many functions had their best IRV median there.
    pub t_div_best_counts: Vec<usize>,
    pub gaps: Vec<String>,
}

fn errors_of<'a>(rows: &'a [ResultRow], function: &'a str, mode: RunMode, t_div: Option<f64>) -> Vec<f64> {
    rows.iter()
        .filter(|r| r.function == function && r.mode == mode && r.t_div == t_div)
        .map(|r| r.final_error)
        .collect()
}

/// Pairwise comparisons, win:loss ratios and the per-threshold best counts.
///
/// IRV enters the comparisons with its best threshold per function, chosen
/// by lowest median final error. Cells with fewer than three runs are listed
/// in `gaps` and left out.
pub fn summarize(rows: &[ResultRow], layout: &Layout, alpha: f64) -> Result<Summary> {
    let mut gaps = Vec::new();
    let mut thresholds = Vec::new();
    let mut t_div_best_counts = vec![0; layout.t_divs.len()];
    let mut cells = Vec::new();
    let has = |m: RunMode| layout.modes.contains(&m);

    for function in &layout.functions {
        let mut samples: Vec<(RunMode, Vec<f64>)> = Vec::new();
        for mode in [RunMode::Original, RunMode::CompleteRestart] {
            if !has(mode) {
                continue;
            }
            let s = errors_of(rows, function, mode, None);
            if s.len() < MIN_SAMPLE {
                gaps.push(format!("{function}/{mode}: {} runs, need {MIN_SAMPLE}", s.len()));
            } else {
                samples.push((mode, s));
            }
        }
        if has(RunMode::Redistribution) {
            let mut medians = Vec::new();
            for (k, &t) in layout.t_divs.iter().enumerate() {
                let s = errors_of(rows, function, RunMode::Redistribution, Some(t));
                if s.len() < MIN_SAMPLE {
                    gaps.push(format!("{function}/IRV@{t:e}: {} runs, need {MIN_SAMPLE}", s.len()));
                } else {
                    medians.push((k, median(&s), s));
                }
            }
            let lowest = medians.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
            let best_positions: Vec<usize> = medians.iter().filter(|m| m.1 == lowest).map(|m| m.0).collect();
            if let Some(&first) = best_positions.first() {
                for &k in &best_positions {
                    t_div_best_counts[k] += 1;
                }
                thresholds.push(BestThreshold {
                    function: function.clone(),
                    selected: layout.t_divs[first],
                    best_positions,
                });
                let s = medians.into_iter().find(|m| m.0 == first).expect("present").2;
                samples.push((RunMode::Redistribution, s));
            }
        }
        for pair in PAIRS {
            if !(has(pair.0) && has(pair.1)) {
                continue;
            }
            let a = samples.iter().find(|s| s.0 == pair.0);
            let b = samples.iter().find(|s| s.0 == pair.1);
            match (a, b) {
                (Some(a), Some(b)) => cells.push(compare(function, pair, &a.1, &b.1, alpha)?),
                _ => gaps.push(format!("{function}/{}: skipped, missing data", pair_label(pair))),
            }
        }
    }

    let ratios = PAIRS
        .iter()
        .filter(|p| has(p.0) && has(p.1))
        .map(|&pair| {
            let of = |d: Decision| cells.iter().filter(|c| c.pair == pair && c.decision == d).count();
            PairRatio {
                pair,
                wins: of(Decision::Win),
                losses: of(Decision::Loss),
            }
        })
        .collect();

    Ok(Summary {
        alpha,
        t_divs: layout.t_divs.clone(),
        cells,
        ratios,
        thresholds,
        t_div_best_counts,
        gaps,
    })
}

impl Summary {
    /// Best counts joined with `:` in sweep order, e.g. `"2:0:1:0:0:0:0"`.
    pub fn t_div_ratio(&self) -> String {
        self.t_div_best_counts.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(":")
    }

    pub fn ratio_of(&self, pair: (RunMode, RunMode)) -> Option<String> {
        self.ratios.iter().find(|r| r.pair == pair).map(PairRatio::ratio)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Win:loss of the first version against the second (rank-sum, alpha = {})", self.alpha);
        let _ = writeln!(out);
        if self.ratios.is_empty() {
            let _ = writeln!(out, "  (no version pairs to compare)");
        }
        for r in &self.ratios {
            let _ = writeln!(out, "  {:<12} {}", pair_label(r.pair), r.ratio());
        }
        if !self.cells.is_empty() {
            let _ = writeln!(out);
            let _ = writeln!(out, "Per-function decisions");
            let _ = writeln!(out);
            let _ = writeln!(
                out,
                "  {:<28} {:<12} {:<8} {:>12} {:>14} {:>14}  method",
                "function", "pair", "decision", "p", "median a", "median b"
            );
            for c in &self.cells {
                let _ = writeln!(
                    out,
                    "  {:<28} {:<12} {:<8} {:>12.4e} {:>14.6e} {:>14.6e}  {}",
                    c.function,
                    pair_label(c.pair),
                    c.decision,
                    c.p_value,
                    c.median_a,
                    c.median_b,
                    c.method
                );
            }
        }
        if !self.thresholds.is_empty() {
            let _ = writeln!(out);
            let header: Vec<String> = self.t_divs.iter().map(|t| format!("{t:e}")).collect();
            let _ = writeln!(out, "Functions with the best IRV result per T_DIV ({})", header.join(":"));
            let _ = writeln!(out);
            let _ = writeln!(out, "  {}", self.t_div_ratio());
            for t in &self.thresholds {
                let _ = writeln!(out, "  {:<28} selected T_DIV {:e}", t.function, t.selected);
            }
        }
        if !self.gaps.is_empty() {
            let _ = writeln!(out);
            let _ = writeln!(out, "Gaps");
            let _ = writeln!(out);
            for g in &self.gaps {
                let _ = writeln!(out, "  {g}");
            }
        }
        out
    }

    /// One line per comparison cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("function,pair,decision,p_value,method,median_a,median_b\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{:?},{},{:?},{:?}",
                c.function,
                pair_label(c.pair),
                c.decision,
                c.p_value,
                c.method,
                c.median_a,
                c.median_b
            );
        }
        out
    }
}

/// Mean best error of one (function, version) group on a fixed FES grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanTrace {
    pub function: String,
    pub version: String,
    pub runs: usize,
    /// (fes, mean best error)
    pub points: Vec<(u64, f64)>,
}

impl MeanTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fes,mean_best_error\n");
        for (fes, v) in &self.points {
            let _ = writeln!(out, "{fes},{v:?}");
        }
        out
    }
}

/// Grid: the end of the first generation, then every `mfes / 100` FES.
pub fn trace_grid(first_fes: u64, mfes: u64) -> Vec<u64> {
    let step = (mfes / 100).max(1);
    let mut grid = vec![first_fes];
    grid.extend((1..=100).map(|k| k * step).filter(|&f| f > first_fes));
    grid
}

/// Averages best-error traces per `(function, version)` group, groups in
/// order of first appearance.
pub fn best_error_trace_export<'a, I>(records: I, mfes: u64) -> Vec<MeanTrace>
where
    I: IntoIterator<Item = (&'a str, &'a str, &'a RunRecord)>,
{
    let mut groups: Vec<(&str, &str, Vec<&RunRecord>)> = Vec::new();
    for (function, version, record) in records {
        match groups.iter_mut().find(|g| g.0 == function && g.1 == version) {
            Some(g) => g.2.push(record),
            None => groups.push((function, version, vec![record])),
        }
    }
    groups
        .into_iter()
        .filter_map(|(function, version, runs)| {
            let first = runs.iter().filter_map(|r| r.samples.first().map(|s| s.fes)).max()?;
            let points = trace_grid(first, mfes)
                .into_iter()
                .filter_map(|fes| {
                    let values: Option<Vec<f64>> = runs.iter().map(|r| r.best_error_at(fes)).collect();
                    values.map(|v| (fes, v.iter().sum::<f64>() / v.len() as f64))
                })
                .collect();
            Some(MeanTrace {
                function: function.to_string(),
                version: version.to_string(),
                runs: runs.len(),
                points,
            })
        })
        .collect()
}
