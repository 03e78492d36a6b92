use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::benchmarks::Suite;
use crate::error::{Error, Result};
use crate::redistribution::RedistParams;
use crate::restart::RunMode;
use crate::variants::{CrossoverKind, EngineConfig};

/// Environment variable naming the output directory when the config has none.
pub const OUTPUT_ENV: &str = "REDIST_DE_OUTPUT";
pub const DEFAULT_OUTPUT_DIR: &str = "redist-de-output";
pub const DEFAULT_RUNS: u64 = 25;
pub const DEFAULT_NP: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub functions: Vec<String>,
    pub modes: Vec<RunMode>,
    pub dim: usize,
    pub mfes: u64,
    /// Run identifiers; each cell seed is derived from the master seed and the cell key.
    pub seeds: Vec<u64>,
    pub master_seed: u64,
    pub suite_seed: u64,
    pub alpha: f64,
    pub engine: EngineConfig,
    /// `t_div` here is a placeholder; IRV cells take theirs from `t_divs`.
    pub redistribution: RedistParams,
    pub t_divs: Vec<f64>,
    pub keep_lpsr_on_restart: bool,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Hash of everything that affects results (the output directory excluded).
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn suite(&self) -> Result<Suite> {
        Suite::new(self.dim, self.suite_seed)
    }

    /// Sweep values that apply to `mode`: the T_DIV list for IRV, a single `None` otherwise.
    pub fn t_divs_for(&self, mode: RunMode) -> Vec<Option<f64>> {
        if mode == RunMode::Redistribution {
            self.t_divs.iter().copied().map(Some).collect()
        } else {
            vec![None]
        }
    }
}

struct Reader {
    errors: Vec<String>,
}

const SECTIONS: [&str; 3] = ["experiment", "engine", "redistribution"];
const EXPERIMENT_KEYS: [&str; 10] = [
    "functions",
    "modes",
    "dim",
    "mfes",
    "seeds",
    "master_seed",
    "suite_seed",
    "alpha",
    "output_dir",
    "keep_lpsr_on_restart",
];
const ENGINE_KEYS: [&str; 7] = ["kind", "np", "np_min", "f", "cr", "crossover", "p"];
const REDIST_KEYS: [&str; 6] = ["g_n", "t_ir", "t_div", "t_gen", "r", "reset_adaptive"];
const REQUIRED: [&str; 4] = ["functions", "modes", "dim", "mfes"];

impl Reader {
    fn section<'a>(&mut self, root: &'a Table, name: &str, allowed: &[&str]) -> Option<&'a Table> {
        let table = match root.get(name) {
            None => return None,
            Some(Value::Table(t)) => t,
            Some(_) => {
                self.errors.push(format!("[{name}] must be a table"));
                return None;
            }
        };
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                self.errors.push(format!("unknown key `{name}.{key}`"));
            }
        }
        Some(table)
    }

    fn uint(&mut self, t: Option<&Table>, sec: &str, key: &str) -> Option<u64> {
        match t?.get(key)? {
            Value::Integer(i) if *i >= 0 => Some(*i as u64),
            // large values such as 2e5 written as floats
            Value::Float(f) if *f >= 0.0 && f.fract() == 0.0 && *f < 9.0e15 => Some(*f as u64),
            v => {
                self.errors.push(format!("`{sec}.{key}` must be a non-negative integer, got {v}"));
                None
            }
        }
    }

    fn float(&mut self, t: Option<&Table>, sec: &str, key: &str) -> Option<f64> {
        match t?.get(key)? {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            v => {
                self.errors.push(format!("`{sec}.{key}` must be a number, got {v}"));
                None
            }
        }
    }

    fn boolean(&mut self, t: Option<&Table>, sec: &str, key: &str) -> Option<bool> {
        match t?.get(key)? {
            Value::Boolean(b) => Some(*b),
            v => {
                self.errors.push(format!("`{sec}.{key}` must be a boolean, got {v}"));
                None
            }
        }
    }

    fn string(&mut self, t: Option<&Table>, sec: &str, key: &str) -> Option<String> {
        match t?.get(key)? {
            Value::String(s) => Some(s.clone()),
            v => {
                self.errors.push(format!("`{sec}.{key}` must be a string, got {v}"));
                None
            }
        }
    }

    fn strings(&mut self, t: Option<&Table>, sec: &str, key: &str) -> Option<Vec<String>> {
        let items = match t?.get(key)? {
            Value::Array(a) => a,
            v => {
                self.errors.push(format!("`{sec}.{key}` must be an array of strings, got {v}"));
                return None;
            }
        };
        let mut out = Vec::new();
        for v in items {
            match v {
                Value::String(s) => out.push(s.clone()),
                other => self.errors.push(format!("`{sec}.{key}` entry {other} is not a string")),
            }
        }
        Some(out)
    }

    fn floats(&mut self, t: Option<&Table>, sec: &str, key: &str) -> Option<Vec<f64>> {
        let items = match t?.get(key)? {
            Value::Array(a) => a,
            v => {
                self.errors.push(format!("`{sec}.{key}` must be an array of numbers, got {v}"));
                return None;
            }
        };
        let mut out = Vec::new();
        for v in items {
            match v {
                Value::Float(f) => out.push(*f),
                Value::Integer(i) => out.push(*i as f64),
                other => self.errors.push(format!("`{sec}.{key}` entry {other} is not a number")),
            }
        }
        Some(out)
    }

    /// `seeds = 25` (run ids 0..25) or an explicit array of run ids.
    fn seeds(&mut self, t: Option<&Table>) -> Option<Vec<u64>> {
        match t?.get("seeds")? {
            Value::Integer(n) if *n > 0 => Some((0..*n as u64).collect()),
            Value::Array(a) => {
                let mut out = Vec::new();
                for v in a {
                    match v {
                        Value::Integer(i) if *i >= 0 => out.push(*i as u64),
                        other => self.errors.push(format!("`experiment.seeds` entry {other} is not a non-negative integer")),
                    }
                }
                Some(out)
            }
            v => {
                self.errors.push(format!("`experiment.seeds` must be a positive count or an array of run ids, got {v}"));
                None
            }
        }
    }
}

/// Parses and validates a config, reporting every problem at once.
///
/// `default_output` applies when the file names no output directory.
pub fn parse_config_str(text: &str, default_output: Option<&Path>) -> Result<ExperimentConfig> {
    let root: Table = toml::from_str(text).map_err(|e| Error::InvalidConfig(vec![format!("not valid TOML: {e}")]))?;
    let mut r = Reader { errors: Vec::new() };
    for key in root.keys() {
        if !SECTIONS.contains(&key.as_str()) {
            r.errors.push(format!("unknown key `{key}`"));
        }
    }
    let exp = r.section(&root, "experiment", &EXPERIMENT_KEYS);
    let eng = r.section(&root, "engine", &ENGINE_KEYS);
    let red = r.section(&root, "redistribution", &REDIST_KEYS);

    for key in REQUIRED {
        if exp.is_none_or(|t| !t.contains_key(key)) {
            r.errors.push(format!("missing required key `experiment.{key}`"));
        }
    }

    let functions = r.strings(exp, "experiment", "functions").unwrap_or_default();
    let mode_names = r.strings(exp, "experiment", "modes").unwrap_or_default();
    let dim = r.uint(exp, "experiment", "dim");
    let mfes = r.uint(exp, "experiment", "mfes");
    let seeds = r.seeds(exp).unwrap_or_else(|| (0..DEFAULT_RUNS).collect());
    let master_seed = r.uint(exp, "experiment", "master_seed").unwrap_or(0);
    let suite_seed = r.uint(exp, "experiment", "suite_seed").unwrap_or(Suite::DEFAULT_SEED);
    let alpha = r.float(exp, "experiment", "alpha").unwrap_or(0.05);
    let keep_lpsr_on_restart = r.boolean(exp, "experiment", "keep_lpsr_on_restart").unwrap_or(false);
    let output_dir = r
        .string(exp, "experiment", "output_dir")
        .map(PathBuf::from)
        .or_else(|| default_output.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));

    let mut modes = Vec::new();
    for name in &mode_names {
        match name.parse::<RunMode>() {
            Ok(m) if modes.contains(&m) => r.errors.push(format!("mode {m} listed twice")),
            Ok(m) => modes.push(m),
            Err(e) => r.errors.push(e.to_string()),
        }
    }
    if exp.is_some_and(|t| t.contains_key("modes")) && mode_names.is_empty() {
        r.errors.push("`experiment.modes` is empty".into());
    }
    if exp.is_some_and(|t| t.contains_key("functions")) && functions.is_empty() {
        r.errors.push("`experiment.functions` is empty".into());
    }
    if let Some(d) = dim {
        match Suite::new(d as usize, suite_seed) {
            Ok(suite) => {
                let known: BTreeSet<&str> = suite.names().collect();
                for f in &functions {
                    if !known.contains(f.as_str()) {
                        r.errors.push(format!("unknown function `{f}`"));
                    }
                }
            }
            Err(e) => r.errors.push(e.to_string()),
        }
    }
    let mut seen = BTreeSet::new();
    for f in &functions {
        if !seen.insert(f) {
            r.errors.push(format!("function `{f}` listed twice"));
        }
    }
    if mfes == Some(0) {
        r.errors.push("`experiment.mfes` must be positive".into());
    }
    if seeds.is_empty() {
        r.errors.push("`experiment.seeds` is empty".into());
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        r.errors.push(format!("`experiment.alpha` = {alpha} outside (0, 1)"));
    }

    let kind = r.string(eng, "engine", "kind").unwrap_or_else(|| "classic".into());
    let np = r.uint(eng, "engine", "np").unwrap_or(DEFAULT_NP as u64) as usize;
    let mut engine = match kind.as_str() {
        "classic" => EngineConfig::classic(np),
        "adaptive" => EngineConfig::adaptive(np),
        other => {
            r.errors.push(format!("unknown engine kind `{other}` (expected classic or adaptive)"));
            EngineConfig::classic(np)
        }
    };
    if let Some(min) = r.uint(eng, "engine", "np_min") {
        engine.np_min = Some(min as usize);
    }
    if let Some(f) = r.float(eng, "engine", "f") {
        engine.f = f;
    }
    if let Some(cr) = r.float(eng, "engine", "cr") {
        engine.cr = cr;
    }
    if let Some(p) = r.float(eng, "engine", "p") {
        engine.p = p;
    }
    match r.string(eng, "engine", "crossover").as_deref() {
        None | Some("binomial") => {}
        Some("exponential") => engine.crossover = CrossoverKind::Exponential,
        Some(other) => r.errors.push(format!("unknown crossover `{other}`")),
    }
    if let Err(e) = engine.validate() {
        r.errors.push(format!("engine: {e}"));
    }

    let mut redistribution = RedistParams::default();
    if let Some(v) = r.uint(red, "redistribution", "g_n") {
        redistribution.g_n = v;
    }
    if let Some(v) = r.float(red, "redistribution", "t_ir") {
        redistribution.t_ir = v;
    }
    if let Some(v) = r.uint(red, "redistribution", "t_gen") {
        redistribution.t_gen = v;
    }
    if let Some(v) = r.float(red, "redistribution", "r") {
        redistribution.r = v;
    }
    if let Some(v) = r.boolean(red, "redistribution", "reset_adaptive") {
        redistribution.reset_adaptive = v;
    }
    let t_divs = match r.floats(red, "redistribution", "t_div") {
        Some(v) if v.is_empty() && modes.contains(&RunMode::Redistribution) => {
            r.errors.push("`redistribution.t_div` is empty while IRV is selected".into());
            v
        }
        Some(v) => v,
        None => RedistParams::T_DIV_SWEEP.to_vec(),
    };
    for &t in &t_divs {
        let trial = RedistParams { t_div: t, ..redistribution.clone() };
        if let Err(e) = trial.validate() {
            r.errors.push(format!("redistribution: {e}"));
            break;
        }
    }
    if t_divs.is_empty() {
        if let Err(e) = redistribution.validate() {
            r.errors.push(format!("redistribution: {e}"));
        }
    }
    let mut uniq = t_divs.clone();
    uniq.sort_by(f64::total_cmp);
    uniq.dedup();
    if uniq.len() != t_divs.len() {
        r.errors.push("`redistribution.t_div` has repeated values".into());
    }

    if !r.errors.is_empty() {
        return Err(Error::InvalidConfig(r.errors));
    }
    Ok(ExperimentConfig {
        functions,
        modes,
        dim: dim.expect("checked") as usize,
        mfes: mfes.expect("checked"),
        seeds,
        master_seed,
        suite_seed,
        alpha,
        engine,
        redistribution,
        t_divs,
        keep_lpsr_on_restart,
        output_dir,
    })
}

/// Reads a config file; the output directory defaults to `$REDIST_DE_OUTPUT`.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let env_dir = std::env::var_os(OUTPUT_ENV).map(PathBuf::from);
    parse_config_str(&text, env_dir.as_deref())
}
