//! Python bindings for the `redist_de` crate.

use std::sync::Arc;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use redist_de::benchmarks::{Landscape, ObjectiveFunction, Suite};
use redist_de::{population, selftest, stats, variants, Bounds, EngineConfig, Error, Population, RedistParams, RunMode};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Objective { .. } => PyRuntimeError::new_err(e.to_string()),
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn population_of(genomes: Vec<Vec<f64>>, low: Vec<f64>, up: Vec<f64>) -> PyResult<Population> {
    let bounds = Bounds::new(low, up).map_err(to_py)?;
    Population::from_genomes(genomes, bounds).map_err(to_py)
}

/// Per-dimension median of the population.
#[pyfunction]
fn population_center(genomes: Vec<Vec<f64>>, low: Vec<f64>, up: Vec<f64>) -> PyResult<Vec<f64>> {
    population::population_center(&population_of(genomes, low, up)?).map_err(to_py)
}

/// Mean range-normalized L1 distance to the median center.
#[pyfunction]
fn diversity(genomes: Vec<Vec<f64>>, low: Vec<f64>, up: Vec<f64>) -> PyResult<f64> {
    population::diversity(&population_of(genomes, low, up)?).map_err(to_py)
}

#[pyfunction]
fn opposite_vector(x: Vec<f64>, low: Vec<f64>, up: Vec<f64>) -> PyResult<Vec<f64>> {
    let bounds = Bounds::new(low, up).map_err(to_py)?;
    population::opposite_vector(&x, &bounds).map_err(to_py)
}

#[pyfunction]
fn lpsr_target_size(fes: u64, mfes: u64, np_init: usize, np_min: usize) -> usize {
    variants::lpsr_target_size(fes, mfes, np_init, np_min)
}

/// Returns `(p_value, decision, method)` with decision `"WIN"`, `"LOSS"` or `"TIE"` for `a`.
#[pyfunction]
#[pyo3(signature = (a, b, alpha = 0.05))]
fn wilcoxon_rank_sum(a: Vec<f64>, b: Vec<f64>, alpha: f64) -> PyResult<(f64, String, String)> {
    let r = stats::wilcoxon_rank_sum(&a, &b, alpha).map_err(to_py)?;
    Ok((r.p_value, r.decision.to_string(), r.method.to_string()))
}

#[pyfunction]
#[pyo3(signature = (dim = 10, seed = Suite::DEFAULT_SEED))]
fn list_functions(dim: usize, seed: u64) -> PyResult<Vec<String>> {
    let suite = Suite::new(dim, seed).map_err(to_py)?;
    Ok(suite.names().map(str::to_string).collect())
}

/// `(name, passed)` for every built-in formula check.
#[pyfunction]
#[pyo3(signature = (instances = 200, seed = 1))]
fn run_selftest(instances: usize, seed: u64) -> Vec<(String, bool)> {
    selftest::run_all(instances, seed)
        .into_iter()
        .map(|c| (c.name.to_string(), c.passed()))
        .collect()
}

/// A benchmark function from the built-in suite.
#[pyclass(name = "Objective")]
struct PyObjective {
    inner: ObjectiveFunction,
}

#[pymethods]
impl PyObjective {
    #[new]
    #[pyo3(signature = (name, dim = 10, seed = Suite::DEFAULT_SEED))]
    fn new(name: &str, dim: usize, seed: u64) -> PyResult<Self> {
        let suite = Suite::new(dim, seed).map_err(to_py)?;
        Ok(Self {
            inner: suite.build(name).map_err(to_py)?,
        })
    }

    fn __call__(&mut self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.evaluate(&x).map_err(to_py)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.bounds().dim()
    }

    #[getter]
    fn f_star(&self) -> f64 {
        self.inner.f_star()
    }

    #[getter]
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let b = self.inner.bounds();
        (b.low().to_vec(), b.up().to_vec())
    }

    #[getter]
    fn evaluations(&self) -> u64 {
        self.inner.evaluations()
    }
}

/// A Python callable as an objective.
#[derive(Debug)]
struct PyLandscape(Py<PyAny>);

impl Landscape for PyLandscape {
    fn value(&self, x: &[f64]) -> Result<f64, String> {
        Python::attach(|py| {
            self.0
                .call1(py, (x.to_vec(),))
                .and_then(|v| v.bind(py).extract::<f64>())
                .map_err(|e| e.to_string())
        })
    }
}

/// Runs one version (`"OV"`, `"CRV"` or `"IRV"`) and returns the run record as a dict.
///
/// The objective is either a suite function named by `function` or a Python
/// callable passed as `objective` together with `low` and `up`.
#[pyfunction]
#[pyo3(signature = (
    mode, function = None, dim = 10, objective = None, low = None, up = None, f_star = 0.0,
    engine = "classic", np = 100, np_min = None, mfes = 100_000, seed = 0,
    g_n = 500, t_ir = 1e-5, t_div = 0.1, t_gen = 1000, r = 0.9, reset_adaptive = false,
    suite_seed = Suite::DEFAULT_SEED,
))]
#[allow(clippy::too_many_arguments)]
fn run<'py>(
    py: Python<'py>,
    mode: &str,
    function: Option<&str>,
    dim: usize,
    objective: Option<Py<PyAny>>,
    low: Option<Vec<f64>>,
    up: Option<Vec<f64>>,
    f_star: f64,
    engine: &str,
    np: usize,
    np_min: Option<usize>,
    mfes: u64,
    seed: u64,
    g_n: u64,
    t_ir: f64,
    t_div: f64,
    t_gen: u64,
    r: f64,
    reset_adaptive: bool,
    suite_seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let mode: RunMode = mode.parse().map_err(to_py)?;
    let obj = match (function, objective) {
        (Some(name), None) => Suite::new(dim, suite_seed).and_then(|s| s.build(name)).map_err(to_py)?,
        (None, Some(callable)) => {
            let (Some(low), Some(up)) = (low, up) else {
                return Err(PyValueError::new_err("a callable objective needs `low` and `up`"));
            };
            let bounds = Bounds::new(low, up).map_err(to_py)?;
            ObjectiveFunction::new("python", bounds, f_star, None, Arc::new(PyLandscape(callable))).map_err(to_py)?
        }
        _ => return Err(PyValueError::new_err("pass exactly one of `function` and `objective`")),
    };
    let mut config = match engine {
        "classic" => EngineConfig::classic(np),
        "adaptive" => EngineConfig::adaptive(np),
        other => return Err(PyValueError::new_err(format!("unknown engine `{other}`"))),
    };
    config.np_min = np_min;
    let params = RedistParams {
        g_n,
        t_ir,
        t_div,
        t_gen,
        r,
        reset_adaptive,
    };
    let record = redist_de::restart::run(mode, config, &obj, params, mfes, seed).map_err(to_py)?;

    let out = PyDict::new(py);
    out.set_item("function", &record.function)?;
    out.set_item("mode", &record.mode)?;
    out.set_item("seed", record.seed)?;
    out.set_item("final_best_error", record.final_best_error)?;
    out.set_item("best_fitness", record.best_fitness)?;
    out.set_item("evaluations", record.evaluations)?;
    out.set_item("failure", record.failure.clone())?;
    let samples: Vec<(u64, f64)> = record.samples.iter().map(|s| (s.fes, s.best_error)).collect();
    out.set_item("samples", samples)?;
    let events: Vec<(u64, String, f64, usize)> = record
        .events
        .iter()
        .map(|e| (e.fes, e.kind.to_string(), e.diversity, e.np))
        .collect();
    out.set_item("events", events)?;
    Ok(out)
}

/// Adds every function and class to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(population_center, m)?)?;
    m.add_function(wrap_pyfunction!(diversity, m)?)?;
    m.add_function(wrap_pyfunction!(opposite_vector, m)?)?;
    m.add_function(wrap_pyfunction!(lpsr_target_size, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon_rank_sum, m)?)?;
    m.add_function(wrap_pyfunction!(list_functions, m)?)?;
    m.add_function(wrap_pyfunction!(run_selftest, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_class::<PyObjective>()?;
    Ok(())
}

#[pymodule]
fn redist_de_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
