use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::{PyDict, PyModule};

fn with_module(script: &str) {
    Python::initialize();
    Python::attach(|py| {
        let m = PyModule::new(py, "redist_de_py").unwrap();
        redist_de_py::register(&m).unwrap();
        let globals = PyDict::new(py);
        globals.set_item("rd", m).unwrap();
        let code = CString::new(script).unwrap();
        if let Err(e) = py.run(&code, Some(&globals), None) {
            panic!("{e}");
        }
    });
}

#[test]
fn formulas_through_python() {
    with_module(
        r#"
low, up = [-10.0, -10.0], [10.0, 10.0]
assert rd.population_center([[0.0, 1.0], [2.0, 3.0], [4.0, 9.0]], low, up) == [2.0, 3.0]
assert rd.opposite_vector([1.0, -4.0], low, up) == [-1.0, 4.0]
assert rd.lpsr_target_size(1000, 1000, 100, 4) == 4
p, d, m = rd.wilcoxon_rank_sum([1, 2, 3], [4, 5, 6])
assert abs(p - 0.1) < 1e-15 and d == "TIE" and m == "exact"
try:
    rd.diversity([], low, up)
    raise AssertionError("empty population accepted")
except ValueError:
    pass
"#,
    );
}

#[test]
fn objectives_and_runs() {
    with_module(
        r#"
f = rd.Objective("rastrigin", dim=4)
assert f([0.0] * 4) == 0.0 and f.evaluations == 1 and f.dim == 4
assert "comp_rastrigin_griewank" in rd.list_functions(dim=4)
rec = rd.run("IRV", function="sphere", dim=4, np=16, mfes=4000, seed=2, g_n=5, t_ir=0.05, t_div=0.5)
assert rec["mode"] == "IRV" and rec["evaluations"] <= 4016
n = [0]
def obj(x):
    n[0] += 1
    return sum(v * v for v in x)
rec = rd.run("CRV", objective=obj, low=[-3.0] * 2, up=[3.0] * 2, np=8, mfes=800, seed=4)
assert n[0] == rec["evaluations"]
try:
    rd.run("XV", function="sphere")
    raise AssertionError("bad mode accepted")
except ValueError:
    pass
"#,
    );
}
