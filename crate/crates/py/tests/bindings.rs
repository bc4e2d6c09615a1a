use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module(code: &str) {
    Python::initialize();
    Python::attach(|py| {
        let m = pyo3::wrap_pymodule!(cockpit_sim_py::cockpit_sim_py)(py);
        let globals = PyDict::new(py);
        globals.set_item("cs", m).unwrap();
        let code = CString::new(code).unwrap();
        if let Err(e) = py.run(&code, Some(&globals), None) {
            panic!("{e}");
        }
    });
}

#[test]
fn demo_trial_through_python() {
    with_module(
        r#"
base, optimized, scenario = cs.demo()
m = cs.run_trial(base, scenario, seed=3, length=1000.0)
assert 0.0 <= m.eyes_off <= 100.0, m
assert m.seed == 3 and len(m.time_in_level) == 5
assert repr(m) == repr(cs.run_trial(base, scenario, seed=3, length=1000.0))
"#,
    );
}

#[test]
fn errors_map_to_python_exceptions() {
    with_module(
        r#"
base, _, scenario = cs.demo()
try:
    cs.run_trial(base, scenario, length=-1.0)
    raise AssertionError("negative length accepted")
except ValueError as e:
    assert "trial length" in str(e)
try:
    cs.Configuration.parse("Name\nx\n", "")
    raise AssertionError("bad task list accepted")
except ValueError as e:
    assert "Priority" in str(e), str(e)
"#,
    );
}

#[test]
fn compare_identical_configurations() {
    with_module(
        r#"
base, _, scenario = cs.demo()
r = cs.compare(base, base, scenario, [1, 2], 500.0)
assert r["a"] == r["b"]
assert [d["seed"] for d in r["paired"]] == [1, 2]
assert all(d["cognitive_overload"] == 0.0 for d in r["paired"])
"#,
    );
}
