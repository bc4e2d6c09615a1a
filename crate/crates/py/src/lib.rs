//! Python bindings: load configurations and scenarios, run trials, compare
//! and optimize configurations.

use std::collections::BTreeMap;
use std::path::PathBuf;

use cockpit_sim::experiment::{self, Execution, ExperimentError, NamedConfig, SearchSettings};
use cockpit_sim::metrics::{self, TimelineTrace};
use cockpit_sim::scenario::Scenario as CoreScenario;
use cockpit_sim::sim::{SimError, TrialOptions};
use cockpit_sim::task::{self, ConfigError, ConfigSources};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn config_err(e: ConfigError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn sim_err(e: SimError) -> PyErr {
    match e {
        SimError::Invalid(_) | SimError::Length(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn experiment_err(e: ExperimentError) -> PyErr {
    match e {
        ExperimentError::Config(c) => config_err(c),
        ExperimentError::Sim(s) => sim_err(s),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// A validated task list bound to its element catalog.
#[pyclass(frozen, skip_from_py_object, module = "cockpit_sim_py")]
#[derive(Clone)]
pub struct Configuration {
    inner: task::Configuration,
    warnings: Vec<String>,
}

#[pymethods]
impl Configuration {
    #[staticmethod]
    #[pyo3(signature = (tasks, elements, scale=None))]
    fn load(tasks: PathBuf, elements: PathBuf, scale: Option<PathBuf>) -> PyResult<Self> {
        let loaded = task::load_configuration(&tasks, &elements, scale.as_deref()).map_err(config_err)?;
        Ok(Self {
            inner: loaded.config,
            warnings: loaded.warnings,
        })
    }

    /// Same as `load` but from file contents.
    #[staticmethod]
    #[pyo3(signature = (tasks_csv, elements_toml, scale_toml=None))]
    fn parse(tasks_csv: &str, elements_toml: &str, scale_toml: Option<&str>) -> PyResult<Self> {
        let loaded = ConfigSources::new(tasks_csv, elements_toml, scale_toml)
            .load()
            .map_err(config_err)?;
        Ok(Self {
            inner: loaded.config,
            warnings: loaded.warnings,
        })
    }

    #[getter]
    fn task_names(&self) -> Vec<String> {
        self.inner.tasks.iter().map(|t| t.name.clone()).collect()
    }

    #[getter]
    fn element_names(&self) -> Vec<String> {
        self.inner.elements.iter().map(|e| e.name.clone()).collect()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.warnings.clone()
    }

    /// Task list in the loader's CSV format, workloads filled in.
    fn to_csv(&self) -> String {
        task::write_tasks_csv(&self.inner.tasks)
    }

    /// Violations of this configuration against a scenario; empty when runnable.
    fn check(&self, scenario: &Scenario) -> Vec<String> {
        scenario
            .inner
            .validate_against(&self.inner)
            .0
            .iter()
            .map(|v| v.to_string())
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.tasks.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Configuration({} tasks, {} elements)",
            self.inner.tasks.len(),
            self.inner.elements.len()
        )
    }
}

#[pyclass(frozen, skip_from_py_object, module = "cockpit_sim_py")]
#[derive(Clone)]
pub struct Scenario {
    inner: CoreScenario,
}

#[pymethods]
impl Scenario {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: CoreScenario::load(&path).map_err(config_err)?,
        })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: CoreScenario::parse(text, "scenario").map_err(config_err)?,
        })
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml()
    }
}

/// Indicators of one trial, in percent.
#[pyclass(frozen, module = "cockpit_sim_py")]
pub struct TrialMetrics {
    inner: metrics::TrialMetrics,
}

#[pymethods]
impl TrialMetrics {
    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn trial_length(&self) -> f64 {
        self.inner.trial_length
    }

    #[getter]
    fn eyes_off(&self) -> f64 {
        self.inner.eyes_off_fraction
    }

    #[getter]
    fn cognitive_overload(&self) -> f64 {
        self.inner.cognitive_overload_fraction
    }

    #[getter]
    fn perceptual_overload(&self) -> f64 {
        self.inner.perceptual_overload_fraction
    }

    #[getter]
    fn sa_average(&self) -> f64 {
        self.inner.sa_average
    }

    #[getter]
    fn time_in_level(&self) -> Vec<f64> {
        self.inner.time_in_level.to_vec()
    }

    #[getter]
    fn eyes_off_by_level(&self) -> Vec<f64> {
        self.inner.eyes_off_by_level.to_vec()
    }

    /// `{task: {"triggered": n, "executed": n, ...}}`
    #[getter]
    fn task_counts(&self) -> BTreeMap<String, BTreeMap<&'static str, u64>> {
        self.inner
            .per_task_counts
            .iter()
            .map(|(name, c)| {
                let row = BTreeMap::from([
                    ("triggered", c.triggered),
                    ("executed", c.executed),
                    ("queued", c.queued),
                    ("aborted", c.aborted),
                    ("coalesced", c.coalesced),
                ]);
                (name.clone(), row)
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "TrialMetrics(seed={}, eyes_off={:.3}, cognitive_overload={:.3}, perceptual_overload={:.3}, sa_average={:.3})",
            self.inner.seed,
            self.inner.eyes_off_fraction,
            self.inner.cognitive_overload_fraction,
            self.inner.perceptual_overload_fraction,
            self.inner.sa_average
        )
    }
}

fn indicators<'py>(py: Python<'py>, i: &metrics::Indicators) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("eyes_off", i.eyes_off)?;
    d.set_item("cognitive_overload", i.cognitive_overload)?;
    d.set_item("perceptual_overload", i.perceptual_overload)?;
    d.set_item("sa_average", i.sa_average)?;
    Ok(d)
}

/// Runs one trial.
#[pyfunction]
#[pyo3(signature = (config, scenario, seed=1, length=experiment::DEFAULT_TRIAL_LENGTH))]
fn run_trial(
    py: Python<'_>,
    config: &Configuration,
    scenario: &Scenario,
    seed: u64,
    length: f64,
) -> PyResult<TrialMetrics> {
    let (c, s) = (&config.inner, &scenario.inner);
    let m = py
        .detach(|| experiment::run_trial(c, s, seed, length))
        .map_err(sim_err)?;
    Ok(TrialMetrics { inner: m })
}

/// One trial per seed, in seed order.
#[pyfunction]
#[pyo3(signature = (config, scenario, seeds, length=experiment::DEFAULT_TRIAL_LENGTH))]
fn run_trials(
    py: Python<'_>,
    config: &Configuration,
    scenario: &Scenario,
    seeds: Vec<u64>,
    length: f64,
) -> PyResult<Vec<TrialMetrics>> {
    let (c, s) = (&config.inner, &scenario.inner);
    let result = py.detach(|| {
        let prepared = cockpit_sim::sim::Prepared::new(c, s)?;
        experiment::run_trials(&prepared, &seeds, length, Execution::Parallel)
    });
    Ok(result
        .map_err(sim_err)?
        .into_iter()
        .map(|m| TrialMetrics { inner: m })
        .collect())
}

/// The timeline trace of one trial as JSON lines.
#[pyfunction]
#[pyo3(signature = (config, scenario, seed=1, length=experiment::DEFAULT_TRIAL_LENGTH))]
fn export_trace(
    py: Python<'_>,
    config: &Configuration,
    scenario: &Scenario,
    seed: u64,
    length: f64,
) -> PyResult<String> {
    let (c, s) = (&config.inner, &scenario.inner);
    let options = TrialOptions {
        record_trace: true,
        record_events: false,
    };
    let r = py
        .detach(|| cockpit_sim::sim::simulate(c, s, seed, length, options))
        .map_err(sim_err)?;
    Ok(r.trace.map(|t| t.to_jsonl()).unwrap_or_default())
}

/// Rebuilds resource usage and indicators from a JSON-lines trace.
#[pyfunction]
fn replay<'py>(py: Python<'py>, trace: &str, config: &Configuration, length: f64) -> PyResult<Bound<'py, PyDict>> {
    let trace = TimelineTrace::from_jsonl(trace).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let r = metrics::replay(&trace, &config.inner, length);
    let d = PyDict::new(py);
    d.set_item("eyes_off_seconds", r.eyes_off_seconds)?;
    d.set_item("cognitive_overload_seconds", r.cognitive_overload_seconds)?;
    d.set_item("perceptual_overload_seconds", r.perceptual_overload_seconds)?;
    d.set_item("awareness_integral", r.awareness_integral)?;
    d.set_item("channel_collisions", r.channel_collisions)?;
    d.set_item("cap_violations", r.cap_violations)?;
    d.set_item("machine_queued", r.machine_queued)?;
    d.set_item("driver_aborted", r.driver_aborted)?;
    d.set_item("completed", r.completed)?;
    d.set_item("safe", r.is_safe())?;
    Ok(d)
}

/// Runs both configurations on the same seeds; returns median indicators of
/// each and per-seed deltas (`b - a`).
#[pyfunction]
#[pyo3(signature = (a, b, scenario, seeds, length=experiment::DEFAULT_TRIAL_LENGTH))]
fn compare<'py>(
    py: Python<'py>,
    a: &Configuration,
    b: &Configuration,
    scenario: &Scenario,
    seeds: Vec<u64>,
    length: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let a = NamedConfig {
        name: "a".into(),
        config: a.inner.clone(),
    };
    let b = NamedConfig {
        name: "b".into(),
        config: b.inner.clone(),
    };
    let s = &scenario.inner;
    let c = py
        .detach(|| experiment::compare(&a, &b, s, &seeds, length, Execution::Parallel))
        .map_err(experiment_err)?;
    let out = PyDict::new(py);
    out.set_item("a", indicators(py, &c.a.summary.median)?)?;
    out.set_item("b", indicators(py, &c.b.summary.median)?)?;
    let mut paired = Vec::with_capacity(c.paired.len());
    for p in &c.paired {
        let d = PyDict::new(py);
        d.set_item("seed", p.seed)?;
        d.set_item("eyes_off", p.eyes_off)?;
        d.set_item("cognitive_overload", p.cognitive_overload)?;
        d.set_item("perceptual_overload", p.perceptual_overload)?;
        d.set_item("sa_average", p.sa_average)?;
        paired.push(d);
    }
    out.set_item("paired", paired)?;
    Ok(out)
}

/// Local search over design moves. Returns the final configuration and the
/// accepted-move log as JSON.
#[pyfunction]
#[pyo3(signature = (config, scenario, seeds, length, sa_floor, budget, weights=(1.0, 1.0, 1.0)))]
#[allow(clippy::too_many_arguments)]
fn optimize(
    py: Python<'_>,
    config: &Configuration,
    scenario: &Scenario,
    seeds: Vec<u64>,
    length: f64,
    sa_floor: f64,
    budget: usize,
    weights: (f64, f64, f64),
) -> PyResult<(Configuration, String)> {
    let mut settings = SearchSettings::new(seeds, length, sa_floor, budget);
    settings.weights = [weights.0, weights.1, weights.2];
    let (c, s) = (&config.inner, &scenario.inner);
    let outcome = py
        .detach(|| experiment::local_search(c, s, &settings))
        .map_err(experiment_err)?;
    let log = outcome.log_json();
    Ok((
        Configuration {
            inner: outcome.config,
            warnings: Vec::new(),
        },
        log,
    ))
}

/// The bundled demo: `(base, optimized, scenario)`.
#[pyfunction]
fn demo() -> PyResult<(Configuration, Configuration, Scenario)> {
    let wrap = |c: task::Configuration| Configuration {
        inner: c,
        warnings: Vec::new(),
    };
    Ok((
        wrap(cockpit_sim::demo::base().map_err(config_err)?),
        wrap(cockpit_sim::demo::optimized().map_err(config_err)?),
        Scenario {
            inner: cockpit_sim::demo::scenario().map_err(config_err)?,
        },
    ))
}

#[pymodule]
pub fn cockpit_sim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Configuration>()?;
    m.add_class::<Scenario>()?;
    m.add_class::<TrialMetrics>()?;
    m.add_function(wrap_pyfunction!(run_trial, m)?)?;
    m.add_function(wrap_pyfunction!(run_trials, m)?)?;
    m.add_function(wrap_pyfunction!(export_trace, m)?)?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(demo, m)?)?;
    Ok(())
}
