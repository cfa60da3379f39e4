//! Python bindings: rating functions, ingestion, linting, trend scoring and
//! fixture generation. Structured results cross the boundary as JSON text
//! or as plain dicts decoded from it.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use sprintlint as core;
use core::engine::rating;
use core::fixtures::{self, FixtureHeader, FixtureSpec, InjectionSpec, Ledger};
use core::report::LintOptions;
use core::time::Timestamp;
use core::{MetricConfig, ProjectHistory};

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn config_from(json: Option<&str>) -> PyResult<MetricConfig> {
    json.map_or_else(|| Ok(MetricConfig::default()), |text| MetricConfig::from_json(text).map_err(value_error))
}

fn timestamp(text: Option<&str>) -> PyResult<Option<Timestamp>> {
    text.map(Timestamp::parse).transpose().map_err(value_error)
}

fn to_py<'py>(py: Python<'py>, json: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (json,))
}

/// `max(0, 100 - x * weight)`
#[pyfunction]
fn threshold_linear(x: f64, weight: f64) -> f64 {
    rating::threshold_linear(x, weight).value()
}

/// `max(0, 100 - violations / total * 100 * extra_factor * weight)`; raises
/// ValueError when `total` is zero.
#[pyfunction]
#[pyo3(signature = (violations, total, weight, extra_factor = 1.0))]
fn ratio_linear(violations: f64, total: f64, weight: f64, extra_factor: f64) -> PyResult<f64> {
    rating::ratio_linear(violations, total, weight, extra_factor).map(|s| s.value()).map_err(value_error)
}

/// `min(100, x * weight)`
#[pyfunction]
fn capped_linear(x: f64, weight: f64) -> f64 {
    rating::capped_linear(x, weight).value()
}

/// `clamp(0, 100, weight_a * quota - weight_b * quota^2)`
#[pyfunction]
fn cutoff_parabola(quota: f64, weight_a: f64, weight_b: f64) -> f64 {
    rating::cutoff_parabola(quota, weight_a, weight_b).value()
}

/// Markdown task-list items in an issue body.
#[pyfunction]
fn count_checkboxes(body: &str) -> usize {
    core::ingest::count_checkboxes(body)
}

/// Registered metric names in registration order.
#[pyfunction]
fn metric_names() -> Vec<&'static str> {
    core::MetricRegistry::standard().iter().map(|m| m.descriptor.name).collect()
}

/// The default metric config as canonical JSON.
#[pyfunction]
fn default_config() -> String {
    MetricConfig::default().canonical_json()
}

/// A validated project history.
#[pyclass(frozen, name = "Project", module = "sprintlint")]
struct Project {
    history: ProjectHistory,
}

#[pymethods]
impl Project {
    /// Loads a snapshot file or a directory of exported files.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Project { history: core::ingest::load_project(path).map_err(value_error)? })
    }

    #[staticmethod]
    fn from_snapshot(json: &str) -> PyResult<Self> {
        Ok(Project { history: core::ingest::parse_snapshot(json).map_err(value_error)? })
    }

    /// The sample history with one past-due sprint holding two open stories.
    #[staticmethod]
    fn unfinished_example() -> PyResult<Self> {
        Ok(Project { history: core::build_history(fixtures::unfinished_example()).map_err(value_error)? })
    }

    fn snapshot(&self) -> String {
        core::ingest::snapshot_json(&self.history)
    }

    /// Record counts per kind.
    fn counts(&self) -> Vec<(&'static str, usize)> {
        let h = &self.history;
        vec![
            ("commits", h.commits().len()),
            ("stories", h.stories().len()),
            ("sprints", h.sprints().len()),
            ("pulls", h.pulls().len()),
            ("build_stats", h.build_stats().len()),
        ]
    }

    /// `(team, sprint id, title)` for every sprint.
    fn sprints(&self) -> Vec<(String, String, String)> {
        self.history.sprints().iter().map(|s| (s.team.0.clone(), s.id.0.clone(), s.title.clone())).collect()
    }

    /// The run report as JSON (default) or Markdown text.
    #[pyo3(signature = (config = None, sprint = None, now = None, format = "json"))]
    fn lint(&self, config: Option<&str>, sprint: Option<String>, now: Option<&str>, format: &str) -> PyResult<String> {
        let config = config_from(config)?;
        let options = LintOptions { sprint_title: sprint, now: timestamp(now)? };
        let report = core::lint(&self.history, &config, &options).map_err(value_error)?;
        match format {
            "json" => Ok(report.to_json()),
            "markdown" => Ok(report.to_markdown()),
            other => Err(value_error(format!("unknown format '{other}'"))),
        }
    }

    /// Open stories of a past-due sprint as a dict, or None while it runs.
    #[pyo3(signature = (sprint_id, now = None))]
    fn unfinished_stories<'py>(&self, py: Python<'py>, sprint_id: &str, now: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
        let now = match timestamp(now)? {
            Some(t) => t,
            None => self.history.latest_timestamp().ok_or_else(|| value_error("history is empty"))?,
        };
        let row = core::catalog::unfinished_stories(&self.history, &sprint_id.into(), now).map_err(value_error)?;
        to_py(py, &serde_json::to_string(&row).map_err(value_error)?)
    }

    /// Per-sprint scores of every metric plus the overall score as CSV.
    #[pyo3(signature = (config = None))]
    fn trend_csv(&self, config: Option<&str>) -> PyResult<String> {
        let config = config_from(config)?;
        let results = core::run_all(&self.history, &config);
        let scores = core::scoring::score_all(&self.history, &results, &config).map_err(value_error)?;
        Ok(core::scoring::trend_csv_string(&core::scoring::trend(&self.history, &results, &scores)))
    }

    fn __repr__(&self) -> String {
        let h = &self.history;
        format!(
            "Project(commits={}, stories={}, sprints={}, pulls={})",
            h.commits().len(),
            h.stories().len(),
            h.sprints().len(),
            h.pulls().len()
        )
    }
}

/// Generates a seeded history, plants the injected violations and returns
/// the project with its ledger as a dict. Writes the fixture files when
/// `out_dir` is given.
#[pyfunction]
#[pyo3(signature = (spec = None, inject = None, seed = None, out_dir = None))]
fn generate<'py>(
    py: Python<'py>,
    spec: Option<&str>,
    inject: Option<&str>,
    seed: Option<u64>,
    out_dir: Option<&str>,
) -> PyResult<(Project, Bound<'py, PyAny>)> {
    let mut spec = spec.map_or_else(|| Ok(FixtureSpec::default()), FixtureSpec::from_json).map_err(value_error)?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let injection = inject.map(InjectionSpec::from_json).transpose().map_err(value_error)?;
    let fixture = fixtures::generate(&spec).map_err(value_error)?;
    let mut header = FixtureHeader::new(&spec, &fixture.certificate);
    let (history, ledger) = match injection {
        Some(injection) => {
            let out = fixtures::inject(&fixture.history, &injection, spec.seed).map_err(value_error)?;
            header.injection = Some(injection);
            header.injection_seed = Some(spec.seed);
            out
        }
        None => (fixture.history, Ledger::default()),
    };
    if let Some(dir) = out_dir {
        fixtures::write_fixture(dir, &history, &header, Some(&ledger)).map_err(value_error)?;
    }
    let ledger = to_py(py, &serde_json::to_string(&ledger).map_err(value_error)?)?;
    Ok((Project { history }, ledger))
}

#[pymodule]
#[pyo3(name = "sprintlint")]
fn sprintlint_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(threshold_linear, m)?)?;
    m.add_function(wrap_pyfunction!(ratio_linear, m)?)?;
    m.add_function(wrap_pyfunction!(capped_linear, m)?)?;
    m.add_function(wrap_pyfunction!(cutoff_parabola, m)?)?;
    m.add_function(wrap_pyfunction!(count_checkboxes, m)?)?;
    m.add_function(wrap_pyfunction!(metric_names, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_class::<Project>()?;
    Ok(())
}
