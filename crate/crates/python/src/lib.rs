//! Python bindings for `lncat`.
//!
//! Groups are passed as lists of positive floats; scenarios and study
//! results cross the boundary as JSON strings with the same schema the CLI
//! uses.

use lncat::{Error, GroupSample, Method};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(pylncat, InputError, PyValueError, "Invalid data or parameters.");
create_exception!(
    pylncat,
    NumericalError,
    PyRuntimeError,
    "The numerical machinery failed."
);

fn to_py(e: Error) -> PyErr {
    if e.is_numerical() {
        NumericalError::new_err(e.to_string())
    } else {
        InputError::new_err(e.to_string())
    }
}

fn samples_of(groups: Vec<Vec<f64>>) -> PyResult<Vec<GroupSample>> {
    groups
        .into_iter()
        .map(|g| GroupSample::new(g).map_err(to_py))
        .collect()
}

/// Log-scale sufficient statistics of one group.
#[pyclass(frozen, name = "LogSummary", module = "pylncat", from_py_object)]
#[derive(Clone)]
struct PyLogSummary(lncat::LogSummary);

#[pymethods]
impl PyLogSummary {
    #[new]
    fn new(n: usize, ybar: f64, s2: f64) -> PyResult<Self> {
        lncat::LogSummary::new(n, ybar, s2).map(Self).map_err(to_py)
    }

    /// Summary of raw positive observations.
    #[staticmethod]
    fn from_observations(values: Vec<f64>) -> PyResult<Self> {
        Ok(Self(GroupSample::new(values).map_err(to_py)?.summary()))
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn ybar(&self) -> f64 {
        self.0.ybar()
    }

    #[getter]
    fn s2(&self) -> f64 {
        self.0.s2()
    }

    #[getter]
    fn eta_hat(&self) -> f64 {
        self.0.eta_hat()
    }

    fn __repr__(&self) -> String {
        format!(
            "LogSummary(n={}, ybar={}, s2={})",
            self.0.n(),
            self.0.ybar(),
            self.0.s2()
        )
    }
}

#[pyclass(frozen, get_all, name = "GroupEstimate", module = "pylncat")]
struct PyGroupEstimate {
    n: usize,
    mu_hat: f64,
    sigma2_hat: f64,
    eta_hat: f64,
    v_hat: f64,
}

#[pymethods]
impl PyGroupEstimate {
    #[getter]
    fn phi_hat(&self) -> f64 {
        self.eta_hat.exp()
    }
}

#[pyclass(frozen, get_all, name = "RestrictedFit", module = "pylncat")]
struct PyRestrictedFit {
    eta_rml: f64,
    sigma2_rml: Vec<f64>,
    mu_rml: Vec<f64>,
    loglik: f64,
    iterations: usize,
    converged: bool,
}

#[pyclass(frozen, get_all, name = "TestResult", module = "pylncat")]
struct PyTestResult {
    method: String,
    statistic: f64,
    p_value: f64,
    critical_value: Option<f64>,
    alpha: f64,
    m: Option<usize>,
    seed: Option<u64>,
    reject: bool,
}

#[pymethods]
impl PyTestResult {
    fn __repr__(&self) -> String {
        format!(
            "TestResult(method='{}', statistic={}, p_value={}, reject={})",
            self.method,
            self.statistic,
            self.p_value,
            if self.reject { "True" } else { "False" }
        )
    }
}

impl From<lncat::TestResult> for PyTestResult {
    fn from(r: lncat::TestResult) -> Self {
        Self {
            method: r.method.as_str().to_string(),
            statistic: r.statistic,
            p_value: r.p_value,
            critical_value: r.critical_value,
            alpha: r.alpha,
            m: r.m,
            seed: r.seed,
            reject: r.reject,
        }
    }
}

#[pyfunction]
fn estimate_group(summary: &PyLogSummary) -> PyResult<PyGroupEstimate> {
    let e = lncat::estimate_group(&summary.0).map_err(to_py)?;
    Ok(PyGroupEstimate {
        n: e.n,
        mu_hat: e.mu_hat,
        sigma2_hat: e.sigma2_hat,
        eta_hat: e.eta_hat,
        v_hat: e.v_hat,
    })
}

#[pyfunction]
fn theta_statistic(etas: Vec<f64>, vs: Vec<f64>) -> PyResult<f64> {
    let input = lncat::ThetaInput::new(etas, vs).map_err(to_py)?;
    Ok(lncat::theta_statistic(&input))
}

#[pyfunction]
fn full_loglik(summaries: Vec<PyLogSummary>, mus: Vec<f64>, sigma2s: Vec<f64>) -> PyResult<f64> {
    let s: Vec<_> = summaries.into_iter().map(|s| s.0).collect();
    lncat::full_loglik(&s, &mus, &sigma2s).map_err(to_py)
}

#[pyfunction]
fn profile_sigma2(eta: f64, summary: &PyLogSummary) -> PyResult<f64> {
    lncat::profile_sigma2(eta, &summary.0).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (summaries, tol = 1e-10))]
fn fit_restricted(summaries: Vec<PyLogSummary>, tol: f64) -> PyResult<PyRestrictedFit> {
    let s: Vec<_> = summaries.into_iter().map(|s| s.0).collect();
    let f = lncat::fit_restricted(&s, tol).map_err(to_py)?;
    Ok(PyRestrictedFit {
        eta_rml: f.eta_rml,
        sigma2_rml: f.sigma2_rml,
        mu_rml: f.mu_rml,
        loglik: f.loglik,
        iterations: f.iterations,
        converged: f.converged,
    })
}

/// Computational approach test on groups of raw positive observations.
#[pyfunction]
#[pyo3(signature = (groups, seed, m = lncat::DEFAULT_REPLICATES, alpha = 0.05))]
fn run_cat(py: Python<'_>, groups: Vec<Vec<f64>>, seed: u64, m: usize, alpha: f64) -> PyResult<PyTestResult> {
    let samples = samples_of(groups)?;
    py.detach(|| lncat::run_cat(&samples, m, seed, alpha))
        .map(PyTestResult::from)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (groups, alpha = 0.05))]
fn run_lrt(groups: Vec<Vec<f64>>, alpha: f64) -> PyResult<PyTestResult> {
    let samples = samples_of(groups)?;
    lncat::run_lrt(&samples, alpha)
        .map(PyTestResult::from)
        .map_err(to_py)
}

#[pyfunction]
fn chi2_upper_tail(x: f64, df: u32) -> PyResult<f64> {
    if df == 0 || x.is_nan() || x < 0.0 {
        return Err(InputError::new_err("need x >= 0 and df >= 1"));
    }
    Ok(lncat::chi2_upper_tail(x, df))
}

/// Runs one study. Takes a scenario as JSON and returns the study result as
/// JSON.
#[pyfunction]
fn run_study(py: Python<'_>, scenario_json: &str) -> PyResult<String> {
    let scenario: lncat::Scenario =
        serde_json::from_str(scenario_json).map_err(|e| InputError::new_err(e.to_string()))?;
    let result = py.detach(|| lncat::run_study(&scenario)).map_err(to_py)?;
    serde_json::to_string(&result).map_err(|e| NumericalError::new_err(e.to_string()))
}

#[pyfunction]
fn methods() -> Vec<&'static str> {
    [Method::Cat, Method::Lrt].iter().map(Method::as_str).collect()
}

#[pymodule]
fn pylncat(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("InputError", m.py().get_type::<InputError>())?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;

    m.add_class::<PyLogSummary>()?;
    m.add_class::<PyGroupEstimate>()?;
    m.add_class::<PyRestrictedFit>()?;
    m.add_class::<PyTestResult>()?;

    m.add_function(wrap_pyfunction!(estimate_group, m)?)?;
    m.add_function(wrap_pyfunction!(theta_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(full_loglik, m)?)?;
    m.add_function(wrap_pyfunction!(profile_sigma2, m)?)?;
    m.add_function(wrap_pyfunction!(fit_restricted, m)?)?;
    m.add_function(wrap_pyfunction!(run_cat, m)?)?;
    m.add_function(wrap_pyfunction!(run_lrt, m)?)?;
    m.add_function(wrap_pyfunction!(chi2_upper_tail, m)?)?;
    m.add_function(wrap_pyfunction!(run_study, m)?)?;
    m.add_function(wrap_pyfunction!(methods, m)?)?;
    Ok(())
}
