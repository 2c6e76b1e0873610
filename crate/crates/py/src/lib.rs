//! Python bindings for `apportion_core`.
//!
//! Methods, densities and samplers are passed by name (`"hh"`,
//! `"mod-jefferson"`, `"exp-iid"`, ...). Populations are floats and are
//! converted exactly before apportioning.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use apportion_core::montecarlo::{self, Interval, SamplerKind, SamplerSpec};
use apportion_core::{probability, tau, thresholds, Error, Method, PopulationInstance};

create_exception!(
    quota_py,
    TieError,
    PyValueError,
    "The outcome depends on how a priority tie is broken."
);

fn err(e: Error) -> PyErr {
    match e {
        Error::TieDetected { .. } => TieError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_method(name: &str) -> PyResult<Method> {
    name.parse().map_err(err)
}

fn instance(pops: &[f64], seats: u32) -> PyResult<PopulationInstance> {
    PopulationInstance::from_f64(pops, seats).map_err(err)
}

fn tau_value(t: f64) -> PyResult<tau::TauValue> {
    tau::TauValue::new(t).map_err(err)
}

#[pyclass(name = "Apportionment", frozen, get_all)]
struct PyApportionment {
    method: String,
    seats: Vec<u32>,
    quotas: Vec<f64>,
}

#[pymethods]
impl PyApportionment {
    fn __repr__(&self) -> String {
        format!(
            "Apportionment(method={:?}, seats={:?})",
            self.method, self.seats
        )
    }
}

#[pyclass(name = "ViolationReport", frozen, get_all)]
struct PyViolationReport {
    status: String,
    states: Vec<usize>,
    cause: String,
}

#[pymethods]
impl PyViolationReport {
    fn __repr__(&self) -> String {
        format!(
            "ViolationReport(status={:?}, states={:?}, cause={:?})",
            self.status, self.states, self.cause
        )
    }
}

#[pyclass(name = "ProbabilityResult", frozen, get_all)]
struct PyProbabilityResult {
    method: String,
    seats: Option<u32>,
    mode: String,
    density: Option<String>,
    value: f64,
    lower_bound_only: bool,
    error_estimate: Option<f64>,
}

impl From<probability::ProbabilityResult> for PyProbabilityResult {
    fn from(r: probability::ProbabilityResult) -> Self {
        PyProbabilityResult {
            method: r.method.name().to_string(),
            seats: r.seats,
            mode: r.mode.as_str().to_string(),
            density: r.density.map(|d| d.name().to_string()),
            value: r.value,
            lower_bound_only: r.lower_bound_only,
            error_estimate: r.error_estimate,
        }
    }
}

#[pymethods]
impl PyProbabilityResult {
    fn __float__(&self) -> f64 {
        self.value
    }

    fn __repr__(&self) -> String {
        format!(
            "ProbabilityResult(method={:?}, M={:?}, mode={:?}, value={})",
            self.method, self.seats, self.mode, self.value
        )
    }
}

#[pyclass(name = "EstimateResult", frozen, get_all)]
struct PyEstimateResult {
    method: String,
    seats: u32,
    sampler: String,
    seed: u64,
    n: u64,
    hits: u64,
    p_hat: f64,
    ci_low: f64,
    ci_high: f64,
}

#[pymethods]
impl PyEstimateResult {
    fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }

    fn __repr__(&self) -> String {
        format!(
            "EstimateResult(method={:?}, M={}, p_hat={}, ci=({}, {}))",
            self.method, self.seats, self.p_hat, self.ci_low, self.ci_high
        )
    }
}

#[pyclass(name = "ThresholdSet", frozen, get_all)]
struct PyThresholdSet {
    y1: f64,
    y2: f64,
    y3: f64,
    y_f: f64,
    y_star: Option<f64>,
    y_tau: Option<f64>,
    y_max: Option<f64>,
    ultimately_violatory: bool,
}

#[pyclass(name = "ViolatorySet", frozen, get_all)]
struct PyViolatorySet {
    method: String,
    seats: u32,
    intervals: Vec<(f64, f64)>,
    total_length: f64,
}

#[pymethods]
impl PyViolatorySet {
    fn __contains__(&self, t: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a < t && t < b)
    }
}

/// Seats for each state. `modified` gives the smallest state one seat and
/// apportions the rest among the others.
#[pyfunction]
#[pyo3(signature = (method, pops, seats, modified = false))]
fn apportion(
    method: &str,
    pops: Vec<f64>,
    seats: u32,
    modified: bool,
) -> PyResult<PyApportionment> {
    let m = parse_method(method)?;
    let inst = instance(&pops, seats)?;
    let a = if modified {
        apportion_core::modified_apportion(m, &inst)
    } else {
        apportion_core::apportion(m, &inst)
    }
    .map_err(err)?;
    Ok(PyApportionment {
        method: m.name().to_string(),
        seats: a.seats,
        quotas: apportion_core::standard_quotas(&inst).to_f64(),
    })
}

#[pyfunction]
fn classify_violation(method: &str, pops: Vec<f64>, seats: u32) -> PyResult<PyViolationReport> {
    let r = apportion_core::classify_violation(parse_method(method)?, &instance(&pops, seats)?)
        .map_err(err)?;
    Ok(PyViolationReport {
        status: r.status.as_str().to_string(),
        states: r.offending_states,
        cause: r.cause.as_str().to_string(),
    })
}

#[pyfunction]
fn criteria_test(method: &str, pops: Vec<f64>, seats: u32) -> PyResult<bool> {
    let mut sorted = pops;
    sorted.sort_by(f64::total_cmp);
    let q = apportion_core::standard_quotas(&instance(&sorted, seats)?);
    apportion_core::criteria_test(parse_method(method)?, &q, seats).map_err(err)
}

#[pyfunction]
fn tau_of(pops: [f64; 3]) -> PyResult<f64> {
    tau::tau_of(pops).map(|t| t.get()).map_err(err)
}

#[pyfunction]
fn is_ultimately_violatory(method: &str, seats: u32, tau: f64) -> PyResult<bool> {
    tau::is_ultimately_violatory(parse_method(method)?, seats, tau_value(tau)?).map_err(err)
}

#[pyfunction]
fn violatory_set(method: &str, seats: u32) -> PyResult<PyViolatorySet> {
    let v = tau::violatory_set(parse_method(method)?, seats).map_err(err)?;
    Ok(PyViolatorySet {
        method: v.method.name().to_string(),
        seats: v.seats,
        intervals: v.intervals.iter().map(|&[a, b]| (a, b)).collect(),
        total_length: v.total_length,
    })
}

#[pyfunction]
fn threshold_set(method: &str, tau: f64, seats: u32) -> PyResult<PyThresholdSet> {
    let s =
        thresholds::threshold_set(parse_method(method)?, tau_value(tau)?, seats).map_err(err)?;
    Ok(PyThresholdSet {
        y1: s.y1,
        y2: s.y2,
        y3: s.y3,
        y_f: s.y_f,
        y_star: s.y_star,
        y_tau: s.y_tau,
        y_max: s.y_max,
        ultimately_violatory: s.ultimately_violatory,
    })
}

#[pyfunction]
fn exact_probability(method: &str, seats: u32) -> PyResult<PyProbabilityResult> {
    probability::exact_probability(parse_method(method)?, seats)
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
fn jefferson_closed_form(seats: u32) -> PyResult<PyProbabilityResult> {
    probability::jefferson_closed_form(seats)
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
fn limit_probability(method: &str) -> PyResult<PyProbabilityResult> {
    probability::limit_probability(parse_method(method)?)
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (method, seats, density = "exp-iid", tol = probability::DEFAULT_TOL))]
fn integral_probability(
    method: &str,
    seats: u32,
    density: &str,
    tol: f64,
) -> PyResult<PyProbabilityResult> {
    let d = density.parse().map_err(err)?;
    probability::integral_probability(parse_method(method)?, seats, d, tol)
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (
    method,
    seats,
    sampler = "wedge",
    n = montecarlo::DEFAULT_SAMPLES,
    seed = montecarlo::DEFAULT_SEED,
    h = montecarlo::DEFAULT_H,
    lam = 1.0,
    wilson = false,
))]
#[allow(clippy::too_many_arguments)]
fn estimate_violation_prob(
    py: Python<'_>,
    method: &str,
    seats: u32,
    sampler: &str,
    n: u64,
    seed: u64,
    h: f64,
    lam: f64,
    wilson: bool,
) -> PyResult<PyEstimateResult> {
    let m = parse_method(method)?;
    let spec = SamplerSpec::new(SamplerKind::from_name(sampler, h, lam).map_err(err)?, seed)
        .map_err(err)?;
    let interval = if wilson {
        Interval::Wilson
    } else {
        Interval::Wald
    };
    let r = py
        .detach(|| montecarlo::estimate_violation_prob_with(m, seats, &spec, n, interval, true))
        .map_err(err)?;
    Ok(PyEstimateResult {
        method: m.name().to_string(),
        seats,
        sampler: r.sampler.label(),
        seed: r.seed,
        n: r.n,
        hits: r.hits,
        p_hat: r.p_hat,
        ci_low: r.ci_low,
        ci_high: r.ci_high,
    })
}

/// (KS statistic, statistic·√n, passes at 1%) for τ of sampled triples.
#[pyfunction]
#[pyo3(signature = (sampler, n, seed = montecarlo::DEFAULT_SEED, h = montecarlo::DEFAULT_H, lam = 1.0))]
fn tau_uniformity_check(
    sampler: &str,
    n: u64,
    seed: u64,
    h: f64,
    lam: f64,
) -> PyResult<(f64, f64, bool)> {
    let spec = SamplerSpec::new(SamplerKind::from_name(sampler, h, lam).map_err(err)?, seed)
        .map_err(err)?;
    let r = montecarlo::tau_uniformity_check(&spec, n).map_err(err)?;
    Ok((r.statistic, r.scaled, r.passes_1pct))
}

#[pymodule]
pub fn quota_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("TieError", m.py().get_type::<TieError>())?;
    m.add(
        "METHODS",
        Method::ALL.iter().map(|m| m.name()).collect::<Vec<_>>(),
    )?;
    m.add_class::<PyApportionment>()?;
    m.add_class::<PyViolationReport>()?;
    m.add_class::<PyProbabilityResult>()?;
    m.add_class::<PyEstimateResult>()?;
    m.add_class::<PyThresholdSet>()?;
    m.add_class::<PyViolatorySet>()?;
    m.add_function(wrap_pyfunction!(apportion, m)?)?;
    m.add_function(wrap_pyfunction!(classify_violation, m)?)?;
    m.add_function(wrap_pyfunction!(criteria_test, m)?)?;
    m.add_function(wrap_pyfunction!(tau_of, m)?)?;
    m.add_function(wrap_pyfunction!(is_ultimately_violatory, m)?)?;
    m.add_function(wrap_pyfunction!(violatory_set, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_set, m)?)?;
    m.add_function(wrap_pyfunction!(exact_probability, m)?)?;
    m.add_function(wrap_pyfunction!(jefferson_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(limit_probability, m)?)?;
    m.add_function(wrap_pyfunction!(integral_probability, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_violation_prob, m)?)?;
    m.add_function(wrap_pyfunction!(tau_uniformity_check, m)?)?;
    Ok(())
}
