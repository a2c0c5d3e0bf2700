//! Python bindings: beliefs, the common-information filter, exact costs,
//! steady-state costs, Monte Carlo runs and the coupling check.
//!
//! Reports are returned as plain dicts built from the same JSON the CLI
//! writes.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use sigroute::belief::CommonInfo as CoreInfo;
use sigroute::coupling::{run_coupling, CouplingConfig, DEFAULT_CHECKPOINTS};
use sigroute::exact::{centralized_dp, ExactEvalConfig, ExactRecord};
use sigroute::harness::{run_experiment, run_replication, ConfigValues, ExperimentConfig};
use sigroute::policy::{advance_common_info, Policy};
use sigroute::steady::{steady_report, DEFAULT_CAP};
use sigroute::{Error, ModelParams, PolicyKind};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_)
        | Error::InvalidParams(_)
        | Error::InvalidCost(_)
        | Error::InvalidPmf(_)
        | Error::InfeasibleAction { .. }
        | Error::StateCapTooSmall { .. }
        | Error::BudgetExceeded { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_dict<'py, T: Serialize + ?Sized>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn policy_of(name: &str) -> PyResult<PolicyKind> {
    name.parse().map_err(to_py)
}

/// Probability mass function on `0, 1, 2, ...`.
#[pyclass(name = "Pmf", module = "sigroute", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPmf(sigroute::Pmf);

#[pymethods]
impl PyPmf {
    #[new]
    fn new(probs: Vec<f64>) -> PyResult<Self> {
        sigroute::Pmf::new(probs).map(PyPmf).map_err(to_py)
    }

    #[staticmethod]
    fn point(x: u32) -> Self {
        PyPmf(sigroute::Pmf::point(x))
    }

    #[getter]
    fn probs(&self) -> Vec<f64> {
        self.0.probs().to_vec()
    }

    fn __getitem__(&self, x: u32) -> f64 {
        self.0.get(x)
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.0.mean()
    }

    /// `(lb, ub)` of the support.
    #[getter]
    fn support(&self) -> (u32, u32) {
        (self.0.min_support(), self.0.max_support())
    }

    fn __repr__(&self) -> String {
        format!("Pmf({:?})", self.0.probs())
    }
}

/// Arrival and service probabilities per slot.
#[pyclass(name = "Params", module = "sigroute", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyParams(ModelParams);

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (lambda_, mu, convention = "independent"))]
    fn new(lambda_: f64, mu: f64, convention: &str) -> PyResult<Self> {
        let conv = convention.parse().map_err(to_py)?;
        ModelParams::with_convention(lambda_, mu, conv).map(PyParams).map_err(to_py)
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.0.lambda
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu
    }

    #[getter]
    fn convention(&self) -> String {
        self.0.convention.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Params(lambda_={}, mu={}, convention='{}')", self.0.lambda, self.0.mu, self.0.convention)
    }
}

/// Common information at a decision time: pre-decision beliefs, their joint
/// support bounds and the routing threshold.
#[pyclass(name = "CommonInfo", module = "sigroute", frozen)]
struct PyCommonInfo {
    info: CoreInfo,
    params: ModelParams,
    t: usize,
}

#[pymethods]
impl PyCommonInfo {
    /// Information at the first decision given the beliefs at time 0.
    #[new]
    fn new(pi1: &PyPmf, pi2: &PyPmf, params: &PyParams) -> Self {
        PyCommonInfo {
            info: CoreInfo::from_prior(&[pi1.0.clone(), pi2.0.clone()], &params.0),
            params: params.0,
            t: 0,
        }
    }

    #[getter]
    fn t(&self) -> usize {
        self.t
    }

    #[getter]
    fn beliefs(&self) -> (PyPmf, PyPmf) {
        (PyPmf(self.info.pibar[0].clone()), PyPmf(self.info.pibar[1].clone()))
    }

    /// `(lb, ub)` over both queues.
    #[getter]
    fn bounds(&self) -> (u32, u32) {
        let j = self.info.bounds.joint;
        (j.lb, j.ub)
    }

    #[getter]
    fn threshold(&self) -> f64 {
        self.info.threshold.value()
    }

    /// Whether `policy` routes from queue `queue` (1 or 2) at pre-decision
    /// length `xbar`.
    fn decide(&self, policy: &str, queue: usize, xbar: u32) -> PyResult<bool> {
        if !(1..=2).contains(&queue) {
            return Err(PyValueError::new_err("queue must be 1 or 2"));
        }
        Ok(policy_of(policy)?.decide(queue - 1, xbar, &self.info, self.t))
    }

    /// Information at the next decision after observing actions `(u1, u2)`.
    fn advance(&self, policy: &str, u1: bool, u2: bool) -> PyResult<Self> {
        let p = policy_of(policy)?;
        let info = advance_common_info(&self.info, [u1, u2], &self.params, &p, self.t).map_err(to_py)?;
        Ok(PyCommonInfo { info, params: self.params, t: self.t + 1 })
    }
}

#[allow(clippy::too_many_arguments)]
fn values(
    lambda_: f64,
    mu: f64,
    policy: Option<&str>,
    horizon: usize,
    replications: u64,
    seed: u64,
    cost: &str,
    init: &str,
    convention: &str,
) -> ConfigValues {
    ConfigValues {
        lambda: Some(lambda_),
        mu: Some(mu),
        policy: policy.map(str::to_string),
        horizon: Some(horizon),
        replications: Some(replications),
        seed: Some(seed),
        cost: Some(cost.to_string()),
        init: Some(init.to_string()),
        convention: Some(convention.to_string()),
        ..Default::default()
    }
}

/// Exact expected cost over `horizon` charged stages.
#[pyfunction]
#[pyo3(signature = (policy, lambda_, mu, horizon, init = "eq:0", cost = "linear", convention = "independent"))]
#[allow(clippy::too_many_arguments)]
fn exact_cost<'py>(
    py: Python<'py>,
    policy: &str,
    lambda_: f64,
    mu: f64,
    horizon: usize,
    init: &str,
    cost: &str,
    convention: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let p = policy_of(policy)?;
    let cfg = exact_config(lambda_, mu, horizon, init, cost, convention)?;
    let r = py.detach(|| ExactRecord::evaluate(&p, &cfg)).map_err(to_py)?;
    to_dict(py, &r)
}

/// Optimal expected cost of a controller that sees both queues.
#[pyfunction]
#[pyo3(signature = (lambda_, mu, horizon, init = "eq:0", cost = "linear", convention = "independent"))]
fn centralized_cost(
    py: Python<'_>,
    lambda_: f64,
    mu: f64,
    horizon: usize,
    init: &str,
    cost: &str,
    convention: &str,
) -> PyResult<f64> {
    let cfg = exact_config(lambda_, mu, horizon, init, cost, convention)?;
    py.detach(|| centralized_dp(&cfg)).map(|s| s.value).map_err(to_py)
}

fn exact_config(
    lambda_: f64,
    mu: f64,
    horizon: usize,
    init: &str,
    cost: &str,
    convention: &str,
) -> PyResult<ExactEvalConfig> {
    let cfg = values(lambda_, mu, None, horizon, 1, 0, cost, init, convention).build().map_err(to_py)?;
    ExactEvalConfig::new(horizon, cfg.params, cfg.initial, cfg.cost).map_err(to_py)
}

/// Average cost per slot of `ghat` and `g0` from their stationary laws.
#[pyfunction]
#[pyo3(signature = (lambda_, mu, cost = "linear", cap = DEFAULT_CAP, convention = "independent"))]
fn steady<'py>(
    py: Python<'py>,
    lambda_: f64,
    mu: f64,
    cost: &str,
    cap: usize,
    convention: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let v = values(lambda_, mu, None, 1, 1, 0, cost, "eq:0", convention);
    let params = v.params().map_err(to_py)?;
    let cost = cost.parse().map_err(to_py)?;
    let r = py.detach(|| steady_report(&params, &cost, cap)).map_err(to_py)?;
    to_dict(py, &r)
}

fn sim_config(v: ConfigValues, mode: &str) -> PyResult<ExperimentConfig> {
    ConfigValues { mode: Some(mode.to_string()), ..v }.build().map_err(to_py)
}

/// Monte Carlo run; returns the run summary.
#[pyfunction]
#[pyo3(signature = (
    lambda_, mu, policy = "ghat", horizon = 1000, replications = 1, seed = 0,
    cost = "linear", init = "eq:0", mode = "finite", convention = "independent"
))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    lambda_: f64,
    mu: f64,
    policy: &str,
    horizon: usize,
    replications: u64,
    seed: u64,
    cost: &str,
    init: &str,
    mode: &str,
    convention: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = sim_config(
        values(lambda_, mu, Some(policy), horizon, replications, seed, cost, init, convention),
        mode,
    )?;
    let s = py.detach(|| run_experiment(&cfg)).map_err(to_py)?;
    to_dict(py, &s)
}

/// Per-slot records of one replication, as a list of dicts.
#[pyfunction]
#[pyo3(signature = (
    lambda_, mu, policy = "ghat", horizon = 100, replication = 0, seed = 0,
    cost = "linear", init = "eq:0", convention = "independent"
))]
#[allow(clippy::too_many_arguments)]
fn trace<'py>(
    py: Python<'py>,
    lambda_: f64,
    mu: f64,
    policy: &str,
    horizon: usize,
    replication: u64,
    seed: u64,
    cost: &str,
    init: &str,
    convention: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = sim_config(
        values(lambda_, mu, Some(policy), horizon, replication + 1, seed, cost, init, convention),
        "finite",
    )?;
    let (records, _) = py.detach(|| run_replication(&cfg, replication)).map_err(to_py)?;
    to_dict(py, &records)
}

/// Couples `ghat` with uncontrolled queues; raises if dominance breaks.
#[pyfunction]
#[pyo3(signature = (
    lambda_, mu, horizon = 200, replications = 1000, seed = 0,
    cost = "linear", init = "eq:0", checkpoints = None
))]
#[allow(clippy::too_many_arguments)]
fn coupling<'py>(
    py: Python<'py>,
    lambda_: f64,
    mu: f64,
    horizon: usize,
    replications: u64,
    seed: u64,
    cost: &str,
    init: &str,
    checkpoints: Option<Vec<usize>>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = values(lambda_, mu, None, horizon, replications, seed, cost, init, "independent")
        .build()
        .map_err(to_py)?;
    let checkpoints =
        checkpoints.unwrap_or_else(|| DEFAULT_CHECKPOINTS.into_iter().filter(|&t| t <= horizon).collect());
    let cc = CouplingConfig {
        params: cfg.params,
        initial: cfg.initial,
        cost: cfg.cost.terminal().clone(),
        horizon,
        replications,
        seed,
        checkpoints,
    };
    let r = py.detach(|| run_coupling(&cc)).map_err(to_py)?;
    to_dict(py, &r)
}

#[pymodule]
#[pyo3(name = "sigroute")]
fn sigroute_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPmf>()?;
    m.add_class::<PyParams>()?;
    m.add_class::<PyCommonInfo>()?;
    m.add_function(wrap_pyfunction!(exact_cost, m)?)?;
    m.add_function(wrap_pyfunction!(centralized_cost, m)?)?;
    m.add_function(wrap_pyfunction!(steady, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(trace, m)?)?;
    m.add_function(wrap_pyfunction!(coupling, m)?)?;
    Ok(())
}
