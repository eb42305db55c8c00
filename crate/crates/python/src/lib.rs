use std::collections::BTreeMap;

use groverlab::experiment::{run_plan as core_run_plan, TargetSource, TrialProtocol};
use groverlab::logistic::fit_logistic as core_fit_logistic;
use groverlab::metrics::{expected_depth as core_expected_depth, j_exp, j_max};
use groverlab::noise::{run_shots as core_run_shots, NoiseModel};
use groverlab::optimize::{minimize_expected_depth, OptimizeBounds};
use groverlab::search::{build_stage_circuit, plan_success_for_target, plan_success_probability};
use groverlab::transpile::{self, LowerOptions};
use groverlab::{BitString, Error, SearchPlan};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn bits(s: &str) -> PyResult<BitString> {
    s.parse().map_err(py_err)
}

/// A parsed circuit name such as `G1D3M3` or `D3M2|D2M2`.
#[pyclass(name = "SearchPlan", frozen)]
struct PySearchPlan(SearchPlan);

#[pymethods]
impl PySearchPlan {
    #[new]
    fn new(name: &str, n: usize) -> PyResult<Self> {
        SearchPlan::parse(name, n).map(PySearchPlan).map_err(py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn oracle_count(&self) -> usize {
        self.0.oracle_count()
    }

    #[getter]
    fn num_stages(&self) -> usize {
        self.0.stages().len()
    }

    fn success_probability(&self) -> PyResult<f64> {
        plan_success_probability(&self.0).map_err(py_err)
    }

    fn success_for_target(&self, target: &str) -> PyResult<f64> {
        plan_success_for_target(&self.0, &bits(target)?).map_err(py_err)
    }

    /// Gate-list text of stage `stage` for `target`.
    #[pyo3(signature = (target, stage = 0))]
    fn circuit_text(&self, target: &str, stage: usize) -> PyResult<String> {
        let t = bits(target)?;
        if stage >= self.0.stages().len() {
            return Err(PyValueError::new_err(format!("plan has {} stage(s)", self.0.stages().len())));
        }
        let det = self.0.stage_layout(stage).determined.len();
        let c = build_stage_circuit(&self.0, stage, &t, &t.slice(0..det)).map_err(py_err)?;
        Ok(c.to_text())
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("SearchPlan('{}', n={})", self.0, self.0.n())
    }
}

#[pyclass(name = "StateVector")]
struct PyStateVector(groverlab::StateVector);

#[pymethods]
impl PyStateVector {
    #[new]
    fn new(n: usize) -> PyResult<Self> {
        groverlab::StateVector::zero(n).map(PyStateVector).map_err(py_err)
    }

    #[staticmethod]
    fn uniform(n: usize) -> PyResult<Self> {
        groverlab::StateVector::uniform(n).map(PyStateVector).map_err(py_err)
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.0.num_qubits()
    }

    fn probabilities(&self) -> Vec<f64> {
        self.0.probabilities()
    }

    fn amplitudes(&self) -> Vec<(f64, f64)> {
        self.0.amplitudes().iter().map(|a| (a.re, a.im)).collect()
    }

    /// Phase oracle: flips the sign of basis state `target`.
    fn flip_sign(&mut self, target: &str) -> PyResult<()> {
        let t = bits(target)?;
        if t.len() != self.0.num_qubits() {
            return Err(PyValueError::new_err("target width differs from register width"));
        }
        self.0.flip_sign(&t);
        Ok(())
    }

    /// Inversion about the mean on the listed qubits.
    fn diffuse(&mut self, support: Vec<usize>) -> PyResult<()> {
        self.0.reflect_about_uniform(&support).map_err(py_err)
    }

    fn marginal(&self, qubits: Vec<usize>) -> PyResult<Vec<f64>> {
        self.0.marginal(&qubits).map_err(py_err)
    }
}

#[pyclass(name = "Backend", frozen)]
struct PyBackend(transpile::Backend);

#[pymethods]
impl PyBackend {
    /// A builtin name (vigo, athens, guadalupe) or a backend file path.
    #[new]
    fn new(name_or_path: &str) -> PyResult<Self> {
        transpile::Backend::resolve(name_or_path).map(PyBackend).map_err(py_err)
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name.clone()
    }

    #[getter]
    fn num_qubits(&self) -> usize {
        self.0.num_qubits
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges.clone()
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }
}

/// Lowers one stage onto `backend`; returns `(depth, cx_count)`.
#[pyfunction]
#[pyo3(signature = (plan, target, backend, stage = 0, seed = 0))]
fn lower_stage(plan: &PySearchPlan, target: &str, backend: &PyBackend, stage: usize, seed: u64) -> PyResult<(usize, usize)> {
    let t = bits(target)?;
    let det = plan.0.stage_layout(stage).determined.len();
    let c = build_stage_circuit(&plan.0, stage, &t, &t.slice(0..det)).map_err(py_err)?;
    let tc = transpile::lower_with(&c, &backend.0, None, seed, &LowerOptions::for_execution()).map_err(py_err)?;
    Ok((tc.depth(), tc.cx_count()))
}

/// Noisy shots of a single-stage plan under the backend's default noise.
/// Returns a dict from measured bit string to count.
#[pyfunction]
#[pyo3(signature = (plan, target, backend, shots = 8192, seed = 0, noiseless = false))]
fn run_shots(
    plan: &PySearchPlan,
    target: &str,
    backend: &PyBackend,
    shots: u64,
    seed: u64,
    noiseless: bool,
) -> PyResult<BTreeMap<String, u64>> {
    if plan.0.stages().len() != 1 {
        return Err(PyValueError::new_err("run_shots takes a single-stage plan"));
    }
    let t = bits(target)?;
    let layout = plan.0.stage_layout(0);
    let c = build_stage_circuit(&plan.0, 0, &t, &t.slice(0..layout.determined.len())).map_err(py_err)?;
    let tc = transpile::lower_with(&c, &backend.0, None, seed, &LowerOptions::for_execution()).map_err(py_err)?;
    let model = if noiseless { NoiseModel::noiseless() } else { NoiseModel::from_backend(&backend.0) };
    let hist = core_run_shots(&tc, &layout.measured, &model, shots, seed).map_err(py_err)?;
    Ok(hist.counts.iter().map(|(b, &c)| (b.to_string(), c)).collect())
}

/// Full trial protocol for one plan; returns the experiment record as a dict.
#[allow(clippy::too_many_arguments)]
#[pyfunction]
#[pyo3(signature = (plan, backend, trials = 30, shots = 8192, seed = 0, random_targets = false, chained = false))]
fn run_plan(
    py: Python<'_>,
    plan: &PySearchPlan,
    backend: &PyBackend,
    trials: usize,
    shots: u64,
    seed: u64,
    random_targets: bool,
    chained: bool,
) -> PyResult<BTreeMap<&'static str, Py<PyAny>>> {
    let protocol = TrialProtocol {
        trials,
        shots,
        seed,
        chained,
        targets: if random_targets { TargetSource::Random } else { TargetSource::Fixture },
        ..TrialProtocol::new(&backend.0)
    };
    let r = py.detach(|| core_run_plan(&plan.0, &backend.0, &protocol)).map_err(py_err)?.record;
    let mut out = BTreeMap::new();
    out.insert("circuit_name", r.circuit_name.into_pyobject(py)?.into_any().unbind());
    out.insert("backend", r.backend.into_pyobject(py)?.into_any().unbind());
    out.insert("mode", r.mode.into_pyobject(py)?.into_any().unbind());
    out.insert("n", r.n.into_pyobject(py)?.into_any().unbind());
    out.insert("trials", r.trials.into_pyobject(py)?.into_any().unbind());
    out.insert("shots", r.shots.into_pyobject(py)?.into_any().unbind());
    for (k, v) in [
        ("p_theo", r.p_theo),
        ("p_sim", r.p_sim),
        ("p_sim_std", r.p_sim_std),
        ("selectivity", r.selectivity),
        ("depth", r.depth),
        ("depth_stage2", r.depth_stage2),
        ("expected_depth_theo", r.expected_depth_theo),
        ("expected_depth_sim", r.expected_depth_sim),
        ("cx_count", r.cx_count),
        ("degraded_ratio", r.degraded_ratio),
    ] {
        out.insert(k, v.into_pyobject(py)?.into_any().unbind());
    }
    Ok(out)
}

/// Fits `y = a / (1 + exp(-b (x - c))) + d`; returns `(a, b, c, d, r_squared)`.
#[pyfunction]
fn fit_logistic(points: Vec<(f64, f64)>) -> PyResult<(f64, f64, f64, f64, f64)> {
    let f = core_fit_logistic(&points).map_err(py_err)?;
    Ok((f.a, f.b, f.c, f.d, f.r_squared))
}

#[pyfunction]
fn expected_depth(depths: Vec<f64>, p: f64) -> PyResult<f64> {
    core_expected_depth(&depths, p).map_err(py_err)
}

/// Ranks plans by expected depth; returns `[(name, p_theo, expected_depth)]`, best first.
#[pyfunction]
#[pyo3(signature = (n, backend, max_oracles = 2, max_stages = 2, force_global = false, seed = 0))]
fn optimize(
    py: Python<'_>,
    n: usize,
    backend: &PyBackend,
    max_oracles: usize,
    max_stages: usize,
    force_global: bool,
    seed: u64,
) -> PyResult<Vec<(String, f64, f64)>> {
    let bounds = OptimizeBounds { max_oracles, max_stages, force_global };
    let report = py.detach(|| minimize_expected_depth(n, &backend.0, &bounds, seed)).map_err(py_err)?;
    Ok(report.ranking.into_iter().map(|e| (e.name, e.p_theo, e.expected_depth)).collect())
}

#[pymodule(name = "groverlab")]
fn groverlab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySearchPlan>()?;
    m.add_class::<PyStateVector>()?;
    m.add_class::<PyBackend>()?;
    m.add_function(wrap_pyfunction!(lower_stage, m)?)?;
    m.add_function(wrap_pyfunction!(run_shots, m)?)?;
    m.add_function(wrap_pyfunction!(run_plan, m)?)?;
    m.add_function(wrap_pyfunction!(fit_logistic, m)?)?;
    m.add_function(wrap_pyfunction!(expected_depth, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_iterations, m)?)?;
    Ok(())
}

/// `(j_max, j_exp)` for an n-qubit register.
#[pyfunction]
fn optimal_iterations(n: usize) -> (usize, usize) {
    (j_max(n), j_exp(n))
}
