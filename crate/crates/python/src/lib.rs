//! Python bindings: problem generation and files, solver runs, certificates
//! and set projections.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use splitfeas::problems::{problem_from_json, problem_to_json, trace_to_csv};
use splitfeas::{
    certify_all, certify_convergence, generate as generate_problem, residuals, run, Algorithm,
    GeneratorSpec, InitialPoint, IterateTrace, ProblemInstance, SetFamily, SetSpec, SolverConfig,
};

fn py_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A split feasibility instance.
#[pyclass(name = "Problem", module = "splitfeas_py", frozen)]
struct Problem {
    inner: ProblemInstance,
}

#[pymethods]
impl Problem {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: problem_from_json(text).map_err(py_err)? })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self { inner: splitfeas::load_problem(path).map_err(py_err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        problem_to_json(&self.inner).map_err(py_err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        splitfeas::save_problem(path, &self.inner).map_err(py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// Row counts of the maps `A_j`.
    #[getter]
    fn m(&self) -> Vec<usize> {
        self.inner.maps.iter().map(|a| a.rows()).collect()
    }

    #[getter]
    fn witness(&self) -> Option<Vec<f64>> {
        self.inner.witness.clone()
    }

    /// `(d_C(x), max_j d_{Q_j}(A_j x))`.
    fn residuals(&self, x: Vec<f64>) -> PyResult<(f64, f64)> {
        residuals(&self.inner, &x).map_err(py_err)
    }

    fn project_c(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.set_c.project(&x).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Problem(C={}, n={}, m={:?})", self.inner.set_c.kind(), self.n(), self.m())
    }
}

/// A recorded solver run.
#[pyclass(name = "Trace", module = "splitfeas_py", frozen)]
struct Trace {
    inner: IterateTrace,
}

#[pymethods]
impl Trace {
    #[getter]
    fn algorithm(&self) -> &'static str {
        self.inner.algorithm.name()
    }

    #[getter]
    fn termination(&self) -> &'static str {
        self.inner.termination.as_str()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations()
    }

    #[getter]
    fn final_residual(&self) -> f64 {
        self.inner.final_max_residual()
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.inner.last().x.clone()
    }

    /// Every iterate `x^k`.
    #[getter]
    fn xs(&self) -> Vec<Vec<f64>> {
        self.inner.records.iter().map(|r| r.x.clone()).collect()
    }

    #[getter]
    fn objectives(&self) -> Vec<f64> {
        self.inner.records.iter().map(|r| r.objective.value).collect()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(py_err)
    }

    fn to_csv(&self) -> String {
        trace_to_csv(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Trace({}, {} iterations, {}, residual {:.3e})",
            self.algorithm(),
            self.iterations(),
            self.termination(),
            self.final_residual()
        )
    }
}

fn family(name: &str) -> PyResult<SetFamily> {
    name.parse().map_err(py_err)
}

/// Random instance with a planted solution (or a certified gap when
/// `consistent` is false).
#[pyfunction]
#[pyo3(signature = (n, m, set_c, set_q, seed=0, consistent=true, spectrum=None, sparsity=None, margin=1.0))]
#[allow(clippy::too_many_arguments)]
fn generate(
    n: usize,
    m: usize,
    set_c: &str,
    set_q: &str,
    seed: u64,
    consistent: bool,
    spectrum: Option<Vec<f64>>,
    sparsity: Option<usize>,
    margin: f64,
) -> PyResult<Problem> {
    let mut spec = GeneratorSpec::new(n, m, family(set_c)?, family(set_q)?, seed);
    spec.consistent = consistent;
    spec.spectrum = spectrum;
    spec.sparsity = sparsity;
    spec.margin = margin;
    Ok(Problem { inner: generate_problem(&spec).map_err(py_err)? })
}

/// Runs `algorithm` from `x0` (the origin when omitted). Parameters left as
/// `None` take the spectrum-based defaults.
#[pyfunction]
#[pyo3(signature = (problem, algorithm, x0=None, *, lam=None, rho=None, tau=None, max_iter=None, tol=None, override_requirements=false))]
#[allow(clippy::too_many_arguments)]
fn solve(
    problem: &Problem,
    algorithm: &str,
    x0: Option<Vec<f64>>,
    lam: Option<f64>,
    rho: Option<f64>,
    tau: Option<f64>,
    max_iter: Option<usize>,
    tol: Option<f64>,
    override_requirements: bool,
) -> PyResult<Trace> {
    let p = &problem.inner;
    let alg: Algorithm = algorithm.parse().map_err(py_err)?;
    let mut cfg = SolverConfig::defaults(alg, p).map_err(py_err)?;
    if let Some(v) = lam {
        cfg.lambda = v;
    }
    if let Some(v) = rho {
        cfg.rho = v;
    }
    if let Some(v) = tau {
        cfg.tau = v;
    }
    if let Some(v) = max_iter {
        cfg.max_iter = v;
    }
    if let Some(v) = tol {
        cfg.residual_tol = v;
    }
    cfg.override_requirements = override_requirements;
    let x0 = x0.unwrap_or_else(|| vec![0.0; p.n()]);
    let init = InitialPoint::default_for(alg, p, x0).map_err(py_err)?;
    Ok(Trace { inner: run(p, &cfg, &init).map_err(py_err)? })
}

/// Applicable certificates as `(condition, passed, worst_violation, constant)`
/// tuples, followed by whether the run ended at an approximate solution.
#[pyfunction]
fn certify(trace: &Trace, problem: &Problem) -> PyResult<(Vec<(String, bool, f64, f64)>, bool)> {
    let outcome = certify_all(&trace.inner, &problem.inner).map_err(py_err)?;
    let reports = outcome
        .reports
        .iter()
        .map(|r| {
            let name = serde_json::to_value(r.condition)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            (name, r.passed, r.worst_violation, r.constant_used)
        })
        .collect();
    let summary = certify_convergence(&trace.inner, &problem.inner).map_err(py_err)?;
    Ok((reports, summary.approximate_solution))
}

/// Projection onto a set given in its JSON form, e.g.
/// `{"kind": "ball", "center": [0, 0], "radius": 1}`.
#[pyfunction]
fn project(set_json: &str, u: Vec<f64>) -> PyResult<Vec<f64>> {
    let set: SetSpec = serde_json::from_str(set_json).map_err(py_err)?;
    set.validated().map_err(py_err)?.project(&u).map_err(py_err)
}

#[pyfunction]
fn algorithms() -> Vec<&'static str> {
    Algorithm::ALL.iter().map(|a| a.name()).collect()
}

#[pymodule]
fn splitfeas_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Problem>()?;
    m.add_class::<Trace>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add_function(wrap_pyfunction!(algorithms, m)?)?;
    Ok(())
}
