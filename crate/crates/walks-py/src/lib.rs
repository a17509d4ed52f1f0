//! Python bindings. Structured results come back as plain dicts and lists;
//! exact rationals are strings such as `"3/2"`.

use orthant_walks as ow;
use ow::enumerate::{count_walks_guarded, sample_walk_streaming, Guard, Mode, DEFAULT_GUARD};
use ow::gb::{gb_critical_points, gb_estimate, gb_excursion_estimate, gb_kappa_v, harmonicity_report, GbParams};
use ow::rational::{format_rational, parse_rational, Rational};
use ow::validate::{validate_excursions_guarded, validate_totals_guarded, Target};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

create_exception!(orthant_walks, ResourceGuardError, PyException, "A table would exceed the resource guard.");
create_exception!(orthant_walks, AmbiguousError, PyValueError, "The classification could not be decided.");

fn err(e: ow::Error) -> PyErr {
    match e {
        ow::Error::ResourceGuard { .. } => ResourceGuardError::new_err(e.to_string()),
        ow::Error::Ambiguous(_) | ow::Error::NoConvergence(_) => AmbiguousError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, x: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(x).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn rat(text: &str) -> PyResult<Rational> {
    parse_rational(text).map_err(err)
}

fn mode(text: &str) -> PyResult<Mode> {
    text.parse().map_err(err)
}

fn params(a: &str, b: &str, i: u32, j: u32) -> PyResult<GbParams> {
    GbParams::new(rat(a)?, rat(b)?, i, j).map_err(err)
}

/// A finite weighted step set in `Z^d`.
#[pyclass(name = "StepSet", module = "orthant_walks", frozen)]
struct PyStepSet {
    inner: ow::StepSet,
}

#[pymethods]
impl PyStepSet {
    /// `weights` are rational strings in step order.
    #[new]
    fn new(steps: Vec<Vec<i64>>, weights: Vec<String>) -> PyResult<Self> {
        let dim = steps.first().map_or(0, Vec::len);
        let w = weights.iter().map(|x| rat(x)).collect::<PyResult<Vec<_>>>()?;
        Ok(PyStepSet { inner: ow::StepSet::new(dim, steps, w).map_err(err)? })
    }

    /// One of `gb`, `tandem`, `gessel`, `simple`.
    #[staticmethod]
    #[pyo3(signature = (name, a = "1", b = "1"))]
    fn builtin(name: &str, a: &str, b: &str) -> PyResult<Self> {
        Ok(PyStepSet { inner: ow::StepSet::builtin(name, &rat(a)?, &rat(b)?).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyStepSet { inner: ow::StepSet::from_json(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn steps(&self) -> Vec<Vec<i64>> {
        self.inner.steps().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<String> {
        self.inner.weights().iter().map(format_rational).collect()
    }

    fn drift(&self) -> Vec<String> {
        ow::drift(&self.inner).0.iter().map(format_rational).collect()
    }

    fn is_singular(&self) -> bool {
        ow::is_singular(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("StepSet({})", self.inner.to_json())
    }
}

fn origin_or(s: &ow::StepSet, start: Option<Vec<i64>>) -> Vec<i64> {
    start.unwrap_or_else(|| vec![0; s.dim()])
}

/// Total weights of walks of length `0..=n`, as exact strings or 15-digit decimals.
#[pyfunction]
#[pyo3(signature = (s, n, start = None, mode = "exact", guard = DEFAULT_GUARD))]
fn count_walks(s: &PyStepSet, n: usize, start: Option<Vec<i64>>, mode: &str, guard: u128) -> PyResult<Vec<String>> {
    let start = origin_or(&s.inner, start);
    let t = count_walks_guarded(&s.inner, &start, n, self::mode(mode)?, Guard::new(guard)).map_err(err)?;
    (0..=n).map(|k| t.total(k).map(|c| c.to_string()).map_err(err)).collect()
}

/// Endpoints of length-`n` walks with their weights.
#[pyfunction]
#[pyo3(signature = (s, n, start = None, mode = "exact", guard = DEFAULT_GUARD))]
fn endpoints(
    s: &PyStepSet,
    n: usize,
    start: Option<Vec<i64>>,
    mode: &str,
    guard: u128,
) -> PyResult<Vec<(Vec<i64>, String)>> {
    let start = origin_or(&s.inner, start);
    let t = count_walks_guarded(&s.inner, &start, n, self::mode(mode)?, Guard::new(guard)).map_err(err)?;
    Ok(t.endpoints(n).map_err(err)?.into_iter().map(|(p, c)| (p, c.to_string())).collect())
}

/// A walk drawn with probability proportional to its weight; returns the step list.
#[pyfunction]
#[pyo3(signature = (s, n, seed, start = None, mode = "exact", guard = DEFAULT_GUARD))]
fn sample_walk(
    s: &PyStepSet,
    n: usize,
    seed: u64,
    start: Option<Vec<i64>>,
    mode: &str,
    guard: u128,
) -> PyResult<Vec<Vec<i64>>> {
    let start = origin_or(&s.inner, start);
    let w = sample_walk_streaming(&s.inner, &start, n, self::mode(mode)?, seed, Guard::new(guard)).map_err(err)?;
    Ok(w.steps)
}

#[pyfunction]
fn is_central<'py>(py: Python<'py>, s: &PyStepSet) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &ow::is_central(&s.inner).map_err(err)?)
}

#[pyfunction]
fn solve_central<'py>(py: Python<'py>, s: &PyStepSet) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &ow::solve_central(&s.inner).map_err(err)?)
}

#[pyfunction]
fn are_equivalent(s: &PyStepSet, other: &PyStepSet) -> PyResult<bool> {
    ow::are_equivalent(&s.inner, &other.inner).map_err(err)
}

#[pyfunction]
fn rank_full(s: &PyStepSet) -> (usize, bool) {
    ow::rank_full(&s.inner)
}

#[pyfunction]
fn classify<'py>(py: Python<'py>, s: &PyStepSet) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &ow::classify(&s.inner).map_err(err)?)
}

#[pyfunction]
fn gb_classify<'py>(py: Python<'py>, a: &str, b: &str) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &ow::gb_classify(&rat(a)?, &rat(b)?).map_err(err)?)
}

#[pyfunction]
#[pyo3(name = "gb_kappa_v", signature = (a, b, i = 0, j = 0))]
fn gb_kappa_v_py<'py>(py: Python<'py>, a: &str, b: &str, i: u32, j: u32) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &gb_kappa_v(&params(a, b, i, j)?).map_err(err)?)
}

/// Leading asymptotic term at length `n` as a decimal string (it may exceed the float range).
#[pyfunction]
#[pyo3(name = "gb_estimate", signature = (a, b, n, i = 0, j = 0, excursion = false))]
fn gb_estimate_py(a: &str, b: &str, n: u64, i: u32, j: u32, excursion: bool) -> PyResult<String> {
    let p = params(a, b, i, j)?;
    let e = if excursion { gb_excursion_estimate(&p, n) } else { gb_estimate(&p, n) };
    Ok(e.map_err(err)?.to_string())
}

#[pyfunction]
#[pyo3(signature = (a, b, grid = 20))]
fn check_harmonicity<'py>(py: Python<'py>, a: &str, b: &str, grid: u32) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &harmonicity_report(&rat(a)?, &rat(b)?, grid).map_err(err)?)
}

#[pyfunction]
fn critical_points<'py>(py: Python<'py>, a: &str, b: &str) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &gb_critical_points(&rat(a)?, &rat(b)?).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (s, cap = 5, guard = DEFAULT_GUARD))]
fn conjecture2_nullspace<'py>(py: Python<'py>, s: &PyStepSet, cap: usize, guard: u128) -> PyResult<Bound<'py, PyAny>> {
    let r = ow::conjecture::conjecture2_nullspace_guarded(&s.inner, cap, Guard::new(guard)).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (a, b, n_max, i = 0, j = 0, what = "totals", tolerance = 0.05, guard = DEFAULT_GUARD))]
#[allow(clippy::too_many_arguments)]
fn validate<'py>(
    py: Python<'py>,
    a: &str,
    b: &str,
    n_max: u64,
    i: u32,
    j: u32,
    what: &str,
    tolerance: f64,
    guard: u128,
) -> PyResult<Bound<'py, PyAny>> {
    let p = params(a, b, i, j)?;
    let r = match what.parse::<Target>().map_err(err)? {
        Target::Totals => validate_totals_guarded(&p, n_max, tolerance, Guard::new(guard)),
        Target::Excursions => validate_excursions_guarded(&p, n_max, tolerance, Guard::new(guard)),
    };
    to_py(py, &r.map_err(err)?)
}

#[pymodule]
#[pyo3(name = "orthant_walks")]
fn orthant_walks_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStepSet>()?;
    m.add("ResourceGuardError", m.py().get_type::<ResourceGuardError>())?;
    m.add("AmbiguousError", m.py().get_type::<AmbiguousError>())?;
    m.add_function(wrap_pyfunction!(count_walks, m)?)?;
    m.add_function(wrap_pyfunction!(endpoints, m)?)?;
    m.add_function(wrap_pyfunction!(sample_walk, m)?)?;
    m.add_function(wrap_pyfunction!(is_central, m)?)?;
    m.add_function(wrap_pyfunction!(solve_central, m)?)?;
    m.add_function(wrap_pyfunction!(are_equivalent, m)?)?;
    m.add_function(wrap_pyfunction!(rank_full, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(gb_classify, m)?)?;
    m.add_function(wrap_pyfunction!(gb_kappa_v_py, m)?)?;
    m.add_function(wrap_pyfunction!(gb_estimate_py, m)?)?;
    m.add_function(wrap_pyfunction!(check_harmonicity, m)?)?;
    m.add_function(wrap_pyfunction!(critical_points, m)?)?;
    m.add_function(wrap_pyfunction!(conjecture2_nullspace, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
