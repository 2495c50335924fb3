//! Python bindings: intervals, problems, propagation and solving.

use std::time::Duration;

use pyo3::exceptions::{PyValueError, PyZeroDivisionError};
use pyo3::prelude::*;

use hcsolve::bench::Family;
use hcsolve::propagate::{bounds_consistency, Strategy};
use hcsolve::solve::{branch_and_prune, certify, SolveOptions};
use hcsolve::{decompose, IntervalBox};

fn strategy(method: &str) -> PyResult<Strategy> {
    method.parse().map_err(PyValueError::new_err)
}

/// Closed interval with outward-rounded bounds.
#[pyclass(name = "Interval", frozen, eq, hash, from_py_object)]
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct PyInterval(hcsolve::Interval);

#[pymethods]
impl PyInterval {
    #[new]
    fn new(lo: f64, hi: f64) -> Self {
        PyInterval(hcsolve::Interval::new(lo, hi))
    }

    #[staticmethod]
    fn empty() -> Self {
        PyInterval(hcsolve::Interval::EMPTY)
    }

    #[getter]
    fn lo(&self) -> f64 {
        self.0.lo()
    }

    #[getter]
    fn hi(&self) -> f64 {
        self.0.hi()
    }

    fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn width(&self) -> f64 {
        self.0.width()
    }

    fn contains(&self, x: f64) -> bool {
        self.0.contains(x)
    }

    fn intersect(&self, other: &PyInterval) -> Self {
        PyInterval(self.0.intersect(other.0))
    }

    fn hull(&self, other: &PyInterval) -> Self {
        PyInterval(self.0.hull(other.0))
    }

    fn sqrt(&self) -> Self {
        PyInterval(self.0.sqrt())
    }

    fn exp(&self) -> Self {
        PyInterval(self.0.exp())
    }

    fn cos(&self) -> Self {
        PyInterval(self.0.cos())
    }

    fn __add__(&self, o: &PyInterval) -> Self {
        PyInterval(self.0 + o.0)
    }

    fn __sub__(&self, o: &PyInterval) -> Self {
        PyInterval(self.0 - o.0)
    }

    fn __mul__(&self, o: &PyInterval) -> Self {
        PyInterval(self.0 * o.0)
    }

    fn __truediv__(&self, o: &PyInterval) -> PyResult<Self> {
        if o.0 == hcsolve::Interval::ZERO {
            return Err(PyZeroDivisionError::new_err("division by [0, 0]"));
        }
        Ok(PyInterval(self.0 / o.0))
    }

    fn __neg__(&self) -> Self {
        PyInterval(-self.0)
    }

    fn __pow__(&self, n: u32, _modulo: Option<u32>) -> Self {
        PyInterval(self.0.pow_int(n))
    }

    fn __repr__(&self) -> String {
        format!("Interval({})", self.0)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

/// A parsed constraint system.
#[pyclass(name = "Problem", frozen)]
struct PyProblem(hcsolve::Problem);

fn box_to_py(p: &hcsolve::Problem, b: &IntervalBox) -> Vec<(String, PyInterval)> {
    p.names.iter().cloned().zip(b.iter().map(|d| PyInterval(*d))).collect()
}

#[pymethods]
impl PyProblem {
    #[staticmethod]
    fn parse(src: &str) -> PyResult<Self> {
        hcsolve::parse(src).map(PyProblem).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Benchmark instance, e.g. `Problem.benchmark("bratu", 4)`.
    #[staticmethod]
    fn benchmark(family: &str, n: usize) -> PyResult<Self> {
        let f: Family = family.parse().map_err(PyValueError::new_err)?;
        Ok(PyProblem(f.generate(n)))
    }

    #[getter]
    fn variables(&self) -> Vec<String> {
        self.0.names.clone()
    }

    #[getter]
    fn domains(&self) -> Vec<(String, PyInterval)> {
        box_to_py(&self.0, &self.0.domains)
    }

    fn num_constraints(&self) -> usize {
        self.0.constraints.len()
    }

    fn is_admissible(&self) -> Vec<bool> {
        self.0.constraints.iter().map(|c| c.is_admissible()).collect()
    }

    fn fold_constants(&self) -> Self {
        PyProblem(self.0.fold_constants())
    }

    /// Decomposition listing of every constraint.
    fn dump(&self) -> String {
        decompose::dump(&self.0)
    }

    /// Narrowed domains at the method's fixed point, plus the projection count.
    #[pyo3(signature = (method = "hc4"))]
    fn propagate(&self, method: &str) -> PyResult<(Vec<(String, PyInterval)>, usize)> {
        let (d, stats) = bounds_consistency(&self.0, strategy(method)?, &self.0.domains);
        Ok((box_to_py(&self.0, &d), stats.projections))
    }

    /// All solution boxes at accuracy `eps`; returns a dict with `status`,
    /// `solutions` and the work counters.
    #[pyo3(signature = (method = "hc4", eps = 1e-8, timeout = None, max_boxes = None))]
    fn solve<'py>(
        &self,
        py: Python<'py>,
        method: &str,
        eps: f64,
        timeout: Option<f64>,
        max_boxes: Option<usize>,
    ) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        if !(eps > 0.0) {
            return Err(PyValueError::new_err("eps must be positive"));
        }
        let opts = SolveOptions {
            eps,
            timeout: timeout.map(Duration::from_secs_f64),
            max_boxes,
            ..SolveOptions::default()
        };
        let m = strategy(method)?;
        let r = py.detach(|| branch_and_prune(&self.0, m, &opts, &self.0.domains));
        let out = pyo3::types::PyDict::new(py);
        let sols: Vec<Vec<(String, PyInterval)>> = r.solutions().iter().map(|b| box_to_py(&self.0, b)).collect();
        out.set_item("status", r.status.to_string())?;
        out.set_item("solutions", sols)?;
        out.set_item("projections", r.stats.projections)?;
        out.set_item("revise_calls", r.stats.revise_calls)?;
        out.set_item("enqueues", r.stats.enqueues)?;
        out.set_item("seconds", r.stats.wall_time.as_secs_f64())?;
        Ok(out)
    }

    /// Whether interval evaluation fails to refute the box.
    fn certify(&self, bounds: Vec<(f64, f64)>) -> bool {
        let b: IntervalBox = bounds.into_iter().map(|(lo, hi)| hcsolve::Interval::new(lo, hi)).collect();
        certify(&self.0, &b)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

#[pymodule]
#[pyo3(name = "hcsolve")]
fn hcsolve_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInterval>()?;
    m.add_class::<PyProblem>()?;
    m.add("METHODS", Strategy::ALL.iter().map(|s| s.name()).collect::<Vec<_>>())?;
    m.add("FAMILIES", Family::ALL.iter().map(|f| f.name()).collect::<Vec<_>>())?;
    Ok(())
}
