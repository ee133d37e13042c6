//! Python module `nnpca`: priors, response functions, state evolution,
//! worst-case search, instance generation and AMP.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyArithmeticError, PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use nnpca_core::amp::{self, AmpRow, AmpTrace};
use nnpca_core::experiments::{self, Command, ExperimentConfig};
use nnpca_core::linalg::DenseMatrix;
use nnpca_core::worst_case::{Regime, WorstCaseReport};
use nnpca_core::{fixed_point, scalar, spiked, worst_case, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        Error::NoPositiveMean
        | Error::DomainError { .. }
        | Error::DeadIterate { .. }
        | Error::ZeroUVector { .. } => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Finitely supported prior on `[0, inf)`.
#[pyclass(name = "DiscreteMeasure", module = "nnpca", frozen, from_py_object)]
#[derive(Clone)]
struct PyMeasure {
    inner: nnpca_core::DiscreteMeasure,
}

#[pymethods]
impl PyMeasure {
    /// `atoms` is a list of `(value, weight)` pairs; with `normalized=True`
    /// the second moment must equal 1.
    #[new]
    #[pyo3(signature = (atoms, normalized = false))]
    fn new(atoms: Vec<(f64, f64)>, normalized: bool) -> PyResult<Self> {
        let inner = if normalized {
            nnpca_core::DiscreteMeasure::normalized(atoms)
        } else {
            nnpca_core::DiscreteMeasure::new(atoms)
        };
        Ok(PyMeasure {
            inner: inner.map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn two_point(eps: f64) -> PyResult<Self> {
        Ok(PyMeasure {
            inner: nnpca_core::DiscreteMeasure::two_point(eps).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn dirac(value: f64) -> PyResult<Self> {
        Ok(PyMeasure {
            inner: nnpca_core::DiscreteMeasure::dirac(value).map_err(to_py)?,
        })
    }

    /// Parses `"v1:w1,v2:w2,..."`.
    #[staticmethod]
    fn parse(spec: &str) -> PyResult<Self> {
        Ok(PyMeasure {
            inner: spec.parse().map_err(to_py)?,
        })
    }

    #[getter]
    fn atoms(&self) -> Vec<(f64, f64)> {
        self.inner
            .atoms()
            .iter()
            .map(|a| (a.value, a.weight))
            .collect()
    }

    #[getter]
    fn is_normalized(&self) -> bool {
        self.inner.is_normalized()
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    fn second_moment(&self) -> f64 {
        self.inner.second_moment()
    }

    fn sparsity(&self) -> f64 {
        self.inner.sparsity()
    }

    fn to_unit_second_moment(&self) -> PyResult<Self> {
        Ok(PyMeasure {
            inner: self.inner.to_unit_second_moment().map_err(to_py)?,
        })
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("DiscreteMeasure.parse({:?})", self.inner.to_string())
    }
}

#[pyfunction]
fn dee(m: &PyMeasure, x: f64) -> f64 {
    scalar::dee(&m.inner, x)
}

#[pyfunction]
fn eff(m: &PyMeasure, x: f64) -> f64 {
    scalar::eff(&m.inner, x)
}

#[pyfunction]
fn gee(m: &PyMeasure, x: f64) -> f64 {
    scalar::gee(&m.inner, x)
}

#[pyfunction]
fn eff_eps_closed(eps: f64, x: f64) -> PyResult<f64> {
    scalar::eff_eps_closed(eps, x).map_err(to_py)
}

#[pyfunction]
fn rayleigh_sym(m: &PyMeasure, beta: f64, x: f64) -> f64 {
    scalar::rayleigh_sym(&m.inner, beta, x)
}

#[pyfunction]
fn rayleigh_rec(m: &PyMeasure, beta: f64, alpha: f64, x: f64) -> f64 {
    scalar::rayleigh_rec(&m.inner, beta, alpha, x)
}

#[pyfunction]
fn overlap_sym0(beta: f64) -> f64 {
    scalar::overlap_sym0(beta)
}

#[pyfunction]
fn overlap_rec0(beta: f64, alpha: f64) -> f64 {
    scalar::overlap_rec0(beta, alpha)
}

#[pyfunction]
fn solve_t(m: &PyMeasure, beta: f64) -> PyResult<f64> {
    fixed_point::solve_t(&m.inner, beta).map_err(to_py)
}

#[pyfunction]
fn solve_s(m: &PyMeasure, beta: f64, alpha: f64) -> PyResult<f64> {
    fixed_point::solve_s(&m.inner, beta, alpha).map_err(to_py)
}

/// State evolution and predictions for the symmetric model.
#[pyfunction]
#[pyo3(signature = (m, beta, t_max = fixed_point::DEFAULT_SE_STEPS))]
fn se_sym<'py>(
    py: Python<'py>,
    m: &PyMeasure,
    beta: f64,
    t_max: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let p = fixed_point::se_sym(&m.inner, beta, t_max).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("beta", p.beta)?;
    d.set_item("tau_seq", p.tau_seq)?;
    d.set_item("t_star", p.t_star)?;
    d.set_item("overlap", p.overlap)?;
    d.set_item("lambda_plus", p.lambda_plus)?;
    Ok(d)
}

/// State evolution and predictions for the rectangular model.
#[pyfunction]
#[pyo3(signature = (m, beta, alpha, t_max = fixed_point::DEFAULT_SE_STEPS))]
fn se_rec<'py>(
    py: Python<'py>,
    m: &PyMeasure,
    beta: f64,
    alpha: f64,
    t_max: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let p = fixed_point::se_rec(&m.inner, beta, alpha, t_max).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("beta", p.beta)?;
    d.set_item("alpha", p.alpha)?;
    d.set_item("mu_seq", p.mu_seq)?;
    d.set_item("theta_seq", p.theta_seq)?;
    d.set_item("s_star", p.s_star)?;
    d.set_item("overlap_v", p.overlap_v)?;
    d.set_item("overlap_u", p.overlap_u)?;
    d.set_item("sigma_plus", p.sigma_plus)?;
    Ok(d)
}

/// `(top eigenvalue, eigenvector overlap)` of classical PCA, symmetric model.
#[pyfunction]
fn classical_pca_sym(beta: f64) -> (f64, f64) {
    fixed_point::classical_pca_sym(beta)
}

#[pyfunction]
fn classical_pca_rec(beta: f64, alpha: f64) -> f64 {
    fixed_point::classical_pca_rec(beta, alpha)
}

#[pyfunction]
fn h_two_time(m: &PyMeasure, q: f64, tau1: f64, tau2: f64) -> PyResult<f64> {
    fixed_point::h_two_time(&m.inner, q, tau1, tau2).map_err(to_py)
}

/// `(q_seq, taus)` with `q_seq[k] = Q_{k+1,k+2}`.
#[pyfunction]
fn two_time_seq(m: &PyMeasure, beta: f64, t_max: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let tr = fixed_point::two_time_seq(&m.inner, beta, t_max).map_err(to_py)?;
    Ok((tr.q_seq, tr.taus))
}

fn report_dict<'py>(py: Python<'py>, r: WorstCaseReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("beta", r.beta)?;
    d.set_item("alpha", r.alpha)?;
    d.set_item("eps_bar", r.eps_bar)?;
    d.set_item(
        "regime",
        match r.regime {
            Regime::BelowThreshold => "below_threshold",
            Regime::AboveThreshold => "above_threshold",
        },
    )?;
    d.set_item("eps_star", r.eps_star)?;
    d.set_item("at_boundary", r.at_boundary)?;
    d.set_item("overlap_floor", r.overlap_floor)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (beta, eps_bar = 1.0))]
fn worst_eps_sym(py: Python<'_>, beta: f64, eps_bar: f64) -> PyResult<Bound<'_, PyDict>> {
    report_dict(py, worst_case::worst_eps_sym(beta, eps_bar).map_err(to_py)?)
}

#[pyfunction]
#[pyo3(signature = (beta, alpha, eps_bar = 1.0))]
fn worst_eps_rec(
    py: Python<'_>,
    beta: f64,
    alpha: f64,
    eps_bar: f64,
) -> PyResult<Bound<'_, PyDict>> {
    report_dict(
        py,
        worst_case::worst_eps_rec(beta, alpha, eps_bar).map_err(to_py)?,
    )
}

#[pyfunction]
fn two_point_signal(dim: usize, eps: f64) -> PyResult<Vec<f64>> {
    spiked::two_point_signal(dim, eps).map_err(to_py)
}

#[pyfunction]
fn signal_from_measure(dim: usize, m: &PyMeasure, seed: u64) -> PyResult<Vec<f64>> {
    Ok(spiked::signal_from_measure(dim, &m.inner, seed)
        .map_err(to_py)?
        .v)
}

#[pyfunction]
fn uniform_sphere(dim: usize, seed: u64) -> Vec<f64> {
    spiked::uniform_sphere(dim, seed)
}

fn matrix_from_rows(rows: Vec<Vec<f64>>) -> PyResult<DenseMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    DenseMatrix::from_row_major(r, c, rows.into_iter().flatten().collect()).map_err(to_py)
}

fn matrix_rows(x: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..x.rows()).map(|i| x.row(i).to_vec()).collect()
}

fn row_dict<'py>(py: Python<'py>, r: &AmpRow) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("t", r.t)?;
    d.set_item("overlap", r.overlap)?;
    d.set_item("rayleigh", r.rayleigh)?;
    d.set_item("onsager_b", r.onsager_b)?;
    d.set_item("onsager_d", r.onsager_d)?;
    d.set_item("pos_support_frac", r.pos_support_frac)?;
    d.set_item("step", r.step)?;
    d.set_item("overlap_u", r.overlap_u)?;
    Ok(d)
}

fn trace_rows<'py>(py: Python<'py>, tr: &AmpTrace) -> PyResult<Vec<Bound<'py, PyDict>>> {
    tr.rows.iter().map(|r| row_dict(py, r)).collect()
}

/// Symmetric AMP on an explicit matrix given as a list of rows.
#[pyfunction]
#[pyo3(signature = (x, v0 = None, t_max = 50, tol = 0.0))]
fn amp_sym(
    py: Python<'_>,
    x: Vec<Vec<f64>>,
    v0: Option<Vec<f64>>,
    t_max: usize,
    tol: f64,
) -> PyResult<Bound<'_, PyDict>> {
    let x = matrix_from_rows(x)?;
    sym_result(py, &x, v0.as_deref(), t_max, tol)
}

fn sym_result<'py>(
    py: Python<'py>,
    x: &DenseMatrix,
    v0: Option<&[f64]>,
    t_max: usize,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = py
        .detach(|| amp::amp_sym(x, v0, t_max, tol))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("v_hat", r.v_hat)?;
    d.set_item("converged", r.trace.converged)?;
    d.set_item("trace", trace_rows(py, &r.trace)?)?;
    Ok(d)
}

fn rec_result<'py>(
    py: Python<'py>,
    x: &DenseMatrix,
    u0: Option<&[f64]>,
    v0: Option<&[f64]>,
    t_max: usize,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = py
        .detach(|| amp::amp_rec(x, u0, v0, t_max, tol))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("u_hat", r.u_hat)?;
    d.set_item("v_hat", r.v_hat)?;
    d.set_item("converged", r.trace.converged)?;
    d.set_item("trace", trace_rows(py, &r.trace)?)?;
    Ok(d)
}

/// Rectangular AMP on an explicit `n x p` matrix.
#[pyfunction]
#[pyo3(signature = (x, u0 = None, v0 = None, t_max = 50, tol = 0.0))]
fn amp_rec(
    py: Python<'_>,
    x: Vec<Vec<f64>>,
    u0: Option<Vec<f64>>,
    v0: Option<Vec<f64>>,
    t_max: usize,
    tol: f64,
) -> PyResult<Bound<'_, PyDict>> {
    let x = matrix_from_rows(x)?;
    rec_result(py, &x, u0.as_deref(), v0.as_deref(), t_max, tol)
}

/// Returns `(eigenvalue, vector, iterations, converged)`.
#[pyfunction]
#[pyo3(signature = (x, t_max = 1000, tol = 1e-10))]
fn power_iteration(
    x: Vec<Vec<f64>>,
    t_max: usize,
    tol: f64,
) -> PyResult<(f64, Vec<f64>, usize, bool)> {
    let x = matrix_from_rows(x)?;
    let r = amp::power_iteration(&x, t_max, tol);
    Ok((r.eigenvalue, r.vector, r.iterations, r.converged))
}

/// Symmetric spiked instance `X = beta v0 v0' + Z`.
#[pyclass(name = "SpikedInstanceSym", module = "nnpca", frozen)]
struct PySym {
    inner: spiked::SpikedInstanceSym,
}

#[pymethods]
impl PySym {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn v0(&self) -> Vec<f64> {
        self.inner.v0.clone()
    }

    fn matrix(&self) -> Vec<Vec<f64>> {
        matrix_rows(&self.inner.x)
    }

    /// Runs AMP, recording overlaps with the planted signal.
    #[pyo3(signature = (t_max = 50, tol = 0.0))]
    fn amp<'py>(&self, py: Python<'py>, t_max: usize, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        sym_result(py, &self.inner.x, Some(&self.inner.v0), t_max, tol)
    }

    #[pyo3(signature = (t_max = 1000, tol = 1e-10))]
    fn power_iteration(&self, t_max: usize, tol: f64) -> (f64, Vec<f64>, usize, bool) {
        let r = amp::power_iteration(&self.inner.x, t_max, tol);
        (r.eigenvalue, r.vector, r.iterations, r.converged)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        spiked::InstanceDump::from(&self.inner)
            .save(path)
            .map_err(to_py)
    }
}

/// Rectangular spiked instance `X = sqrt(beta) u0 v0' + Z`.
#[pyclass(name = "SpikedInstanceRec", module = "nnpca", frozen)]
struct PyRec {
    inner: spiked::SpikedInstanceRec,
}

#[pymethods]
impl PyRec {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn u0(&self) -> Vec<f64> {
        self.inner.u0.clone()
    }

    #[getter]
    fn v0(&self) -> Vec<f64> {
        self.inner.v0.clone()
    }

    fn matrix(&self) -> Vec<Vec<f64>> {
        matrix_rows(&self.inner.x)
    }

    #[pyo3(signature = (t_max = 50, tol = 0.0))]
    fn amp<'py>(&self, py: Python<'py>, t_max: usize, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        rec_result(
            py,
            &self.inner.x,
            Some(&self.inner.u0),
            Some(&self.inner.v0),
            t_max,
            tol,
        )
    }

    fn save(&self, path: &str) -> PyResult<()> {
        spiked::InstanceDump::from(&self.inner)
            .save(path)
            .map_err(to_py)
    }
}

#[pyfunction]
fn gen_sym(py: Python<'_>, n: usize, beta: f64, v0: Vec<f64>, seed: u64) -> PyResult<PySym> {
    let inner = py
        .detach(|| spiked::gen_sym(n, beta, &v0, seed))
        .map_err(to_py)?;
    Ok(PySym { inner })
}

#[pyfunction]
fn gen_rec(
    py: Python<'_>,
    n: usize,
    p: usize,
    beta: f64,
    u0: Vec<f64>,
    v0: Vec<f64>,
    seed: u64,
) -> PyResult<PyRec> {
    let inner = py
        .detach(|| spiked::gen_rec(n, p, beta, &u0, &v0, seed))
        .map_err(to_py)?;
    Ok(PyRec { inner })
}

/// Runs a harness command (`predict`, `simulate`, `sweep` or `worstcase`)
/// with the same settings as the command line and returns its output text.
#[pyfunction]
fn run_experiment(
    py: Python<'_>,
    command: &str,
    settings: BTreeMap<String, String>,
) -> PyResult<String> {
    let command = match command {
        "predict" => Command::Predict,
        "simulate" => Command::Simulate,
        "sweep" => Command::Sweep,
        "worstcase" => Command::Worstcase,
        other => return Err(PyValueError::new_err(format!("unknown command {other:?}"))),
    };
    let settings = settings
        .into_iter()
        .map(|(k, v)| (k.replace('_', "-"), v))
        .collect();
    let cfg = ExperimentConfig::from_settings(command, &settings).map_err(to_py)?;
    py.detach(|| experiments::run(&cfg)).map_err(to_py)
}

#[pymodule]
pub fn nnpca(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMeasure>()?;
    m.add_class::<PySym>()?;
    m.add_class::<PyRec>()?;
    m.add_function(wrap_pyfunction!(dee, m)?)?;
    m.add_function(wrap_pyfunction!(eff, m)?)?;
    m.add_function(wrap_pyfunction!(gee, m)?)?;
    m.add_function(wrap_pyfunction!(eff_eps_closed, m)?)?;
    m.add_function(wrap_pyfunction!(rayleigh_sym, m)?)?;
    m.add_function(wrap_pyfunction!(rayleigh_rec, m)?)?;
    m.add_function(wrap_pyfunction!(overlap_sym0, m)?)?;
    m.add_function(wrap_pyfunction!(overlap_rec0, m)?)?;
    m.add_function(wrap_pyfunction!(solve_t, m)?)?;
    m.add_function(wrap_pyfunction!(solve_s, m)?)?;
    m.add_function(wrap_pyfunction!(se_sym, m)?)?;
    m.add_function(wrap_pyfunction!(se_rec, m)?)?;
    m.add_function(wrap_pyfunction!(classical_pca_sym, m)?)?;
    m.add_function(wrap_pyfunction!(classical_pca_rec, m)?)?;
    m.add_function(wrap_pyfunction!(h_two_time, m)?)?;
    m.add_function(wrap_pyfunction!(two_time_seq, m)?)?;
    m.add_function(wrap_pyfunction!(worst_eps_sym, m)?)?;
    m.add_function(wrap_pyfunction!(worst_eps_rec, m)?)?;
    m.add_function(wrap_pyfunction!(two_point_signal, m)?)?;
    m.add_function(wrap_pyfunction!(signal_from_measure, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_sphere, m)?)?;
    m.add_function(wrap_pyfunction!(gen_sym, m)?)?;
    m.add_function(wrap_pyfunction!(gen_rec, m)?)?;
    m.add_function(wrap_pyfunction!(amp_sym, m)?)?;
    m.add_function(wrap_pyfunction!(amp_rec, m)?)?;
    m.add_function(wrap_pyfunction!(power_iteration, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
