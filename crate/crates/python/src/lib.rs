//! Python bindings. Matrices cross the boundary as lists of rows, vectors as
//! lists of floats; everything is copied into `sgl_core` types.

use ndarray::{Array1, Array2};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use sgl_core::oracle::{fit_oracle, OracleOptions};
use sgl_core::sim::{self, SimConfig};
use sgl_core::{Coefficients, GroupedProblem, PathSpec, PenaltySpec, SglError, SolverOptions, WeightMode};

fn value_error(e: SglError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rows_to_array(rows: Vec<Vec<f64>>) -> PyResult<Array2<f64>> {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != p) {
        return Err(PyValueError::new_err("all rows of x must have the same length"));
    }
    Array2::from_shape_vec((n, p), rows.into_iter().flatten().collect())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

fn weight_mode(name: &str) -> PyResult<WeightMode> {
    match name {
        "unit" => Ok(WeightMode::Unit),
        "sqrt" => Ok(WeightMode::SqrtSize),
        other => Err(PyValueError::new_err(format!("weights must be 'unit' or 'sqrt', got {other:?}"))),
    }
}

fn solver_options(tol: f64, max_sweeps: usize, fast_path: bool) -> SolverOptions {
    SolverOptions {
        outer_tol: tol,
        max_sweeps,
        orthonormal_fast_path: fast_path,
        ..SolverOptions::default()
    }
}

/// Centered regression problem with a contiguous group partition.
#[pyclass(name = "Problem", module = "sgl", frozen)]
pub struct PyProblem {
    inner: GroupedProblem,
}

#[pymethods]
impl PyProblem {
    #[new]
    #[pyo3(signature = (y, x, group_sizes, weights = "unit"))]
    fn new(y: Vec<f64>, x: Vec<Vec<f64>>, group_sizes: Vec<usize>, weights: &str) -> PyResult<Self> {
        let x = rows_to_array(x)?;
        let y = Array1::from(y);
        let inner = GroupedProblem::build(y.view(), x.view(), &group_sizes, weight_mode(weights)?).map_err(value_error)?;
        Ok(PyProblem { inner })
    }

    #[getter]
    fn n_samples(&self) -> usize {
        self.inner.n_samples()
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.inner.n_features()
    }

    #[getter]
    fn group_sizes(&self) -> Vec<usize> {
        self.inner.groups().sizes()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    fn objective(&self, beta: Vec<f64>, lambda1: f64, lambda2: f64) -> PyResult<f64> {
        let beta = Coefficients::from_vec(beta).map_err(value_error)?;
        let penalty = PenaltySpec::new(lambda1, lambda2).map_err(value_error)?;
        self.inner.objective(&beta, &penalty).map_err(value_error)
    }

    /// Predictions on raw (uncentered) rows, intercept included.
    fn predict(&self, beta: Vec<f64>, x: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        let beta = Coefficients::from_vec(beta).map_err(value_error)?;
        let x = rows_to_array(x)?;
        Ok(self.inner.predict(&beta, x.view()).map_err(value_error)?.to_vec())
    }

    /// Smallest total level with an all-zero solution for mixing `alpha`.
    fn lambda_max(&self, alpha: f64) -> PyResult<f64> {
        sgl_core::lambda_max(&self.inner, alpha).map_err(value_error)
    }

    /// Worst KKT violation, plus the per-group residuals.
    fn kkt(&self, beta: Vec<f64>, lambda1: f64, lambda2: f64) -> PyResult<(f64, Vec<f64>)> {
        let beta = Coefficients::from_vec(beta).map_err(value_error)?;
        let penalty = PenaltySpec::new(lambda1, lambda2).map_err(value_error)?;
        let report = sgl_core::kkt_residual(&self.inner, &beta, &penalty).map_err(value_error)?;
        Ok((report.worst_violation, report.group_residuals))
    }

    #[pyo3(signature = (lambda1, lambda2, tol = 1e-7, max_sweeps = 10_000, fast_path = true, warm = None))]
    #[allow(clippy::too_many_arguments)]
    fn fit(
        &self,
        py: Python<'_>,
        lambda1: f64,
        lambda2: f64,
        tol: f64,
        max_sweeps: usize,
        fast_path: bool,
        warm: Option<Vec<f64>>,
    ) -> PyResult<PyFit> {
        let penalty = PenaltySpec::new(lambda1, lambda2).map_err(value_error)?;
        let warm = warm.map(Coefficients::from_vec).transpose().map_err(value_error)?;
        let opts = solver_options(tol, max_sweeps, fast_path);
        let result = py
            .detach(|| sgl_core::fit(&self.inner, &penalty, &opts, warm.as_ref()))
            .map_err(value_error)?;
        Ok(PyFit {
            coefficients: result.coefficients.as_slice().to_vec(),
            objective: result.objective,
            sweeps: result.sweeps,
            converged: result.converged,
            kkt_worst: result.kkt.worst_violation,
            objective_trace: result.objective_trace,
        })
    }

    #[pyo3(signature = (alpha = 0.5, n_points = 100, ratio_min = 1e-3, tol = 1e-7, max_sweeps = 10_000))]
    fn fit_path(
        &self,
        py: Python<'_>,
        alpha: f64,
        n_points: usize,
        ratio_min: f64,
        tol: f64,
        max_sweeps: usize,
    ) -> PyResult<PyPath> {
        let spec = PathSpec {
            n_points,
            ratio_min,
            mixing: alpha,
        };
        let opts = solver_options(tol, max_sweeps, true);
        let path = py
            .detach(|| sgl_core::fit_path(&self.inner, &spec, &opts))
            .map_err(value_error)?;
        Ok(PyPath {
            alpha: path.mixing,
            lambda_max: path.lambda_max,
            converged: path.points.iter().map(|p| p.converged).collect(),
            objectives: path.points.iter().map(|p| p.objective).collect(),
            active_groups: path.points.iter().map(|p| p.active_groups).collect(),
            coefficients: path.points.iter().map(|p| p.coefficients.as_slice().to_vec()).collect(),
            lambdas: path.lambdas,
        })
    }

    /// Proximal-gradient reference solution: `(coefficients, objective, iterations)`.
    #[pyo3(signature = (lambda1, lambda2, max_iters = 1_000_000))]
    fn oracle(&self, py: Python<'_>, lambda1: f64, lambda2: f64, max_iters: usize) -> PyResult<(Vec<f64>, f64, usize)> {
        let penalty = PenaltySpec::new(lambda1, lambda2).map_err(value_error)?;
        let opts = OracleOptions {
            max_iters,
            ..OracleOptions::default()
        };
        let result = py.detach(|| fit_oracle(&self.inner, &penalty, &opts)).map_err(value_error)?;
        Ok((result.coefficients.as_slice().to_vec(), result.objective, result.iterations))
    }
}

#[pyclass(name = "Fit", module = "sgl", frozen, get_all)]
pub struct PyFit {
    coefficients: Vec<f64>,
    objective: f64,
    sweeps: usize,
    converged: bool,
    kkt_worst: f64,
    objective_trace: Vec<f64>,
}

#[pymethods]
impl PyFit {
    fn __repr__(&self) -> String {
        format!(
            "Fit(objective={}, sweeps={}, converged={}, kkt_worst={:e})",
            self.objective, self.sweeps, self.converged, self.kkt_worst
        )
    }
}

#[pyclass(name = "Path", module = "sgl", frozen, get_all)]
pub struct PyPath {
    alpha: f64,
    lambda_max: f64,
    lambdas: Vec<f64>,
    objectives: Vec<f64>,
    active_groups: Vec<usize>,
    converged: Vec<bool>,
    coefficients: Vec<Vec<f64>>,
}

#[pymethods]
impl PyPath {
    fn __len__(&self) -> usize {
        self.lambdas.len()
    }
}

/// Block-correlated synthetic data: returns `(y, x_rows, beta_true, block_sizes)`.
#[pyfunction]
#[pyo3(signature = (seed = 1, n = 200, n_blocks = 10, block_size = 10, counts = None, rho = 0.2, noise_sd = 4.0))]
#[allow(clippy::type_complexity)]
fn simulate(
    seed: u64,
    n: usize,
    n_blocks: usize,
    block_size: usize,
    counts: Option<Vec<usize>>,
    rho: f64,
    noise_sd: f64,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>, Vec<f64>, Vec<usize>)> {
    let defaults = SimConfig::default();
    let config = SimConfig {
        n,
        block_sizes: vec![block_size; n_blocks],
        nonzero_counts: counts.unwrap_or(defaults.nonzero_counts),
        rho,
        noise_sd,
        seed,
        ..defaults
    };
    let data = sim::generate(&config).map_err(value_error)?;
    let rows = data.x.outer_iter().map(|r| r.to_vec()).collect();
    Ok((data.y.to_vec(), rows, data.beta_true.to_vec(), config.block_sizes))
}

/// `(group, coefficient)` zero/nonzero disagreements between truth and estimate.
#[pyfunction]
fn misclassification(group_sizes: Vec<usize>, beta_true: Vec<f64>, beta_est: Vec<f64>) -> PyResult<(usize, usize)> {
    let groups = sgl_core::Groups::from_sizes(&group_sizes).map_err(value_error)?;
    let est = Coefficients::from_vec(beta_est).map_err(value_error)?;
    sim::misclassification(&groups, &beta_true, &est).map_err(value_error)
}

#[pymodule]
fn sgl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PyFit>()?;
    m.add_class::<PyPath>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(misclassification, m)?)?;
    Ok(())
}
