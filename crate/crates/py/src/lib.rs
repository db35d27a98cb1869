//! Python bindings: the closed-form two-mode analytics, the Fock oracle,
//! revival detection, and the config-driven experiment pipelines.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use oaxis_core::config::{preset as core_preset, ExperimentConfig};
use oaxis_core::pipeline;
use oaxis_core::twomode;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Closed-form normalized number-difference variance v(N, lambda, theta).
#[pyfunction]
fn two_mode_variance(n_total: f64, lambda: f64, theta: f64) -> f64 {
    twomode::two_mode_variance(n_total, lambda, theta)
}

/// Small-lambda approximation of `two_mode_variance`.
#[pyfunction]
fn two_mode_variance_small_lambda(n_total: f64, lambda: f64, theta: f64) -> f64 {
    twomode::two_mode_variance_small_lambda(n_total, lambda, theta)
}

/// Variance of 2 Jx before the readout beamsplitter.
#[pyfunction]
fn two_mode_jx_variance(n_total: f64, lambda: f64) -> f64 {
    twomode::two_mode_jx_variance(n_total, lambda)
}

/// Minimize the closed-form variance; returns (lambda_opt, theta_opt, v_min).
#[pyfunction]
fn optimal_squeezing(n_total: f64) -> PyResult<(f64, f64, f64)> {
    let opt = twomode::optimal_squeezing(n_total).map_err(err)?;
    Ok((opt.lambda, opt.theta, opt.v))
}

/// Exact two-mode reference state in a truncated Fock basis.
#[pyclass]
struct FockOracle {
    inner: twomode::FockOracle,
}

#[pymethods]
impl FockOracle {
    #[new]
    #[pyo3(signature = (n_total, lambda1, lambda2, tail_tol=1e-14))]
    fn new(n_total: f64, lambda1: f64, lambda2: f64, tail_tol: f64) -> PyResult<Self> {
        Ok(FockOracle {
            inner: twomode::FockOracle::new(n_total, lambda1, lambda2, tail_tol).map_err(err)?,
        })
    }

    /// Normalized variance at the standard readout phase.
    fn normalized_variance(&self, theta: f64) -> f64 {
        self.inner.normalized_variance(theta)
    }

    /// (mean, variance) of the number difference after a (theta, phi)
    /// readout beamsplitter.
    fn difference_stats(&self, theta: f64, phi: f64) -> (f64, f64) {
        self.inner.difference_stats(theta, phi)
    }

    /// (<Jx>, V(2 Jx)).
    fn jx_stats(&self) -> (f64, f64) {
        self.inner.jx_stats()
    }

    #[getter]
    fn n_total(&self) -> f64 {
        self.inner.n_total()
    }
}

/// First overlap-revival time from a (times, Q) series.
#[pyfunction]
fn detect_t_pi(times: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    pipeline::detect_t_pi(&times, &q).map_err(err)
}

/// JSON text of a named preset configuration (ci-small, paper-3d).
#[pyfunction]
fn preset(name: &str) -> PyResult<String> {
    core_preset(name).map_err(err)?.to_json().map_err(err)
}

/// Validate a JSON configuration; raises on the first problem.
#[pyfunction]
fn validate_config(config_json: &str) -> PyResult<()> {
    ExperimentConfig::from_json(config_json).map(|_| ()).map_err(err)
}

/// Run a full experiment from a JSON configuration; returns the manifest
/// as JSON.
#[pyfunction]
fn run_experiment(config_json: &str, out_dir: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::from_json(config_json).map_err(err)?;
    let manifest =
        pipeline::run_experiment(&cfg, std::path::Path::new(out_dir)).map_err(err)?;
    serde_json::to_string_pretty(&manifest).map_err(err)
}

#[pymodule]
fn oaxis(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(two_mode_variance, m)?)?;
    m.add_function(wrap_pyfunction!(two_mode_variance_small_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(two_mode_jx_variance, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_squeezing, m)?)?;
    m.add_function(wrap_pyfunction!(detect_t_pi, m)?)?;
    m.add_function(wrap_pyfunction!(preset, m)?)?;
    m.add_function(wrap_pyfunction!(validate_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_class::<FockOracle>()?;
    Ok(())
}
