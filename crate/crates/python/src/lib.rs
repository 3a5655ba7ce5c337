//! Python bindings for `cotunnel`.

use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use cotunnel::closedform::{path_closed_form as cf_path, total_singlet_closed_form as cf_total, Params};
use cotunnel::model::{validate_config, SpinPair};
use cotunnel::oracle;
use cotunnel::perturbation;
use cotunnel::{Error, PathLabel};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Usage(_) | Error::Config(_) | Error::ConfigFile(_) => PyValueError::new_err(e.to_string()),
        Error::Pole { .. } | Error::Numeric { .. } | Error::Regime(_) => PyArithmeticError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn spins(s: &str) -> PyResult<SpinPair> {
    s.parse().map_err(to_py)
}

/// Energy configuration of the dot and its three leads.
#[pyclass(name = "EnergyConfig", from_py_object)]
#[derive(Clone)]
pub struct PyEnergyConfig {
    inner: cotunnel::EnergyConfig,
}

#[pymethods]
impl PyEnergyConfig {
    #[new]
    #[pyo3(signature = (e_l, delta_l, delta_r, u, v=0.01, eps_d=0.0, degeneracy_tol=1e-9))]
    fn new(e_l: f64, delta_l: f64, delta_r: f64, u: f64, v: f64, eps_d: f64, degeneracy_tol: f64) -> Self {
        let mut inner = cotunnel::EnergyConfig::new(e_l, delta_l, delta_r, u).with_coupling(v).with_eps_d(eps_d);
        inner.degeneracy_tol = degeneracy_tol;
        PyEnergyConfig { inner }
    }

    /// Violated invariants as messages; empty when valid.
    fn violations(&self) -> Vec<String> {
        validate_config(&self.inner).iter().map(|v| v.to_string()).collect()
    }

    fn with_u(&self, u: f64) -> Self {
        PyEnergyConfig { inner: self.inner.with_u(u) }
    }

    fn with_coupling(&self, v: f64) -> Self {
        PyEnergyConfig { inner: self.inner.with_coupling(v) }
    }

    #[getter]
    fn e_l(&self) -> f64 {
        self.inner.e_l
    }

    #[getter]
    fn delta_l(&self) -> f64 {
        self.inner.delta_l
    }

    #[getter]
    fn delta_r(&self) -> f64 {
        self.inner.delta_r
    }

    #[getter]
    fn u(&self) -> f64 {
        self.inner.u
    }

    #[getter]
    fn coupling_product(&self) -> f64 {
        self.inner.coupling_product()
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "EnergyConfig(e_l={}, delta_l={}, delta_r={}, u={}, v_l={}, v_r1={}, v_r2={})",
            c.e_l, c.delta_l, c.delta_r, c.u, c.v_l, c.v_r1, c.v_r2
        )
    }
}

/// Total output amplitudes `(singlet, triplet_m0, triplet_up, triplet_down)`.
#[pyfunction]
#[pyo3(signature = (config, spin_pair="ud"))]
fn total_output(config: &PyEnergyConfig, spin_pair: &str) -> PyResult<(f64, f64, f64, f64)> {
    let d = perturbation::total_output(&config.inner, spins(spin_pair)?).map_err(to_py)?;
    Ok((d.singlet.re, d.triplet_m0.re, d.triplet_up.re, d.triplet_down.re))
}

/// Per-path `(label, singlet, triplet_m0)` from the perturbative engine.
#[pyfunction]
#[pyo3(signature = (config, spin_pair="ud"))]
fn path_amplitudes(config: &PyEnergyConfig, spin_pair: &str) -> PyResult<Vec<(String, f64, f64)>> {
    let paths = perturbation::path_amplitudes(&config.inner, spins(spin_pair)?).map_err(to_py)?;
    Ok(paths
        .iter()
        .map(|p| (p.label.to_string(), p.singlet_coeff().re, p.triplet0_coeff().re))
        .collect())
}

/// Closed-form `(singlet, triplet_m0)` of one path.
#[pyfunction]
fn path_closed_form(label: &str, config: &PyEnergyConfig) -> PyResult<(f64, f64)> {
    let label: PathLabel = label.parse().map_err(to_py)?;
    let r = cf_path(label, &Params::from(&config.inner)).map_err(to_py)?;
    Ok((r.singlet, r.triplet0))
}

#[pyfunction]
fn total_singlet_closed_form(config: &PyEnergyConfig) -> PyResult<f64> {
    cf_total(&Params::from(&config.inner)).map_err(to_py)
}

/// Exact evolution; returns a dict of time series.
#[pyfunction]
#[pyo3(signature = (config, times, spin_pair="ud"))]
fn transition_probabilities<'py>(
    py: Python<'py>,
    config: &PyEnergyConfig,
    times: Vec<f64>,
    spin_pair: &str,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let r = oracle::transition_probabilities(&config.inner, spins(spin_pair)?, &times).map_err(to_py)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("t", r.times)?;
    d.set_item("p_singlet", r.p_singlet)?;
    d.set_item("p_triplet_total", r.p_triplet_total)?;
    d.set_item("p_leak", r.p_leak)?;
    d.set_item("p_remaining", r.p_remaining)?;
    d.set_item("norm", r.norm)?;
    d.set_item("norm_drift", r.norm_drift)?;
    Ok(d)
}

/// Least-squares `p = c t^2`; returns `(c, residual)`.
#[pyfunction]
fn fit_quadratic(times: Vec<f64>, probabilities: Vec<f64>) -> PyResult<(f64, f64)> {
    let f = oracle::fit_quadratic(&times, &probabilities).map_err(to_py)?;
    Ok((f.coefficient, f.residual))
}

#[pyfunction]
fn predicted_growth(config: &PyEnergyConfig) -> PyResult<f64> {
    oracle::predicted_growth(&config.inner).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (config, points=40))]
fn on_shell_window(config: &PyEnergyConfig, points: usize) -> Vec<f64> {
    oracle::on_shell_window(&config.inner, points)
}

#[pymodule]
fn cotunnel_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEnergyConfig>()?;
    m.add_function(wrap_pyfunction!(total_output, m)?)?;
    m.add_function(wrap_pyfunction!(path_amplitudes, m)?)?;
    m.add_function(wrap_pyfunction!(path_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(total_singlet_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(transition_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(fit_quadratic, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_growth, m)?)?;
    m.add_function(wrap_pyfunction!(on_shell_window, m)?)?;
    Ok(())
}
