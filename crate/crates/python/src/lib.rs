//! Python bindings for `cvtele`.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use cvtele::capacity::{self, Bound as CapBound};
use cvtele::gaussian::{self, CovMatrix};
use cvtele::multiplex;
use cvtele::optimizer::{self, BestParams, Coding};
use cvtele::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Validation(_) | Error::Domain(_) => PyValueError::new_err(e.to_string()),
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_bound(name: &str) -> PyResult<CapBound> {
    name.parse().map_err(to_py)
}

fn cov_matrix(rows: Vec<Vec<f64>>) -> PyResult<CovMatrix> {
    let dim = rows.len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(PyValueError::new_err("covariance matrix must be square"));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    CovMatrix::from_row_slice(dim, &flat).map_err(to_py)
}

fn rows_of(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// A squeezing distribution over the modes of a multiplexed EPR resource.
#[pyclass(name = "SqueezingDistribution", module = "pycvtele", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDistribution {
    inner: multiplex::SqueezingDistribution,
}

#[pymethods]
impl PyDistribution {
    #[new]
    fn new(r: Vec<f64>) -> PyResult<Self> {
        Ok(PyDistribution { inner: multiplex::SqueezingDistribution::custom(r).map_err(to_py)? })
    }

    /// PDC family; truncated at the standard cutoff when `modes` is None.
    #[staticmethod]
    #[pyo3(signature = (gain, mu, modes=None))]
    fn pdc(gain: f64, mu: f64, modes: Option<usize>) -> PyResult<Self> {
        let inner = match modes {
            Some(m) => multiplex::pdc_distribution(gain, mu, m),
            None => multiplex::pdc_truncated(gain, mu),
        };
        Ok(PyDistribution { inner: inner.map_err(to_py)? })
    }

    #[staticmethod]
    fn flat(modes: usize, r: f64) -> PyResult<Self> {
        Ok(PyDistribution { inner: multiplex::flat_distribution(modes, r).map_err(to_py)? })
    }

    /// PDC distribution with decay `mu` scaled to `n_ph` mean photons.
    #[staticmethod]
    fn pdc_for_energy(mu: f64, n_ph: f64) -> PyResult<Self> {
        let modes = multiplex::pdc_mode_count(mu).map_err(to_py)?;
        let budget = multiplex::EnergyBudget::new(n_ph).map_err(to_py)?;
        let inner = multiplex::gain_for_energy(multiplex::EnergyFamily::Pdc { mu, modes }, budget).map_err(to_py)?;
        Ok(PyDistribution { inner })
    }

    #[getter]
    fn amplitudes(&self) -> Vec<f64> {
        self.inner.amplitudes().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn mean_photon(&self) -> f64 {
        multiplex::mean_photon(&self.inner).value()
    }

    fn effective_modes(&self) -> PyResult<f64> {
        multiplex::effective_mode_number(&self.inner).map_err(to_py)
    }

    /// Per-mode and total bounds as a dict.
    #[pyo3(signature = (eta=1.0))]
    fn report<'py>(&self, py: Python<'py>, eta: f64) -> PyResult<Bound<'py, PyDict>> {
        let rep = capacity::report(&self.inner, eta).map_err(to_py)?;
        let out = PyDict::new(py);
        let modes: Vec<Bound<'py, PyDict>> = rep
            .per_mode
            .iter()
            .map(|m| {
                let d = PyDict::new(py);
                d.set_item("k", m.k)?;
                d.set_item("r_k", m.r_k)?;
                d.set_item("n_k", m.n_k)?;
                d.set_item("qg", m.qg)?;
                d.set_item("qa", m.qa)?;
                d.set_item("qe", m.qe)?;
                Ok(d)
            })
            .collect::<PyResult<_>>()?;
        out.set_item("per_mode", modes)?;
        out.set_item("qg", rep.totals.qg)?;
        out.set_item("qa", rep.totals.qa)?;
        out.set_item("qe", rep.totals.qe)?;
        out.set_item("eta", rep.eta)?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!("SqueezingDistribution({} modes, {:?})", self.inner.len(), self.inner.label())
    }
}

/// Outcome of a constrained optimisation.
#[pyclass(name = "OptResult", module = "pycvtele", frozen)]
struct PyOptResult {
    inner: optimizer::OptResult,
}

#[pymethods]
impl PyOptResult {
    #[getter]
    fn best_k(&self) -> f64 {
        self.inner.best_k
    }

    #[getter]
    fn best_value(&self) -> f64 {
        self.inner.best_value
    }

    #[getter]
    fn bound(&self) -> &'static str {
        self.inner.bound.name()
    }

    #[getter]
    fn n_ph(&self) -> f64 {
        self.inner.n_ph
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta
    }

    #[getter]
    fn lagrange_multiplier(&self) -> Option<f64> {
        self.inner.lagrange_multiplier
    }

    #[getter]
    fn r_opt(&self) -> f64 {
        self.inner.r_opt()
    }

    /// `{"family": "flat", "K", "r"}` or `{"family": "pdc", "B", "mu"}`.
    #[getter]
    fn best_params<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        match self.inner.best_params {
            BestParams::Flat { modes, r } => {
                d.set_item("family", "flat")?;
                d.set_item("K", modes)?;
                d.set_item("r", r)?;
            }
            BestParams::Pdc { gain, mu } => {
                d.set_item("family", "pdc")?;
                d.set_item("B", gain)?;
                d.set_item("mu", mu)?;
            }
        }
        Ok(d)
    }

    #[getter]
    fn distribution(&self) -> PyDistribution {
        PyDistribution { inner: self.inner.distribution.clone() }
    }

    fn __repr__(&self) -> String {
        format!(
            "OptResult(bound={}, best_k={}, best_value={}, n_ph={}, eta={})",
            self.inner.bound, self.inner.best_k, self.inner.best_value, self.inner.n_ph, self.inner.eta
        )
    }
}

#[pyfunction]
fn qg_single(n_param: f64) -> PyResult<f64> {
    capacity::qg_single(n_param).map_err(to_py)
}

#[pyfunction]
fn qa_single(n_param: f64) -> PyResult<f64> {
    capacity::qa_single(n_param).map_err(to_py)
}

#[pyfunction]
fn qe_single(n_param: f64) -> PyResult<f64> {
    capacity::qe_single(n_param).map_err(to_py)
}

#[pyfunction]
fn n_from_loss(r: f64, eta: f64) -> PyResult<f64> {
    capacity::n_from_loss(r, eta).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (r, eta, bound="QG"))]
fn mode_capacity(r: f64, eta: f64, bound: &str) -> PyResult<f64> {
    capacity::mode_capacity(r, eta, parse_bound(bound)?).map_err(to_py)
}

#[pyfunction]
fn coherent_information_finite_s(n_param: f64, s: f64) -> PyResult<f64> {
    capacity::coherent_information_finite_s(n_param, s).map_err(to_py)
}

#[pyfunction]
fn log_negativity_finite_s(n_param: f64, s: f64) -> PyResult<f64> {
    capacity::log_negativity_finite_s(n_param, s).map_err(to_py)
}

/// Symplectic eigenvalues of a covariance matrix given as nested lists.
#[pyfunction]
fn symplectic_eigenvalues(cm: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    Ok(gaussian::symplectic_eigenvalues(&cov_matrix(cm)?).map_err(to_py)?.values)
}

#[pyfunction]
fn von_neumann_entropy(cm: Vec<Vec<f64>>) -> PyResult<f64> {
    gaussian::von_neumann_entropy(&cov_matrix(cm)?).map_err(to_py)
}

#[pyfunction]
fn log_negativity(cm: Vec<Vec<f64>>) -> PyResult<f64> {
    gaussian::log_negativity(&cov_matrix(cm)?).map_err(to_py)
}

/// Covariance matrix of a two-mode squeezed vacuum.
#[pyfunction]
fn epr_cm(r: f64) -> PyResult<Vec<Vec<f64>>> {
    Ok(rows_of(cvtele::channel::epr_cm(r).map_err(to_py)?.cm().matrix()))
}

/// Thermal parameter `N` of the channel induced by a two-mode resource.
#[pyfunction]
fn thermal_parameter(resource_cm: Vec<Vec<f64>>) -> PyResult<f64> {
    let dim = resource_cm.len();
    let cm = cov_matrix(resource_cm)?;
    let st = gaussian::GaussianState::new(nalgebra::DVector::zeros(dim), cm).map_err(to_py)?;
    let noise = cvtele::channel::noise_from_resource(&st).map_err(to_py)?;
    Ok(cvtele::channel::thermal_n(&noise, cvtele::channel::THERMAL_TOL).map_err(to_py)?.n_param)
}

#[pyfunction]
#[pyo3(signature = (k, n_ph, eta=1.0, bound="QG"))]
fn q_flat(k: usize, n_ph: f64, eta: f64, bound: &str) -> PyResult<f64> {
    optimizer::q_flat(k, n_ph, eta, parse_bound(bound)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (n_ph, eta=1.0, bound="QG"))]
fn optimize_flat(n_ph: f64, eta: f64, bound: &str) -> PyResult<PyOptResult> {
    Ok(PyOptResult { inner: optimizer::optimize_flat(n_ph, eta, parse_bound(bound)?).map_err(to_py)? })
}

#[pyfunction]
#[pyo3(signature = (n_ph, eta=1.0, bound="QG", mu_grid=None))]
fn optimize_pdc(py: Python<'_>, n_ph: f64, eta: f64, bound: &str, mu_grid: Option<Vec<f64>>) -> PyResult<PyOptResult> {
    let b = parse_bound(bound)?;
    let grid = mu_grid.unwrap_or_else(optimizer::default_mu_grid);
    let inner = py.detach(|| optimizer::optimize_pdc(n_ph, eta, b, &grid)).map_err(to_py)?;
    Ok(PyOptResult { inner })
}

#[pyfunction]
#[pyo3(signature = (bound, eta=1.0))]
fn find_threshold(bound: &str, eta: f64) -> PyResult<f64> {
    optimizer::find_threshold(parse_bound(bound)?, eta, optimizer::THRESHOLD_BRACKET).map_err(to_py)
}

/// `(r, dB, rate per photon)` of the optimal per-mode squeezing.
#[pyfunction]
#[pyo3(signature = (eta=1.0, bound="QG"))]
fn optimal_mode_squeezing(eta: f64, bound: &str) -> PyResult<(f64, f64, f64)> {
    let o = optimizer::optimal_mode_squeezing(eta, parse_bound(bound)?).map_err(to_py)?;
    Ok((o.r, o.db, o.rate_per_photon))
}

#[pyfunction]
fn mu_for_effective_modes(k: f64) -> PyResult<f64> {
    optimizer::mu_for_effective_modes(k).map_err(to_py)
}

#[pyfunction]
fn squeezing_db(r: f64) -> PyResult<f64> {
    multiplex::squeezing_db(r).map_err(to_py)
}

#[pyfunction]
fn db_to_r(db: f64) -> PyResult<f64> {
    multiplex::db_to_r(db).map_err(to_py)
}

fn parse_coding(name: &str, k: Option<usize>, mu: Option<f64>) -> PyResult<Coding> {
    Ok(match name {
        "single" => Coding::Single,
        "flat" => Coding::Flat { modes: k.ok_or_else(|| PyValueError::new_err("flat coding needs k"))? },
        "pdc" => Coding::Pdc { mu: mu.ok_or_else(|| PyValueError::new_err("pdc coding needs mu"))? },
        "flat-optimal" => Coding::FlatOptimal,
        "pdc-optimal" => Coding::PdcOptimal,
        other => return Err(PyValueError::new_err(format!("unknown coding {other:?}"))),
    })
}

type Row = (f64, f64, f64, f64, f64, f64);

/// Rows `(x, qg, qa, qe, k_opt, r_opt)` over energies.
#[pyfunction]
#[pyo3(signature = (grid, eta=1.0, coding="pdc-optimal", bound="QG", k=None, mu=None))]
fn sweep_energy(
    py: Python<'_>,
    grid: Vec<f64>,
    eta: f64,
    coding: &str,
    bound: &str,
    k: Option<usize>,
    mu: Option<f64>,
) -> PyResult<Vec<Row>> {
    let c = parse_coding(coding, k, mu)?;
    let b = parse_bound(bound)?;
    let mu_grid = optimizer::default_mu_grid();
    let res = py.detach(|| optimizer::sweep_energy(&grid, eta, &[c], b, &mu_grid)).map_err(to_py)?;
    Ok(res[0].rows.iter().map(|r| (r.x, r.qg, r.qa, r.qe, r.k_opt, r.r_opt)).collect())
}

/// Rows `(eta, qg, qa, qe, k_opt, r_opt)` over transmissivities.
#[pyfunction]
#[pyo3(signature = (grid, n_ph, coding="pdc-optimal", bound="QG", k=None, mu=None))]
fn sweep_loss(
    py: Python<'_>,
    grid: Vec<f64>,
    n_ph: f64,
    coding: &str,
    bound: &str,
    k: Option<usize>,
    mu: Option<f64>,
) -> PyResult<Vec<Row>> {
    let c = parse_coding(coding, k, mu)?;
    let b = parse_bound(bound)?;
    let mu_grid = optimizer::default_mu_grid();
    let res = py.detach(|| optimizer::sweep_loss(&grid, n_ph, &[c], b, &mu_grid)).map_err(to_py)?;
    Ok(res[0].rows.iter().map(|r| (r.x, r.qg, r.qa, r.qe, r.k_opt, r.r_opt)).collect())
}

/// `(name, passed, detail)` for each self-check.
#[pyfunction]
#[pyo3(signature = (seed=0, trials=500))]
fn verify(seed: u64, trials: usize) -> PyResult<Vec<(String, bool, String)>> {
    let checks = cvtele::verify::run_all(seed, trials).map_err(to_py)?;
    Ok(checks.into_iter().map(|c| (c.name, c.passed, c.detail)).collect())
}

#[pymodule]
pub fn pycvtele(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDistribution>()?;
    m.add_class::<PyOptResult>()?;
    m.add_function(wrap_pyfunction!(qg_single, m)?)?;
    m.add_function(wrap_pyfunction!(qa_single, m)?)?;
    m.add_function(wrap_pyfunction!(qe_single, m)?)?;
    m.add_function(wrap_pyfunction!(n_from_loss, m)?)?;
    m.add_function(wrap_pyfunction!(mode_capacity, m)?)?;
    m.add_function(wrap_pyfunction!(coherent_information_finite_s, m)?)?;
    m.add_function(wrap_pyfunction!(log_negativity_finite_s, m)?)?;
    m.add_function(wrap_pyfunction!(symplectic_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(von_neumann_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(log_negativity, m)?)?;
    m.add_function(wrap_pyfunction!(epr_cm, m)?)?;
    m.add_function(wrap_pyfunction!(thermal_parameter, m)?)?;
    m.add_function(wrap_pyfunction!(q_flat, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_flat, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_pdc, m)?)?;
    m.add_function(wrap_pyfunction!(find_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_mode_squeezing, m)?)?;
    m.add_function(wrap_pyfunction!(mu_for_effective_modes, m)?)?;
    m.add_function(wrap_pyfunction!(squeezing_db, m)?)?;
    m.add_function(wrap_pyfunction!(db_to_r, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_energy, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_loss, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
