//! Python bindings: `Model` plus the `isc`, `synth` and `sym_eig` functions.
//! Matrices cross the boundary as lists of rows.

use std::path::PathBuf;

use mcca::io::{load_model, model_from_json, model_to_json, save_model};
use mcca::{FitOptions, Mat, MccaModel, Method, MultiSetData, SynthSpec};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

type Rows = Vec<Vec<f64>>;

create_exception!(mcca_py, MccaError, PyValueError);
create_exception!(mcca_py, DegenerateError, MccaError);

fn to_py(e: mcca::MccaError) -> PyErr {
    if e.is_degenerate() {
        DegenerateError::new_err(e.to_string())
    } else {
        MccaError::new_err(e.to_string())
    }
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<Mat> {
    if rows.is_empty() {
        return Err(MccaError::new_err("empty matrix"));
    }
    Mat::from_rows(rows).map_err(to_py)
}

fn multiset(sets: Vec<Vec<Vec<f64>>>) -> PyResult<MultiSetData> {
    let mats = sets.iter().map(|s| matrix(s)).collect::<PyResult<Vec<_>>>()?;
    MultiSetData::load(mats).map_err(to_py)
}

/// A fitted MCCA model.
#[pyclass(frozen, module = "mcca_py")]
pub struct Model {
    inner: MccaModel,
}

#[pymethods]
impl Model {
    /// Fits a model to `sets`, a list of `T × d_l` row lists.
    #[staticmethod]
    #[pyo3(signature = (sets, method = "two-step", rank_tol = mcca::solver::DEFAULT_RANK_TOL, gamma = 0.0, k = None))]
    fn fit(
        sets: Vec<Vec<Vec<f64>>>,
        method: &str,
        rank_tol: f64,
        gamma: f64,
        k: Option<usize>,
    ) -> PyResult<Self> {
        let data = multiset(sets)?;
        let opts = FitOptions {
            method: method.parse::<Method>().map_err(to_py)?,
            rank_tol,
            gamma,
            k,
        };
        let inner = mcca::fit_data(&data, &opts).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Per-set component signals, each `T × K`, using the training means.
    fn transform(&self, sets: Vec<Vec<Vec<f64>>>) -> PyResult<Vec<Vec<Vec<f64>>>> {
        let data = multiset(sets)?;
        let proj = mcca::transform(&self.inner, &data).map_err(to_py)?;
        Ok(proj.sets().iter().map(Mat::to_rows).collect())
    }

    /// Residual of the stationarity condition for component `n` on `sets`.
    fn stationarity_residual(&self, sets: Vec<Vec<Vec<f64>>>, n: usize) -> PyResult<f64> {
        let cov = mcca::CovarianceBlocks::from_data(&multiset(sets)?);
        mcca::stationarity_residual(&cov, &self.inner, n).map_err(to_py)
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.dims().to_vec()
    }

    #[getter]
    fn n_components(&self) -> usize {
        self.inner.n_components()
    }

    #[getter]
    fn method(&self) -> String {
        self.inner.method().to_string()
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.lambda().to_vec()
    }

    #[getter]
    fn rho_analytic(&self) -> Vec<f64> {
        self.inner.rho_analytic().to_vec()
    }

    #[getter]
    fn rho_empirical(&self) -> Vec<f64> {
        self.inner.rho_empirical().to_vec()
    }

    #[getter]
    fn means(&self) -> Vec<Vec<f64>> {
        self.inner.means().to_vec()
    }

    #[getter]
    fn ranks(&self) -> Vec<usize> {
        self.inner.regularization().ranks.clone()
    }

    /// `V^l` for every set, `d_l × K` each.
    #[getter]
    fn projections(&self) -> Vec<Vec<Vec<f64>>> {
        self.inner.projections().iter().map(Mat::to_rows).collect()
    }

    fn to_json(&self) -> String {
        model_to_json(&self.inner)
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Self {
            inner: model_from_json(s).map_err(to_py)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_model(&path, &self.inner).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: load_model(&path).map_err(to_py)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(dims={:?}, method='{}', n_components={})",
            self.inner.dims(),
            self.inner.method(),
            self.inner.n_components()
        )
    }
}

/// `(r_B, r_W, rho)` for one signal per set.
#[pyfunction]
fn isc(signals: Vec<Vec<f64>>) -> PyResult<(f64, f64, f64)> {
    let b = mcca::isc_signals(&signals).map_err(to_py)?;
    Ok((b.r_b, b.r_w, b.rho))
}

/// Synthetic sets with planted shared components; returns `(sets, latents)`.
#[pyfunction]
#[pyo3(signature = (seed, dims, t, k, snr = f64::INFINITY))]
fn synth(
    seed: u64,
    dims: Vec<usize>,
    t: usize,
    k: usize,
    snr: f64,
) -> PyResult<(Vec<Rows>, Rows)> {
    let r = mcca::generate(&SynthSpec::new(seed, dims, t, k, snr)).map_err(to_py)?;
    let sets = r.data.raw_sets().iter().map(Mat::to_rows).collect();
    Ok((sets, r.latents.to_rows()))
}

/// Eigenvalues (descending) and eigenvectors (as columns) of a symmetric matrix.
#[pyfunction]
fn sym_eig(a: Vec<Vec<f64>>) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let e = mcca::sym_eig(&matrix(&a)?).map_err(to_py)?;
    Ok((e.values, e.vectors.to_rows()))
}

#[pymodule]
fn mcca_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(isc, m)?)?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    m.add_function(wrap_pyfunction!(sym_eig, m)?)?;
    m.add("MccaError", m.py().get_type::<MccaError>())?;
    m.add("DegenerateError", m.py().get_type::<DegenerateError>())?;
    Ok(())
}
