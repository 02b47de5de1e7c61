//! MCCA solutions of `R v = D v λ`.
//!
//! Two routes produce the same [`MccaModel`]:
//!
//! * [`fit_two_step`] whitens every set with its own eigendecomposition,
//!   dropping directions below `rank_tol`, then diagonalizes the covariance of
//!   the whitened, concatenated data. This is the default because it only needs
//!   symmetric eigendecompositions and tolerates rank-deficient sets.
//! * [`fit_one_step`] factors `D = L Lᵀ` (Cholesky) and diagonalizes
//!   `L⁻¹ R L⁻ᵀ`, which is similar to `D⁻¹ R`. It requires every block of `D`
//!   to be positive definite.
//!
//! Both normalize each projection vector to `vᵀ D v = 1` and sort components by
//! descending eigenvalue `λ`; the inter-set correlation of a component is
//! `ρ = (λ − 1)/(N − 1)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{CovarianceBlocks, MultiSetData};
use crate::eigen::{fix_column_signs, sym_eig};
use crate::error::{MccaError, Result};
use crate::matrix::Mat;
use crate::metrics::isc_from_cov;

pub const DEFAULT_RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    TwoStep,
    OneStep,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::TwoStep => "two-step",
            Method::OneStep => "one-step",
        })
    }
}

impl FromStr for Method {
    type Err = MccaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-step" => Ok(Method::TwoStep),
            "one-step" => Ok(Method::OneStep),
            other => Err(MccaError::InvalidOptions(format!(
                "unknown method '{other}' (expected two-step or one-step)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub method: Method,
    /// Relative eigenvalue cutoff for per-set whitening (two-step) or the
    /// singularity check on `D` (one-step).
    pub rank_tol: f64,
    /// Shrinkage added to the diagonal blocks.
    pub gamma: f64,
    /// Number of components to keep; all available when `None`.
    pub k: Option<usize>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            method: Method::TwoStep,
            rank_tol: DEFAULT_RANK_TOL,
            gamma: 0.0,
            k: None,
        }
    }
}

impl FitOptions {
    fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(MccaError::InvalidOptions(format!(
                "gamma must be finite and >= 0, got {}",
                self.gamma
            )));
        }
        if !(self.rank_tol > 0.0 && self.rank_tol < 1.0) {
            return Err(MccaError::InvalidOptions(format!(
                "rank_tol must lie in (0, 1), got {}",
                self.rank_tol
            )));
        }
        if self.k == Some(0) {
            return Err(MccaError::InvalidOptions("k must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regularization {
    pub gamma: f64,
    pub rank_tol: f64,
    /// Retained rank of each set.
    pub ranks: Vec<usize>,
}

/// A fitted MCCA solution.
#[derive(Debug, Clone, PartialEq)]
pub struct MccaModel {
    dims: Vec<usize>,
    means: Vec<Vec<f64>>,
    method: Method,
    reg: Regularization,
    lambda: Vec<f64>,
    rho_analytic: Vec<f64>,
    rho_empirical: Vec<f64>,
    /// `V^l`, one `d_l × K` matrix per set.
    projections: Vec<Mat>,
}

impl MccaModel {
    /// Assembles a model from stored parts, checking that the shapes agree.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        dims: Vec<usize>,
        means: Vec<Vec<f64>>,
        method: Method,
        reg: Regularization,
        lambda: Vec<f64>,
        rho_analytic: Vec<f64>,
        rho_empirical: Vec<f64>,
        projections: Vec<Mat>,
    ) -> Result<Self> {
        let n = dims.len();
        let k = lambda.len();
        let bad = |what: String| Err(MccaError::ModelFormat(what));
        if n < 2 {
            return bad(format!("need at least two sets, got {n}"));
        }
        if means.len() != n || projections.len() != n || reg.ranks.len() != n {
            return bad("per-set fields disagree on the number of sets".into());
        }
        if rho_analytic.len() != k || rho_empirical.len() != k {
            return bad("lambda and rho arrays differ in length".into());
        }
        for l in 0..n {
            if means[l].len() != dims[l] {
                return bad(format!("means of set {l} have the wrong length"));
            }
            if projections[l].rows() != dims[l] || projections[l].cols() != k {
                return bad(format!(
                    "projection of set {l} is {}x{}, expected {}x{k}",
                    projections[l].rows(),
                    projections[l].cols(),
                    dims[l]
                ));
            }
        }
        Ok(Self {
            dims,
            means,
            method,
            reg,
            lambda,
            rho_analytic,
            rho_empirical,
            projections,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_sets(&self) -> usize {
        self.dims.len()
    }

    pub fn d_total(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn n_components(&self) -> usize {
        self.lambda.len()
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn regularization(&self) -> &Regularization {
        &self.reg
    }

    /// Eigenvalues `λ_n`, descending.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// `(λ_n − 1)/(N − 1)` of the (possibly regularized) eigenproblem.
    pub fn rho_analytic(&self) -> &[f64] {
        &self.rho_analytic
    }

    /// ISC of each component measured on the unregularized training covariance.
    pub fn rho_empirical(&self) -> &[f64] {
        &self.rho_empirical
    }

    /// `V^l` (`d_l × K`).
    pub fn projection(&self, l: usize) -> &Mat {
        &self.projections[l]
    }

    pub fn projections(&self) -> &[Mat] {
        &self.projections
    }

    /// Concatenated projection vector `v_n` of length `D_total`.
    pub fn component(&self, n: usize) -> Result<Vec<f64>> {
        if n >= self.n_components() {
            return Err(MccaError::InvalidComponent {
                index: n,
                available: self.n_components(),
            });
        }
        Ok(self.projections.iter().flat_map(|p| p.column(n)).collect())
    }

    /// All components stacked as a `D_total × K` matrix.
    pub fn stacked(&self) -> Mat {
        let k = self.n_components();
        let mut v = Mat::zeros(self.d_total(), k);
        let mut r0 = 0;
        for p in &self.projections {
            v.set_block(r0, 0, p);
            r0 += p.rows();
        }
        v
    }
}

/// Per-set whitening transforms and the whitened concatenated covariance.
#[derive(Debug, Clone)]
pub struct WhitenedBasis {
    /// Eigenvectors `U^l` of `R^{ll} + γI`, all columns.
    pub eigenvectors: Vec<Mat>,
    /// Eigenvalues `Λ^l`, descending.
    pub eigenvalues: Vec<Vec<f64>>,
    pub ranks: Vec<usize>,
    /// `W^l = U^l (Λ^l)^{-1/2}` restricted to retained columns, `d_l × r_l`.
    pub maps: Vec<Mat>,
    /// Covariance of the whitened concatenated data, `Σr_l × Σr_l`.
    pub rtilde: Mat,
}

impl WhitenedBasis {
    /// Block-diagonal `W` of shape `D_total × Σr_l`.
    pub fn block_map(&self) -> Mat {
        let rows = self.maps.iter().map(Mat::rows).sum();
        let cols = self.ranks.iter().sum();
        let mut w = Mat::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for m in &self.maps {
            w.set_block(r0, c0, m);
            r0 += m.rows();
            c0 += m.cols();
        }
        w
    }
}

/// Whitens each set by PCA, keeping eigen-directions above `rank_tol · max(Λ^l)`.
pub fn whiten(cov: &CovarianceBlocks, rank_tol: f64, gamma: f64) -> Result<WhitenedBasis> {
    let n = cov.n_sets();
    let mut eigenvectors = Vec::with_capacity(n);
    let mut eigenvalues = Vec::with_capacity(n);
    let mut ranks = Vec::with_capacity(n);
    let mut maps = Vec::with_capacity(n);
    for l in 0..n {
        let block = cov.block(l, l);
        let block = block.add(&Mat::identity(block.rows()).scale(gamma))?;
        let e = sym_eig(&block)?;
        let top = e.values[0];
        let keep: Vec<usize> = if top > 0.0 {
            (0..e.values.len())
                .filter(|&i| e.values[i] > rank_tol * top)
                .collect()
        } else {
            vec![]
        };
        if keep.is_empty() {
            return Err(MccaError::DegenerateSet { set: l });
        }
        let u = e.vectors.select_columns(&keep);
        let w = Mat::from_fn_unchecked(u.rows(), u.cols(), |i, j| {
            u.get(i, j) / e.values[keep[j]].sqrt()
        });
        ranks.push(keep.len());
        maps.push(w);
        eigenvectors.push(e.vectors);
        eigenvalues.push(e.values);
    }

    let r_reg = cov.regularized_r(gamma);
    let mut basis = WhitenedBasis {
        eigenvectors,
        eigenvalues,
        ranks,
        maps,
        rtilde: Mat::zeros(0, 0),
    };
    let w = basis.block_map();
    let rt = w.t_matmul(&r_reg.matmul(&w)?)?;
    let m = rt.rows();
    basis.rtilde = Mat::from_fn_unchecked(m, m, |i, j| 0.5 * (rt.get(i, j) + rt.get(j, i)));
    Ok(basis)
}

/// Dispatches on `opts.method`.
pub fn fit(cov: &CovarianceBlocks, opts: &FitOptions) -> Result<MccaModel> {
    match opts.method {
        Method::TwoStep => fit_two_step(cov, opts),
        Method::OneStep => fit_one_step(cov, opts),
    }
}

/// Centers `data`, forms its covariance blocks and fits.
pub fn fit_data(data: &MultiSetData, opts: &FitOptions) -> Result<MccaModel> {
    fit(&CovarianceBlocks::from_data(data), opts)
}

/// Whiten each set, then PCA on the whitened concatenation: `V = U Λ^{-1/2} Ṽ`.
pub fn fit_two_step(cov: &CovarianceBlocks, opts: &FitOptions) -> Result<MccaModel> {
    opts.validate()?;
    let basis = whiten(cov, opts.rank_tol, opts.gamma)?;
    let e = sym_eig(&basis.rtilde)?;
    let v = basis.block_map().matmul(&e.vectors)?;
    finish(cov, v, e.values, opts, Method::TwoStep, basis.ranks)
}

/// Eigenvectors of `D⁻¹ R`, computed through the Cholesky factor of `D`.
pub fn fit_one_step(cov: &CovarianceBlocks, opts: &FitOptions) -> Result<MccaModel> {
    opts.validate()?;
    let dt = cov.d_total();
    let mut chol = Mat::zeros(dt, dt);
    for l in 0..cov.n_sets() {
        let block = cov.block(l, l);
        let block = block.add(&Mat::identity(block.rows()).scale(opts.gamma))?;
        let e = sym_eig(&block)?;
        let top = e.values[0];
        let bottom = *e.values.last().expect("non-empty block");
        if top <= 0.0 || bottom <= opts.rank_tol * top {
            return Err(MccaError::RankDeficient { set: l });
        }
        let lf = block
            .cholesky()?
            .ok_or(MccaError::RankDeficient { set: l })?;
        chol.set_block(cov.offset(l), cov.offset(l), &lf);
    }

    // C = L⁻¹ R L⁻ᵀ = L⁻¹ (L⁻¹ R)ᵀ since R is symmetric
    let r_reg = cov.regularized_r(opts.gamma);
    let y = chol.solve_lower(&r_reg);
    let c = chol.solve_lower(&y.transpose());
    let c = Mat::from_fn_unchecked(dt, dt, |i, j| 0.5 * (c.get(i, j) + c.get(j, i)));
    let e = sym_eig(&c)?;
    let v = chol.solve_lower_transpose(&e.vectors);
    finish(
        cov,
        v,
        e.values,
        opts,
        Method::OneStep,
        cov.dims().to_vec(),
    )
}

fn finish(
    cov: &CovarianceBlocks,
    mut v: Mat,
    lambda: Vec<f64>,
    opts: &FitOptions,
    method: Method,
    ranks: Vec<usize>,
) -> Result<MccaModel> {
    let available = v.cols();
    let k = opts.k.unwrap_or(available);
    if k > available {
        return Err(MccaError::InvalidOptions(format!(
            "requested {k} components but only {available} are available"
        )));
    }

    let d_reg = cov.regularized_d(opts.gamma);
    for j in 0..available {
        let col = v.column(j);
        let s = d_reg.bilinear(&col, &col)?;
        if s > 0.0 {
            let f = 1.0 / s.sqrt();
            let scaled: Vec<f64> = col.iter().map(|x| x * f).collect();
            v.set_column(j, &scaled);
        }
    }
    fix_column_signs(&mut v);

    let keep: Vec<usize> = (0..k).collect();
    let v = v.select_columns(&keep);
    let lambda: Vec<f64> = lambda[..k].to_vec();
    let nm1 = (cov.n_sets() - 1) as f64;
    let rho_analytic = lambda.iter().map(|l| (l - 1.0) / nm1).collect();
    let rho_empirical = (0..k)
        .map(|j| isc_from_cov(cov, &v.column(j)).map(|b| b.rho))
        .collect::<Result<Vec<_>>>()?;

    let projections = (0..cov.n_sets())
        .map(|l| v.block(cov.offset(l), 0, cov.dims()[l], k))
        .collect();

    Ok(MccaModel {
        dims: cov.dims().to_vec(),
        means: cov.means().to_vec(),
        method,
        reg: Regularization {
            gamma: opts.gamma,
            rank_tol: opts.rank_tol,
            ranks,
        },
        lambda,
        rho_analytic,
        rho_empirical,
        projections,
    })
}

/// Residual of the per-set stationarity condition
/// `(N−1)⁻¹ Σ_{k≠l} R^{lk} vᵏ = R^{ll} vˡ ρ` for component `n`, as a max-norm
/// over all sets scaled by `max|R| · max|v|`.
pub fn stationarity_residual(cov: &CovarianceBlocks, model: &MccaModel, n: usize) -> Result<f64> {
    let v = model.component(n)?;
    if v.len() != cov.d_total() {
        return Err(MccaError::DimensionMismatch {
            op: "stationarity_residual",
            expected: format!("{} coefficients", cov.d_total()),
            got: format!("{}", v.len()),
        });
    }
    let rho = model.rho_analytic()[n];
    let gamma = model.regularization().gamma;
    let nm1 = (cov.n_sets() - 1) as f64;
    let rv = cov.r().mul_vec(&v)?;
    let parts = cov.split(&v);
    let mut worst = 0.0f64;
    for (l, vl) in parts.iter().enumerate() {
        let own = cov.block(l, l).mul_vec(vl)?;
        let o = cov.offset(l);
        for (i, own_i) in own.iter().enumerate() {
            let cross = rv[o + i] - own_i;
            let diag = own_i + gamma * vl[i];
            worst = worst.max((cross / nm1 - diag * rho).abs());
        }
    }
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = cov.r().max_abs() * vmax;
    Ok(if scale > 0.0 { worst / scale } else { worst })
}
