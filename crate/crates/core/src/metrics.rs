//! Component signals and inter-set correlation (ISC).
//!
//! The ISC of one component is `ρ = r_B / ((N − 1) r_W)` with `r_B` the
//! covariance summed over ordered pairs of distinct sets and `r_W` the
//! variance summed over sets. It is computed here straight from signals and,
//! separately, from covariance blocks, so the two can check each other and the
//! eigensolver.

use crate::dataset::{CovarianceBlocks, MultiSetData};
use crate::error::{MccaError, Result};
use crate::matrix::{dot, Mat};
use crate::solver::MccaModel;

/// Per-set component signals `y^l`, each `T × K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projections {
    sets: Vec<Mat>,
}

impl Projections {
    pub fn new(sets: Vec<Mat>) -> Result<Self> {
        let first = sets
            .first()
            .ok_or_else(|| MccaError::InvalidData("no projected sets".into()))?;
        let (t, k) = (first.rows(), first.cols());
        if let Some(l) = sets.iter().position(|s| s.rows() != t || s.cols() != k) {
            return Err(MccaError::InvalidData(format!(
                "projected set {l} is {}x{}, expected {t}x{k}",
                sets[l].rows(),
                sets[l].cols()
            )));
        }
        Ok(Self { sets })
    }

    pub fn sets(&self) -> &[Mat] {
        &self.sets
    }

    pub fn n_sets(&self) -> usize {
        self.sets.len()
    }

    pub fn n_exemplars(&self) -> usize {
        self.sets[0].rows()
    }

    pub fn n_components(&self) -> usize {
        self.sets[0].cols()
    }

    /// Signal of component `n` in every set.
    pub fn component(&self, n: usize) -> Result<Vec<Vec<f64>>> {
        if n >= self.n_components() {
            return Err(MccaError::InvalidComponent {
                index: n,
                available: self.n_components(),
            });
        }
        Ok(self.sets.iter().map(|s| s.column(n)).collect())
    }

    /// `T × N·K` matrix, set-major: all components of set 1, then set 2, ...
    pub fn to_matrix(&self) -> Mat {
        Mat::hstack(&self.sets).expect("consistent shapes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IscBreakdown {
    /// Between-set covariance summed over ordered pairs `l ≠ k`.
    pub r_b: f64,
    /// Within-set variance summed over sets.
    pub r_w: f64,
    pub rho: f64,
}

/// `y^l = (x^l − x̄^l_train) V^l` for every set.
pub fn transform(model: &MccaModel, data: &MultiSetData) -> Result<Projections> {
    if data.n_sets() != model.n_sets() {
        return Err(MccaError::InvalidData(format!(
            "model has {} sets, data has {}",
            model.n_sets(),
            data.n_sets()
        )));
    }
    for (l, (&dm, dd)) in model.dims().iter().zip(data.dims()).enumerate() {
        if dm != dd {
            return Err(MccaError::SetDimensionMismatch {
                set: l,
                expected: dm,
                got: dd,
            });
        }
    }
    let sets = data
        .raw_sets()
        .iter()
        .zip(model.means())
        .zip(model.projections())
        .map(|((x, mean), v)| {
            let xc = Mat::from_fn_unchecked(x.rows(), x.cols(), |i, j| x.get(i, j) - mean[j]);
            xc.matmul(v)
        })
        .collect::<Result<Vec<_>>>()?;
    Projections::new(sets)
}

/// ISC of component `n` of `proj`.
pub fn isc(proj: &Projections, n: usize) -> Result<IscBreakdown> {
    isc_signals(&proj.component(n)?)
}

/// ISC of one scalar signal per set, each re-centered by its own mean.
pub fn isc_signals<S: AsRef<[f64]>>(signals: &[S]) -> Result<IscBreakdown> {
    let n = signals.len();
    if n < 2 {
        return Err(MccaError::InvalidData(
            "ISC needs signals from at least two sets".into(),
        ));
    }
    let t = signals[0].as_ref().len();
    if signals.iter().any(|s| s.as_ref().len() != t) {
        return Err(MccaError::InvalidData(
            "signals differ in length".into(),
        ));
    }
    if t < 2 {
        return Err(MccaError::InvalidData(format!(
            "ISC needs at least 2 exemplars, got {t}"
        )));
    }
    let mut scale = 0.0f64;
    let centered: Vec<Vec<f64>> = signals
        .iter()
        .map(|s| {
            let s = s.as_ref();
            scale = s.iter().fold(scale, |m, x| m.max(x.abs()));
            let mean = s.iter().sum::<f64>() / t as f64;
            s.iter().map(|x| x - mean).collect()
        })
        .collect();

    let r_w: f64 = centered.iter().map(|y| dot(y, y)).sum();
    let mut r_b = 0.0;
    for l in 0..n {
        for k in 0..n {
            if k != l {
                r_b += dot(&centered[l], &centered[k]);
            }
        }
    }
    let floor = (n * t) as f64 * (4.0 * f64::EPSILON * scale).powi(2);
    if r_w <= floor {
        return Err(MccaError::UndefinedIsc);
    }
    Ok(IscBreakdown {
        r_b,
        r_w,
        rho: r_b / ((n - 1) as f64 * r_w),
    })
}

/// ISC of the concatenated projection vector `v` evaluated from covariance blocks.
pub fn isc_from_cov(cov: &CovarianceBlocks, v: &[f64]) -> Result<IscBreakdown> {
    if v.len() != cov.d_total() {
        return Err(MccaError::DimensionMismatch {
            op: "isc_from_cov",
            expected: format!("vector of length {}", cov.d_total()),
            got: format!("length {}", v.len()),
        });
    }
    let n = cov.n_sets();
    let rv = cov.r().mul_vec(v)?;
    let parts = cov.split(v);
    let mut r_w = 0.0;
    let mut r_b = 0.0;
    for (l, vl) in parts.iter().enumerate() {
        let own = cov.block(l, l).mul_vec(vl)?;
        let o = cov.offset(l);
        let w = dot(vl, &own);
        let total: f64 = vl.iter().zip(&rv[o..]).map(|(a, b)| a * b).sum();
        r_w += w;
        r_b += total - w;
    }
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = 4.0 * f64::EPSILON * cov.r().max_abs() * vmax * vmax * v.len() as f64;
    if r_w <= floor {
        return Err(MccaError::UndefinedIsc);
    }
    Ok(IscBreakdown {
        r_b,
        r_w,
        rho: r_b / ((n - 1) as f64 * r_w),
    })
}
