//! Multi-set data and its block covariance structure.

use crate::error::{MccaError, Result};
use crate::matrix::Mat;

/// `N ≥ 2` data sets observed over the same `T ≥ 2` exemplars (rows).
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSetData {
    sets: Vec<Mat>,
    means: Vec<Vec<f64>>,
    centered: bool,
}

impl MultiSetData {
    /// Validates and stores raw (uncentered) data.
    pub fn load(sets: Vec<Mat>) -> Result<Self> {
        if sets.is_empty() {
            return Err(MccaError::InvalidData("no data sets given".into()));
        }
        if sets.len() < 2 {
            return Err(MccaError::InvalidData(
                "at least two data sets are required".into(),
            ));
        }
        let t = sets[0].rows();
        for (l, s) in sets.iter().enumerate() {
            if s.rows() != t {
                return Err(MccaError::InvalidData(format!(
                    "set {l} has {} exemplars, set 0 has {t}",
                    s.rows()
                )));
            }
            if s.cols() == 0 {
                return Err(MccaError::InvalidData(format!("set {l} has no columns")));
            }
            if let Some(p) = s.as_slice().iter().position(|x| !x.is_finite()) {
                return Err(MccaError::NonFinite {
                    row: p / s.cols(),
                    col: p % s.cols(),
                });
            }
        }
        if t < 2 {
            return Err(MccaError::InvalidData(format!(
                "need at least 2 exemplars, got {t}"
            )));
        }
        let means = sets.iter().map(column_means).collect();
        Ok(Self {
            sets,
            means,
            centered: false,
        })
    }

    /// Splits a `T × D_total` matrix into consecutive column blocks of widths `dims`.
    pub fn from_concatenated(x: &Mat, dims: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().sum();
        if total != x.cols() {
            return Err(MccaError::InvalidData(format!(
                "dims sum to {total} but data has {} columns",
                x.cols()
            )));
        }
        if let Some(l) = dims.iter().position(|&d| d == 0) {
            return Err(MccaError::InvalidData(format!("set {l} has dimension 0")));
        }
        let mut c0 = 0;
        let sets = dims
            .iter()
            .map(|&d| {
                let b = x.block(0, c0, x.rows(), d);
                c0 += d;
                b
            })
            .collect();
        Self::load(sets)
    }

    /// Subtracts each set's column means. The means are kept so that the
    /// original data, and new data in the same frame, can be handled later.
    pub fn center(&self) -> Self {
        if self.centered {
            return self.clone();
        }
        let sets = self
            .sets
            .iter()
            .zip(&self.means)
            .map(|(s, m)| Mat::from_fn_unchecked(s.rows(), s.cols(), |i, j| s.get(i, j) - m[j]))
            .collect();
        Self {
            sets,
            means: self.means.clone(),
            centered: true,
        }
    }

    pub fn n_sets(&self) -> usize {
        self.sets.len()
    }

    pub fn n_exemplars(&self) -> usize {
        self.sets[0].rows()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.sets.iter().map(Mat::cols).collect()
    }

    pub fn d_total(&self) -> usize {
        self.sets.iter().map(Mat::cols).sum()
    }

    pub fn sets(&self) -> &[Mat] {
        &self.sets
    }

    pub fn set(&self, l: usize) -> &Mat {
        &self.sets[l]
    }

    /// Per-set column means of the raw data.
    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Data in the original (uncentered) frame.
    pub fn raw_sets(&self) -> Vec<Mat> {
        if !self.centered {
            return self.sets.clone();
        }
        self.sets
            .iter()
            .zip(&self.means)
            .map(|(s, m)| Mat::from_fn_unchecked(s.rows(), s.cols(), |i, j| s.get(i, j) + m[j]))
            .collect()
    }

    /// All sets side by side as one `T × D_total` matrix.
    pub fn concatenated(&self) -> Mat {
        Mat::hstack(&self.sets).expect("sets share the exemplar count")
    }
}

fn column_means(m: &Mat) -> Vec<f64> {
    let t = m.rows() as f64;
    (0..m.cols())
        .map(|j| (0..m.rows()).map(|i| m.get(i, j)).sum::<f64>() / t)
        .collect()
}

/// The full block covariance `R` of the concatenated centered data and its block diagonal `D`.
///
/// Blocks are unnormalized sums `R^{lk} = Σ_i (x_i^l − x̄^l)(x_i^k − x̄^k)ᵀ`;
/// the common `1/((T−1)N)` factor is omitted since ratios and eigenvectors do
/// not depend on it.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceBlocks {
    r: Mat,
    d: Mat,
    dims: Vec<usize>,
    offsets: Vec<usize>,
    means: Vec<Vec<f64>>,
    n_exemplars: usize,
}

impl CovarianceBlocks {
    /// Computes all blocks from `data`, centering it first if needed.
    pub fn from_data(data: &MultiSetData) -> Self {
        let centered = data.center();
        let xc = centered.concatenated();
        let gram = xc.t_matmul(&xc).expect("square Gram product");
        // exact symmetry: mirror the upper triangle
        let n = gram.rows();
        let r = Mat::from_fn_unchecked(n, n, |i, j| {
            if i <= j {
                gram.get(i, j)
            } else {
                gram.get(j, i)
            }
        });
        Self::assemble(r, data.dims(), data.means().to_vec(), data.n_exemplars())
    }

    /// Builds blocks from an already assembled symmetric `R`.
    pub fn from_matrix(r: Mat, dims: &[usize]) -> Result<Self> {
        if !r.is_square() {
            return Err(MccaError::NotSquare {
                rows: r.rows(),
                cols: r.cols(),
            });
        }
        if dims.len() < 2 || dims.contains(&0) {
            return Err(MccaError::InvalidData(
                "need at least two sets with positive dimension".into(),
            ));
        }
        let total: usize = dims.iter().sum();
        if total != r.rows() {
            return Err(MccaError::InvalidData(format!(
                "dims sum to {total} but R is {}x{}",
                r.rows(),
                r.cols()
            )));
        }
        if r.asymmetry() > 1e-12 * r.max_abs() {
            return Err(MccaError::NotSymmetric {
                asymmetry: r.asymmetry(),
            });
        }
        let means = dims.iter().map(|&d| vec![0.0; d]).collect();
        Ok(Self::assemble(r, dims.to_vec(), means, 0))
    }

    fn assemble(r: Mat, dims: Vec<usize>, means: Vec<Vec<f64>>, n_exemplars: usize) -> Self {
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        let mut acc = 0;
        for &d in &dims {
            offsets.push(acc);
            acc += d;
        }
        offsets.push(acc);
        let mut d = Mat::zeros(acc, acc);
        for l in 0..dims.len() {
            let o = offsets[l];
            d.set_block(o, o, &r.block(o, o, dims[l], dims[l]));
        }
        Self {
            r,
            d,
            dims,
            offsets,
            means,
            n_exemplars,
        }
    }

    /// `R^{lk}`, a `d_l × d_k` matrix.
    pub fn block(&self, l: usize, k: usize) -> Mat {
        self.r.block(
            self.offsets[l],
            self.offsets[k],
            self.dims[l],
            self.dims[k],
        )
    }

    pub fn r(&self) -> &Mat {
        &self.r
    }

    pub fn d(&self) -> &Mat {
        &self.d
    }

    /// `R + γ·I`: shrinkage on the diagonal blocks only.
    pub fn regularized_r(&self, gamma: f64) -> Mat {
        add_diag(&self.r, gamma)
    }

    pub fn regularized_d(&self, gamma: f64) -> Mat {
        add_diag(&self.d, gamma)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Column offset of set `l` in the concatenated layout.
    pub fn offset(&self, l: usize) -> usize {
        self.offsets[l]
    }

    pub fn n_sets(&self) -> usize {
        self.dims.len()
    }

    pub fn d_total(&self) -> usize {
        self.offsets[self.dims.len()]
    }

    /// Training means of each set (zeros when built from a bare matrix).
    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    /// Exemplar count of the source data, 0 when built from a bare matrix.
    pub fn n_exemplars(&self) -> usize {
        self.n_exemplars
    }

    /// Splits a concatenated vector into per-set slices.
    pub fn split<'a>(&self, v: &'a [f64]) -> Vec<&'a [f64]> {
        (0..self.n_sets())
            .map(|l| &v[self.offsets[l]..self.offsets[l + 1]])
            .collect()
    }
}

fn add_diag(m: &Mat, gamma: f64) -> Mat {
    let mut out = m.clone();
    if gamma != 0.0 {
        for i in 0..m.rows() {
            out.add_at(i, i, gamma);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> Mat {
        Mat::column_vector(v).unwrap()
    }

    #[test]
    fn load_two_sets() {
        let d = MultiSetData::load(vec![col(&[1.0, 2.0, 3.0]), col(&[0.0, 1.0, 0.0])]).unwrap();
        assert_eq!(d.n_sets(), 2);
        assert_eq!(d.n_exemplars(), 3);
        assert!(!d.is_centered());
    }

    #[test]
    fn load_rejects_bad_shapes() {
        assert!(MultiSetData::load(vec![col(&[1.0, 2.0, 3.0]), col(&[1.0, 2.0, 3.0, 4.0])]).is_err());
        assert!(MultiSetData::load(vec![col(&[1.0, 2.0, 3.0])]).is_err());
        assert!(MultiSetData::load(vec![]).is_err());
        assert!(MultiSetData::load(vec![col(&[1.0]), col(&[2.0])]).is_err());
    }

    #[test]
    fn centering() {
        let d = MultiSetData::load(vec![col(&[1.0, 2.0, 3.0]), col(&[-1.0, 0.0, 1.0])])
            .unwrap()
            .center();
        assert_eq!(d.set(0).column(0), vec![-1.0, 0.0, 1.0]);
        assert_eq!(d.means()[0], vec![2.0]);
        assert_eq!(d.set(1).column(0), vec![-1.0, 0.0, 1.0]);
        assert_eq!(d.raw_sets()[0].column(0), vec![1.0, 2.0, 3.0]);
        assert_eq!(d.center(), d);
    }

    #[test]
    fn hand_covariance() {
        let d = MultiSetData::load(vec![col(&[1.0, 2.0, 3.0]), col(&[2.0, 4.0, 6.0])]).unwrap();
        let c = CovarianceBlocks::from_data(&d);
        assert_eq!(c.block(0, 0)[(0, 0)], 2.0);
        assert_eq!(c.block(1, 1)[(0, 0)], 8.0);
        assert_eq!(c.block(0, 1)[(0, 0)], 4.0);
        assert_eq!(c.block(1, 0)[(0, 0)], 4.0);
        assert_eq!(c.d()[(0, 1)], 0.0);
        assert_eq!(c.d()[(1, 1)], 8.0);
    }

    #[test]
    fn duplicated_set_cross_block_equals_diagonal() {
        let x = Mat::from_rows(&[[1.0, 0.5], [2.0, -1.0], [0.0, 3.0], [4.0, 1.0]]).unwrap();
        let d = MultiSetData::load(vec![x.clone(), x]).unwrap();
        let c = CovarianceBlocks::from_data(&d);
        assert_eq!(c.block(0, 1), c.block(0, 0));
    }

    #[test]
    fn from_concatenated_checks_dims() {
        let x = Mat::zeros(4, 3);
        assert!(MultiSetData::from_concatenated(&x, &[1, 1]).is_err());
        assert!(MultiSetData::from_concatenated(&x, &[3, 0]).is_err());
        let d = MultiSetData::from_concatenated(&x, &[1, 2]).unwrap();
        assert_eq!(d.dims(), vec![1, 2]);
    }
}
