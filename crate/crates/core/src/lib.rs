//! Multi-set canonical correlation analysis (MCCA).
//!
//! Finds per-set projections `y^l = v^lᵀ x^l` of `N` data sets observed over
//! the same exemplars so that the inter-set correlation of the projected
//! signals is maximal. The solutions are the generalized eigenvectors of
//! `R v = D v λ`, where `R` is the covariance of the concatenated data and `D`
//! its block diagonal; each component's inter-set correlation is
//! `ρ = (λ − 1)/(N − 1)`.
//!
//! ```
//! use mcca::{fit_data, FitOptions, Mat, MultiSetData};
//!
//! let x = Mat::from_rows(&[[0.3], [-1.2], [2.0], [0.7]]).unwrap();
//! let y = x.scale(3.0);
//! let data = MultiSetData::load(vec![x, y]).unwrap();
//! let model = fit_data(&data, &FitOptions::default()).unwrap();
//! assert!((model.rho_analytic()[0] - 1.0).abs() < 1e-12);
//! ```

pub mod dataset;
pub mod eigen;
pub mod error;
pub mod io;
pub mod matrix;
pub mod metrics;
pub mod solver;
pub mod synth;

pub use dataset::{CovarianceBlocks, MultiSetData};
pub use eigen::{general_eig_real, sym_eig, GeneralEig, SymEig};
pub use error::{MccaError, Result};
pub use matrix::{matmul, Mat};
pub use metrics::{isc, isc_from_cov, isc_signals, transform, IscBreakdown, Projections};
pub use solver::{
    fit, fit_data, fit_one_step, fit_two_step, stationarity_residual, whiten, FitOptions,
    MccaModel, Method, Regularization, WhitenedBasis,
};
pub use synth::{generate, planted_isc, recovery_score, SynthResult, SynthSpec};
