//! Seeded multi-view data with planted shared components.
//!
//! Each set is generated as `x_i^l = a·A^l s_i + b·ε_i^l` where the latents
//! `s_i` and noise `ε_i^l` are independent standard normal, the columns of
//! `A^l` have unit norm, `a = sqrt(snr/(1+snr))` and `b = sqrt(1/(1+snr))`.
//! Along each planted direction the signal-to-noise power ratio is `snr`;
//! `snr = ∞` gives noiseless data and `snr = 0` pure noise.
//!
//! Random stream: ChaCha20 seeded with `seed_from_u64(seed)`. A uniform
//! variate is `(next_u64 >> 11) · 2⁻⁵³`. Normal variates come in Box-Muller
//! pairs `sqrt(−2 ln(1−u₁))·(cos 2πu₂, sin 2πu₂)`, first cosine then sine.
//! Fill order: mixing matrices set by set (row-major, skipped when supplied),
//! then the `T × K` latents (row-major), then the noise of each set in turn
//! (row-major `T × d_l`).

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::dataset::MultiSetData;
use crate::error::{MccaError, Result};
use crate::matrix::{dot, Mat};
use crate::metrics::{isc_signals, transform, IscBreakdown};
use crate::solver::MccaModel;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub seed: u64,
    /// `d_1..d_N`; the number of sets is `dims.len()`.
    pub dims: Vec<usize>,
    /// Number of exemplars `T`.
    pub t: usize,
    pub k_shared: usize,
    pub snr: f64,
    /// Optional per-set `d_l × k_shared` mixing matrices, used as given.
    pub mixing: Option<Vec<Mat>>,
}

impl SynthSpec {
    pub fn new(seed: u64, dims: Vec<usize>, t: usize, k_shared: usize, snr: f64) -> Self {
        Self {
            seed,
            dims,
            t,
            k_shared,
            snr,
            mixing: None,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(MccaError::InvalidSpec(m));
        if self.dims.len() < 2 {
            return bad(format!("need at least 2 sets, got {}", self.dims.len()));
        }
        if let Some(l) = self.dims.iter().position(|&d| d == 0) {
            return bad(format!("set {l} has dimension 0"));
        }
        if self.t < 2 {
            return bad(format!("need at least 2 exemplars, got {}", self.t));
        }
        if self.snr.is_nan() || self.snr < 0.0 {
            return bad(format!("snr must be >= 0, got {}", self.snr));
        }
        let min_d = *self.dims.iter().min().expect("non-empty");
        if self.k_shared > min_d {
            return bad(format!(
                "k_shared = {} exceeds the smallest set dimension {min_d}",
                self.k_shared
            ));
        }
        if let Some(mix) = &self.mixing {
            if mix.len() != self.dims.len() {
                return bad(format!(
                    "{} mixing matrices for {} sets",
                    mix.len(),
                    self.dims.len()
                ));
            }
            for (l, (m, &d)) in mix.iter().zip(&self.dims).enumerate() {
                if m.rows() != d || m.cols() != self.k_shared {
                    return bad(format!(
                        "mixing matrix {l} is {}x{}, expected {d}x{}",
                        m.rows(),
                        m.cols(),
                        self.k_shared
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthResult {
    pub data: MultiSetData,
    /// `T × K_shared` shared signals.
    pub latents: Mat,
    pub mixing: Vec<Mat>,
    /// Per-set pseudo-inverses of the mixing matrices (`K_shared × d_l`);
    /// row `j` recovers latent `j` from noiseless data.
    pub unmixing: Vec<Mat>,
}

struct Gaussian {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl Gaussian {
    fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let th = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * th.sin());
        r * th.cos()
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Mat {
        Mat::from_fn_unchecked(rows, cols, |_, _| self.next())
    }
}

pub fn generate(spec: &SynthSpec) -> Result<SynthResult> {
    spec.validate()?;
    let k = spec.k_shared;
    let mut g = Gaussian::new(spec.seed);

    let mixing: Vec<Mat> = match &spec.mixing {
        Some(m) => m.clone(),
        None => spec
            .dims
            .iter()
            .map(|&d| {
                let raw = g.matrix(d, k);
                let norms: Vec<f64> = (0..k).map(|j| dot(&raw.column(j), &raw.column(j)).sqrt()).collect();
                Mat::from_fn_unchecked(d, k, |i, j| raw.get(i, j) / norms[j])
            })
            .collect(),
    };
    let latents = g.matrix(spec.t, k);

    let (a, b) = if spec.snr.is_infinite() {
        (1.0, 0.0)
    } else {
        ((spec.snr / (1.0 + spec.snr)).sqrt(), (1.0 / (1.0 + spec.snr)).sqrt())
    };

    let mut sets = Vec::with_capacity(spec.dims.len());
    for (l, &d) in spec.dims.iter().enumerate() {
        let noise = g.matrix(spec.t, d);
        let signal = latents.matmul(&mixing[l].transpose())?;
        let x = Mat::from_fn_unchecked(spec.t, d, |i, j| a * signal.get(i, j) + b * noise.get(i, j));
        sets.push(x);
    }

    let unmixing = mixing
        .iter()
        .enumerate()
        .map(|(l, m)| pseudo_inverse(m).ok_or_else(|| {
            MccaError::InvalidSpec(format!("mixing matrix {l} does not have full column rank"))
        }))
        .collect::<Result<Vec<_>>>()?;

    Ok(SynthResult {
        data: MultiSetData::load(sets)?,
        latents,
        mixing,
        unmixing,
    })
}

/// `(AᵀA)⁻¹Aᵀ` for a full-column-rank `A`.
fn pseudo_inverse(a: &Mat) -> Option<Mat> {
    let gram = a.t_matmul(a).ok()?;
    let l = gram.cholesky().ok()??;
    let y = l.solve_lower(&a.transpose());
    Some(l.solve_lower_transpose(&y))
}

/// ISC of planted component `j` measured by projecting each set through the
/// corresponding row of its unmixing matrix.
pub fn planted_isc(result: &SynthResult, j: usize) -> Result<IscBreakdown> {
    let k = result.latents.cols();
    if j >= k {
        return Err(MccaError::InvalidComponent {
            index: j,
            available: k,
        });
    }
    let signals: Vec<Vec<f64>> = result
        .data
        .raw_sets()
        .iter()
        .zip(&result.unmixing)
        .map(|(x, u)| x.mul_vec(u.row(j)))
        .collect::<Result<_>>()?;
    isc_signals(&signals)
}

/// For each planted latent, the best absolute correlation with any fitted
/// component's set-averaged signal.
pub fn recovery_score(result: &SynthResult, model: &MccaModel) -> Result<Vec<f64>> {
    let proj = transform(model, &result.data)?;
    let t = proj.n_exemplars();
    let n = proj.n_sets() as f64;
    let averaged: Vec<Vec<f64>> = (0..proj.n_components())
        .map(|c| {
            (0..t)
                .map(|i| proj.sets().iter().map(|s| s.get(i, c)).sum::<f64>() / n)
                .collect()
        })
        .collect();
    Ok((0..result.latents.cols())
        .map(|j| {
            let s = result.latents.column(j);
            averaged
                .iter()
                .map(|y| pearson(&s, y).abs())
                .fold(0.0, f64::max)
                .min(1.0)
        })
        .collect())
}

/// Pearson correlation; zero when either input is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_bits() {
        let spec = SynthSpec::new(7, vec![3, 2], 50, 1, 2.0);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.data, b.data);
        assert_eq!(a.latents, b.latents);
        let c = generate(&SynthSpec { seed: 8, ..spec }).unwrap();
        assert_ne!(a.data, c.data);
    }

    #[test]
    fn spec_validation() {
        assert!(generate(&SynthSpec::new(1, vec![2, 3], 10, 3, 1.0)).is_err());
        assert!(generate(&SynthSpec::new(1, vec![2], 10, 1, 1.0)).is_err());
        assert!(generate(&SynthSpec::new(1, vec![2, 2], 1, 1, 1.0)).is_err());
        assert!(generate(&SynthSpec::new(1, vec![2, 2], 10, 1, -1.0)).is_err());
        assert!(generate(&SynthSpec::new(1, vec![2, 2], 10, 1, f64::NAN)).is_err());
        let mut spec = SynthSpec::new(1, vec![2, 2], 10, 1, 1.0);
        spec.mixing = Some(vec![Mat::zeros(2, 1)]);
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn mixing_columns_unit_norm_and_unmixing_inverts() {
        let r = generate(&SynthSpec::new(3, vec![4, 5, 3], 20, 2, 1.0)).unwrap();
        for (a, u) in r.mixing.iter().zip(&r.unmixing) {
            for j in 0..2 {
                assert!((dot(&a.column(j), &a.column(j)) - 1.0).abs() < 1e-14);
            }
            let ua = u.matmul(a).unwrap();
            assert!(ua.sub(&Mat::identity(2)).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn supplied_mixing_is_used() {
        let mix = vec![
            Mat::from_rows(&[[1.0], [0.0]]).unwrap(),
            Mat::from_rows(&[[0.0], [2.0]]).unwrap(),
        ];
        let mut spec = SynthSpec::new(5, vec![2, 2], 30, 1, f64::INFINITY);
        spec.mixing = Some(mix.clone());
        let r = generate(&spec).unwrap();
        assert_eq!(r.mixing, mix);
        let s = r.latents.column(0);
        assert_eq!(r.data.set(0).column(0), s);
        assert_eq!(r.data.set(0).column(1), vec![0.0; 30]);
        let doubled: Vec<f64> = s.iter().map(|v| 2.0 * v).collect();
        assert_eq!(r.data.set(1).column(1), doubled);
    }

    #[test]
    fn gaussian_moments() {
        let mut g = Gaussian::new(11);
        let z: Vec<f64> = (0..20000).map(|_| g.next()).collect();
        let mean = z.iter().sum::<f64>() / z.len() as f64;
        let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / z.len() as f64;
        assert!(mean.abs() < 0.03);
        assert!((var - 1.0).abs() < 0.05);
    }

    #[test]
    fn pearson_basics() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]), 0.5);
        assert_eq!(pearson(&[1.0, 1.0], &[1.0, 2.0]), 0.0);
    }
}
