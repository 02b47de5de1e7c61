//! Test-side numerics kept apart from the library code they check.

#![allow(clippy::needless_range_loop)]

use mcca::{generate, Mat, MultiSetData, SynthSpec};

/// splitmix64; only used to draw instance shapes and seeds.
pub struct Draw(u64);

impl Draw {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn pick<T: Copy>(&mut self, xs: &[T]) -> T {
        xs[self.below(xs.len())]
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// A random instance with a random number of shared components and random snr.
pub fn instance(draw: &mut Draw, dims: Vec<usize>, t: usize) -> MultiSetData {
    let min_d = *dims.iter().min().unwrap();
    let k = draw.below(min_d + 1);
    let snr = 0.05 + 20.0 * draw.unit();
    let spec = SynthSpec::new(draw.next_u64(), dims, t, k, snr);
    generate(&spec).unwrap().data
}

pub fn rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

pub fn mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, p, m) = (a.len(), b.len(), b[0].len());
    (0..n)
        .map(|i| (0..m).map(|j| (0..p).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

pub fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

/// Lower Cholesky factor (Cholesky-Banachiewicz).
pub fn cholesky(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                assert!(d > 0.0, "not positive definite");
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    l
}

/// Inverse of a lower-triangular matrix by forward substitution on the identity.
pub fn lower_inverse(l: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = l.len();
    let mut inv = vec![vec![0.0; n]; n];
    for c in 0..n {
        for i in 0..n {
            let rhs = if i == c { 1.0 } else { 0.0 };
            let s: f64 = (0..i).map(|k| l[i][k] * inv[k][c]).sum();
            inv[i][c] = (rhs - s) / l[i][i];
        }
    }
    inv
}

/// Eigenvalues of a symmetric matrix by classical Jacobi (largest off-diagonal pivot).
pub fn jacobi_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut a = a.to_vec();
    for _ in 0..100 * n * n {
        let (mut p, mut q, mut big) = (0, 0, 0.0f64);
        for i in 0..n {
            for j in i + 1..n {
                if a[i][j].abs() > big {
                    (p, q, big) = (i, j, a[i][j].abs());
                }
            }
        }
        let scale: f64 = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max);
        if big <= 1e-15 * scale || big == 0.0 {
            break;
        }
        let theta = 0.5 * (2.0 * a[p][q]).atan2(a[q][q] - a[p][p]);
        let (s, c) = theta.sin_cos();
        for k in 0..n {
            let (akp, akq) = (a[k][p], a[k][q]);
            a[k][p] = c * akp - s * akq;
            a[k][q] = s * akp + c * akq;
        }
        for k in 0..n {
            let (apk, aqk) = (a[p][k], a[q][k]);
            a[p][k] = c * apk - s * aqk;
            a[q][k] = s * apk + c * aqk;
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Orthonormal basis of the column span by two-pass Gram-Schmidt, as columns.
fn orthonormal_columns(m: &Mat) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for j in 0..m.cols() {
        let mut v = m.column(j);
        for _ in 0..2 {
            for q in &out {
                let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= d * b);
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        out.push(v.iter().map(|x| x / n).collect());
    }
    out
}

/// Largest principal angle between two column spans of equal dimension.
pub fn max_principal_angle(a: &Mat, b: &Mat) -> f64 {
    let (qa, qb) = (orthonormal_columns(a), orthonormal_columns(b));
    let c: Vec<Vec<f64>> = qa
        .iter()
        .map(|x| qb.iter().map(|y| x.iter().zip(y).map(|(p, q)| p * q).sum()).collect())
        .collect();
    let g = mul(&transpose(&c), &c);
    let smallest = *jacobi_eigenvalues(&g).last().unwrap();
    smallest.clamp(0.0, 1.0).sqrt().acos()
}

/// Index ranges of eigenvalues (sorted descending) separated by more than `rel · max|λ|`.
pub fn clusters(values: &[f64], rel: f64) -> Vec<std::ops::Range<usize>> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i - 1] - values[i] > rel * scale {
            out.push(start..i);
            start = i;
        }
    }
    out
}
