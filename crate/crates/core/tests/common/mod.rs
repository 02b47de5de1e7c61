#![allow(dead_code)]

use mcca::{sym_eig, Mat, MultiSetData};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct TestRng(ChaCha8Rng);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> Mat {
        Mat::from_fn(rows, cols, |_, _| self.normal()).unwrap()
    }

    pub fn vector(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }
}

/// Sets sharing `shared` latent signals plus independent noise, with random offsets.
pub fn random_sets(rng: &mut TestRng, dims: &[usize], t: usize, shared: usize) -> MultiSetData {
    let s = rng.matrix(t, shared);
    let sets = dims
        .iter()
        .map(|&d| {
            let a = rng.matrix(shared, d);
            let noise = rng.matrix(t, d);
            let offset = rng.vector(d);
            let signal = s.matmul(&a).unwrap();
            Mat::from_fn(t, d, |i, j| signal[(i, j)] + noise[(i, j)] + 3.0 * offset[j]).unwrap()
        })
        .collect();
    MultiSetData::load(sets).unwrap()
}

/// Orthonormal basis of the column span (modified Gram-Schmidt, two passes).
pub fn orthonormal_basis(m: &Mat) -> Mat {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for j in 0..m.cols() {
        let mut v = m.column(j);
        for _ in 0..2 {
            for c in &cols {
                let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(c).for_each(|(a, b)| *a -= d * b);
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= n);
        cols.push(v);
    }
    Mat::from_fn(m.rows(), cols.len(), |i, j| cols[j][i]).unwrap()
}

/// Largest principal angle (radians) between the column spans of `a` and `b`.
pub fn max_principal_angle(a: &Mat, b: &Mat) -> f64 {
    let qa = orthonormal_basis(a);
    let qb = orthonormal_basis(b);
    let c = qa.t_matmul(&qb).unwrap();
    let g = c.t_matmul(&c).unwrap();
    let smallest = *sym_eig(&g).unwrap().values.last().unwrap();
    smallest.clamp(0.0, 1.0).sqrt().acos()
}

pub fn columns(m: &Mat, idx: std::ops::Range<usize>) -> Mat {
    m.select_columns(&idx.collect::<Vec<_>>())
}

/// Groups consecutive descending eigenvalues closer than `rel · max|λ|`.
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

pub fn off_diagonal_max(m: &Mat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if i != j {
                worst = worst.max(m[(i, j)].abs());
            }
        }
    }
    worst
}

/// Projects every set of `data` through its part of `v` and returns the signals.
pub fn project_raw(data: &MultiSetData, v: &[f64]) -> Vec<Vec<f64>> {
    let mut o = 0;
    data.sets()
        .iter()
        .map(|x| {
            let part = &v[o..o + x.cols()];
            o += x.cols();
            x.mul_vec(part).unwrap()
        })
        .collect()
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn inverse(a: &Mat) -> Mat {
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = a.row(i).to_vec();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))
            .unwrap();
        m.swap(c, p);
        let piv = m[c][c];
        assert!(piv != 0.0, "singular matrix");
        m[c].iter_mut().for_each(|x| *x /= piv);
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                if f != 0.0 {
                    let pivot_row = m[c].clone();
                    m[r].iter_mut().zip(&pivot_row).for_each(|(x, p)| *x -= f * p);
                }
            }
        }
    }
    Mat::from_fn(n, n, |i, j| m[i][n + j]).unwrap()
}

/// Random orthogonal matrix from Gram-Schmidt on a Gaussian matrix.
pub fn random_orthogonal(rng: &mut TestRng, n: usize) -> Mat {
    orthonormal_basis(&rng.matrix(n, n))
}
