//! Eigendecompositions.
//!
//! [`sym_eig`] is a cyclic Jacobi solver and the workhorse of the crate.
//! [`general_eig_real`] handles non-symmetric matrices that are similar to a
//! symmetric one (such as `D⁻¹R`) and is kept as an independent route for
//! cross-checking the symmetric reductions.

use crate::error::{MccaError, Result};
use crate::matrix::{dot, norm2, Mat};

const JACOBI_REL_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;
const SYMMETRY_TOL: f64 = 1e-10;
const IMAG_TOL: f64 = 1e-8;
const CLUSTER_TOL: f64 = 1e-9;
const QR_MAX_ITER_PER_VALUE: usize = 60;

/// Eigenpairs of a symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct SymEig {
    /// Columns are orthonormal eigenvectors.
    pub vectors: Mat,
    pub values: Vec<f64>,
}

/// Real eigenpairs of a diagonalizable matrix with real spectrum, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct GeneralEig {
    pub values: Vec<f64>,
    /// Columns are unit-norm eigenvectors.
    pub vectors: Mat,
}

fn require_square(a: &Mat) -> Result<usize> {
    if !a.is_square() {
        return Err(MccaError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if let Some(p) = a.as_slice().iter().position(|x| !x.is_finite()) {
        return Err(MccaError::NonFinite {
            row: p / a.cols(),
            col: p % a.cols(),
        });
    }
    Ok(a.rows())
}

/// Flips each column so its largest-magnitude entry is positive (first index wins ties).
pub(crate) fn fix_column_signs(v: &mut Mat) {
    for j in 0..v.cols() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for i in 0..v.rows() {
            let a = v.get(i, j).abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if v.rows() > 0 && v.get(best, j) < 0.0 {
            for i in 0..v.rows() {
                v.set(i, j, -v.get(i, j));
            }
        }
    }
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// The input is symmetrized by averaging with its transpose; asymmetry above
/// `1e-10 · max|a|` is rejected. Sweeps stop once the off-diagonal Frobenius
/// norm drops below `1e-12` of the initial Frobenius norm. Eigenvectors are
/// sign-normalized so their largest-magnitude entry is positive.
pub fn sym_eig(a: &Mat) -> Result<SymEig> {
    let n = require_square(a)?;
    let asym = a.asymmetry();
    if asym > SYMMETRY_TOL * a.max_abs() {
        return Err(MccaError::NotSymmetric { asymmetry: asym });
    }

    let mut w = Mat::from_fn_unchecked(n, n, |i, j| 0.5 * (a.get(i, j) + a.get(j, i)));
    let mut v = Mat::identity(n);
    let threshold = JACOBI_REL_TOL * w.frobenius();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += w.get(i, j) * w.get(i, j);
                }
            }
        }
        if off.sqrt() <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut w, &mut v, p, q);
            }
        }
    }

    let diag = w.diagonal();
    let order = descending_order(&diag);
    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = v.select_columns(&order);
    fix_column_signs(&mut vectors);
    Ok(SymEig { vectors, values })
}

/// One Jacobi rotation annihilating `w[p,q]`, accumulated into `v`.
fn rotate(w: &mut Mat, v: &mut Mat, p: usize, q: usize) {
    let apq = w.get(p, q);
    if apq == 0.0 {
        return;
    }
    let app = w.get(p, p);
    let aqq = w.get(q, q);
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;
    let n = w.rows();

    for k in 0..n {
        let akp = w.get(k, p);
        let akq = w.get(k, q);
        w.set(k, p, c * akp - s * akq);
        w.set(k, q, s * akp + c * akq);
    }
    for k in 0..n {
        let apk = w.get(p, k);
        let aqk = w.get(q, k);
        w.set(p, k, c * apk - s * aqk);
        w.set(q, k, s * apk + c * aqk);
    }
    w.set(p, p, app - t * apq);
    w.set(q, q, aqq + t * apq);
    w.set(p, q, 0.0);
    w.set(q, p, 0.0);

    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, c * vkp - s * vkq);
        v.set(k, q, s * vkp + c * vkq);
    }
}

/// Eigenpairs of a real square matrix whose spectrum is real.
///
/// Eigenvalues come from Householder reduction to Hessenberg form followed by
/// the Francis double-shift QR iteration; eigenvectors from inverse iteration
/// on the original matrix. Eigenvalues within `1e-9` (relative) of each other
/// are treated as one cluster and receive linearly independent vectors.
/// An eigenvalue with imaginary part above `1e-8` of the spectral scale is an
/// error: it signals the matrix is not similar to a symmetric one.
pub fn general_eig_real(a: &Mat) -> Result<GeneralEig> {
    let n = require_square(a)?;
    if n == 0 {
        return Ok(GeneralEig {
            values: vec![],
            vectors: Mat::zeros(0, 0),
        });
    }

    let mut h = a.clone();
    hessenberg(&mut h);
    let (re, im) = hqr(&mut h)?;

    let scale = re
        .iter()
        .zip(&im)
        .map(|(r, i)| r.hypot(*i))
        .fold(0.0, f64::max);
    if let Some(bad) = im.iter().copied().find(|x| x.abs() > IMAG_TOL * scale) {
        return Err(MccaError::ComplexEigenvalue { imag: bad });
    }

    let order = descending_order(&re);
    let values: Vec<f64> = order.iter().map(|&i| re[i]).collect();

    let norm = a.max_abs() * n as f64;
    let mut vectors = Mat::zeros(n, n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end - 1] - values[end] <= CLUSTER_TOL * scale.max(f64::MIN_POSITIVE) {
            end += 1;
        }
        // one shift per cluster, centered on the cluster's eigenvalues
        let shift = values[start..end].iter().sum::<f64>() / (end - start) as f64;
        let lu = Lu::factor(a, shift, norm);
        let mut found: Vec<Vec<f64>> = Vec::with_capacity(end - start);
        for member in 0..(end - start) {
            let mut x: Vec<f64> = (0..n).map(|i| start_entry(i, start + member)).collect();
            for _ in 0..4 {
                x = lu.solve(&x);
                for _ in 0..2 {
                    for f in &found {
                        let c = dot(&x, f);
                        x.iter_mut().zip(f).for_each(|(xi, fi)| *xi -= c * fi);
                    }
                }
                let nx = norm2(&x);
                if nx == 0.0 || !nx.is_finite() {
                    x = (0..n).map(|i| start_entry(i, start + member + 7)).collect();
                    continue;
                }
                x.iter_mut().for_each(|xi| *xi /= nx);
            }
            found.push(x);
        }
        for (k, x) in found.iter().enumerate() {
            vectors.set_column(start + k, x);
        }
        start = end;
    }
    fix_column_signs(&mut vectors);
    Ok(GeneralEig { values, vectors })
}

/// Deterministic pseudo-random start vector entry in [-1, 1] (splitmix64 of the position).
fn start_entry(i: usize, seed: usize) -> f64 {
    let mut z = (i as u64)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((seed as u64).wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add(0x2545_F491_4F6C_DD1D);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

/// LU factorization with partial pivoting of `a - shift·I`; tiny pivots are
/// replaced by `eps · norm` so the solve stays finite at an exact eigenvalue.
struct Lu {
    lu: Mat,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(a: &Mat, shift: f64, norm: f64) -> Self {
        let n = a.rows();
        let mut lu = a.clone();
        for i in 0..n {
            lu.add_at(i, i, -shift);
        }
        let floor = f64::EPSILON * norm.max(f64::MIN_POSITIVE);
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut piv = k;
            for i in (k + 1)..n {
                if lu.get(i, k).abs() > lu.get(piv, k).abs() {
                    piv = i;
                }
            }
            if piv != k {
                perm.swap(k, piv);
                for j in 0..n {
                    let t = lu.get(k, j);
                    lu.set(k, j, lu.get(piv, j));
                    lu.set(piv, j, t);
                }
            }
            if lu.get(k, k).abs() < floor {
                lu.set(k, k, if lu.get(k, k) < 0.0 { -floor } else { floor });
            }
            let d = lu.get(k, k);
            for i in (k + 1)..n {
                let f = lu.get(i, k) / d;
                lu.set(i, k, f);
                if f != 0.0 {
                    for j in (k + 1)..n {
                        lu.add_at(i, j, -f * lu.get(k, j));
                    }
                }
            }
        }
        Self { lu, perm }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.lu.get(i, k) * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                x[i] -= self.lu.get(i, k) * x[k];
            }
            x[i] /= self.lu.get(i, i);
        }
        x
    }
}

/// Householder reduction to upper Hessenberg form (EISPACK `orthes`), in place.
#[allow(clippy::needless_range_loop)]
fn hessenberg(h: &mut Mat) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let high = n - 1;
    let mut ort = vec![0.0; n];
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h.get(i, m - 1).abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h.get(i, m - 1) / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;

        for j in m..n {
            let f = (m..=high).rev().map(|i| ort[i] * h.get(i, j)).sum::<f64>() / hh;
            for i in m..=high {
                h.add_at(i, j, -f * ort[i]);
            }
        }
        for i in 0..=high {
            let f = (m..=high).rev().map(|j| ort[j] * h.get(i, j)).sum::<f64>() / hh;
            for j in m..=high {
                h.add_at(i, j, -f * ort[j]);
            }
        }
        h.set(m, m - 1, scale * g);
        for i in (m + 1)..=high {
            h.set(i, m - 1, 0.0);
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix by the Francis double-shift QR
/// iteration (EISPACK `hqr`). Returns real and imaginary parts.
fn hqr(h: &mut Mat) -> Result<(Vec<f64>, Vec<f64>)> {
    let nn = h.rows() as isize;
    let mut d = vec![0.0; nn as usize];
    let mut e = vec![0.0; nn as usize];
    let eps = f64::EPSILON;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r, mut s, mut z);
    let (mut w, mut x, mut y);

    let at = |h: &Mat, i: isize, j: isize| h.get(i as usize, j as usize);
    let put = |h: &mut Mat, i: isize, j: isize, v: f64| h.set(i as usize, j as usize, v);

    let mut norm = 0.0;
    for i in 0..nn {
        for j in (i - 1).max(0)..nn {
            norm += at(h, i, j).abs();
        }
    }

    let mut n = nn - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let limit = QR_MAX_ITER_PER_VALUE * (nn as usize).max(1);
    while n >= 0 {
        let mut l = n;
        while l > 0 {
            s = at(h, l - 1, l - 1).abs() + at(h, l, l).abs();
            if s == 0.0 {
                s = norm;
            }
            if at(h, l, l - 1).abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == n {
            d[n as usize] = at(h, n, n) + exshift;
            e[n as usize] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == n - 1 {
            w = at(h, n, n - 1) * at(h, n - 1, n);
            p = (at(h, n - 1, n - 1) - at(h, n, n)) / 2.0;
            q = p * p + w;
            z = q.abs().sqrt();
            x = at(h, n, n) + exshift;
            let (a, b) = ((n - 1) as usize, n as usize);
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                d[a] = x + z;
                d[b] = if z != 0.0 { x - w / z } else { d[a] };
                e[a] = 0.0;
                e[b] = 0.0;
            } else {
                d[a] = x + p;
                d[b] = x + p;
                e[a] = z;
                e[b] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            x = at(h, n, n);
            y = at(h, n - 1, n - 1);
            w = at(h, n, n - 1) * at(h, n - 1, n);

            // exceptional shifts
            if iter == 10 {
                exshift += x;
                for i in 0..=n {
                    put(h, i, i, at(h, i, i) - x);
                }
                s = at(h, n, n - 1).abs() + at(h, n - 1, n - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in 0..=n {
                        put(h, i, i, at(h, i, i) - s);
                    }
                    exshift += s;
                    x = 0.964;
                    y = x;
                    w = x;
                }
            }

            iter += 1;
            total += 1;
            if total > limit {
                return Err(MccaError::NoConvergence { iterations: total });
            }

            // two consecutive small sub-diagonal elements
            let mut m = n - 2;
            loop {
                z = at(h, m, m);
                r = x - z;
                s = y - z;
                p = (r * s - w) / at(h, m + 1, m) + at(h, m, m + 1);
                q = at(h, m + 1, m + 1) - z - r - s;
                r = at(h, m + 2, m + 1);
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if at(h, m, m - 1).abs() * (q.abs() + r.abs())
                    < eps
                        * (p.abs()
                            * (at(h, m - 1, m - 1).abs() + z.abs() + at(h, m + 1, m + 1).abs()))
                {
                    break;
                }
                m -= 1;
            }

            for i in (m + 2)..=n {
                put(h, i, i - 2, 0.0);
                if i > m + 2 {
                    put(h, i, i - 3, 0.0);
                }
            }

            // double QR step on rows l..=n, columns m..=n
            let mut k = m;
            while k < n {
                let notlast = k != n - 1;
                if k != m {
                    p = at(h, k, k - 1);
                    q = at(h, k + 1, k - 1);
                    r = if notlast { at(h, k + 2, k - 1) } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        k += 1;
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = (p * p + q * q + r * r).sqrt();
                if p < 0.0 {
                    s = -s;
                }
                if s != 0.0 {
                    if k != m {
                        put(h, k, k - 1, -s * x);
                    } else if l != m {
                        put(h, k, k - 1, -at(h, k, k - 1));
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;

                    for j in k..nn {
                        p = at(h, k, j) + q * at(h, k + 1, j);
                        if notlast {
                            p += r * at(h, k + 2, j);
                            put(h, k + 2, j, at(h, k + 2, j) - p * z);
                        }
                        put(h, k, j, at(h, k, j) - p * x);
                        put(h, k + 1, j, at(h, k + 1, j) - p * y);
                    }
                    for i in 0..=n.min(k + 3) {
                        p = x * at(h, i, k) + y * at(h, i, k + 1);
                        if notlast {
                            p += z * at(h, i, k + 2);
                            put(h, i, k + 2, at(h, i, k + 2) - p * r);
                        }
                        put(h, i, k, at(h, i, k) - p);
                        put(h, i, k + 1, at(h, i, k + 1) - p * q);
                    }
                }
                k += 1;
            }
        }
    }
    Ok((d, e))
}
