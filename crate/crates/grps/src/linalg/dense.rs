//! Dense symmetric factorizations: plain Cholesky for SPD Schur complements
//! and a diagonally pivoted variant used to diagnose rank-deficient
//! constraint blocks.

use crate::error::{GrpsError, Result};

/// Row-major dense Cholesky (lower).
pub struct DenseCholesky {
    n: usize,
    l: Vec<f64>,
}

impl DenseCholesky {
    /// Factor a symmetric matrix given as row-major n*n data (lower read).
    pub fn factor(n: usize, a: &[f64]) -> Result<DenseCholesky> {
        assert_eq!(a.len(), n * n);
        let mut l = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..=i {
                let s = dot(&l[i * n..i * n + j], &l[j * n..j * n + j]);
                let v = a[i * n + j] - s;
                if j == i {
                    if v <= 0.0 || !v.is_finite() {
                        return Err(GrpsError::NotSpd(format!(
                            "nonpositive pivot {v:.3e} at row {i} during dense factorization"
                        )));
                    }
                    l[i * n + i] = v.sqrt();
                } else {
                    l[i * n + j] = v / l[j * n + j];
                }
            }
        }
        Ok(DenseCholesky { n, l })
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        assert_eq!(x.len(), n);
        for i in 0..n {
            let s = dot(&self.l[i * n..i * n + i], &x[..i]);
            x[i] = (x[i] - s) / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.l[j * n + i] * x[j];
            }
            x[i] = s / self.l[i * n + i];
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Outcome of the pivoted factorization: numerical rank and, if deficient,
/// the rows that never produced an acceptable pivot.
pub struct PivotedRank {
    pub rank: usize,
    pub dependent: Vec<usize>,
}

/// Diagonally pivoted Cholesky of a symmetric PSD matrix (row-major, full
/// storage). Pivots below `rel_tol` times the largest initial diagonal are
/// treated as zero.
pub fn pivoted_rank(n: usize, a: &[f64], rel_tol: f64) -> PivotedRank {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let max_diag = (0..n).map(|i| m[i * n + i]).fold(0.0f64, f64::max);
    let tol = rel_tol * max_diag;
    let mut rank = 0;
    for k in 0..n {
        // choose the largest remaining diagonal
        let (p, dmax) = (k..n)
            .map(|i| (i, m[i * n + i]))
            .fold((k, f64::NEG_INFINITY), |acc, cur| {
                if cur.1 > acc.1 {
                    cur
                } else {
                    acc
                }
            });
        if dmax <= tol || !dmax.is_finite() {
            break;
        }
        if p != k {
            perm.swap(k, p);
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            for i in 0..n {
                m.swap(i * n + k, i * n + p);
            }
        }
        let piv = m[k * n + k].sqrt();
        m[k * n + k] = piv;
        for i in k + 1..n {
            m[i * n + k] /= piv;
        }
        for i in k + 1..n {
            let lik = m[i * n + k];
            for j in k + 1..=i {
                m[i * n + j] -= lik * m[j * n + k];
            }
        }
        rank += 1;
    }
    let mut dependent: Vec<usize> = perm[rank..].to_vec();
    dependent.sort_unstable();
    PivotedRank { rank, dependent }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = c * 4;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in chunks * 4..a.len() {
        s += a[i] * b[i];
    }
    s
}
