//! Banded Cholesky factorization with multi-right-hand-side solves.
//!
//! Patch stiffness blocks come out of a lexicographically ordered grid, so
//! their bandwidth is roughly the patch width. The factor is stored twice,
//! once row-oriented (for forward sweeps) and once transposed (for backward
//! sweeps), keeping both triangular passes on contiguous memory.

use super::sparse::SparseSym;
use crate::error::{GrpsError, Result};

pub struct BandCholesky {
    n: usize,
    b: usize,
    /// lo[i*(b+1) + b - i + j] = L[i][j] for j in [i-b, i]; diagonal at offset b.
    lo: Vec<f64>,
    /// up[i*(b+1) + (j - i)] = L[j][i] for j in [i, i+b]; diagonal at offset 0.
    up: Vec<f64>,
}

impl BandCholesky {
    /// Factor an SPD matrix. Fails with `NotSpd` on a nonpositive pivot.
    pub fn factor(a: &SparseSym) -> Result<BandCholesky> {
        let n = a.dim();
        let b = a.bandwidth();
        let w = b + 1;
        let mut lo = vec![0.0f64; n * w];
        let mut up = vec![0.0f64; n * w];

        // Scatter A's lower triangle into the band.
        for i in 0..n {
            for (j, v) in a.row(i) {
                lo[i * w + b - i + j] = v;
            }
        }

        for i in 0..n {
            let j0 = i.saturating_sub(b);
            for j in j0..i {
                // dot over k in [j0, j): both rows are contiguous in k
                let off_i = i * w + b - i;
                let off_j = j * w + b - j;
                let s = dot_range(&lo[off_i + j0..off_i + j], &lo[off_j + j0..off_j + j]);
                let v = (lo[off_i + j] - s) / lo[off_j + b];
                lo[off_i + j] = v;
                up[j * w + (i - j)] = v;
            }
            let off_i = i * w + b - i;
            let s = dot_range(&lo[off_i + j0..off_i + i], &lo[off_i + j0..off_i + i]);
            let d = lo[i * w + b] - s;
            if d <= 0.0 || !d.is_finite() {
                return Err(GrpsError::NotSpd(format!(
                    "nonpositive pivot {d:.3e} at row {i} during band factorization"
                )));
            }
            let d = d.sqrt();
            lo[i * w + b] = d;
            up[i * w] = d;
        }
        Ok(BandCholesky { n, b, lo, up })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// In-place solve of A x = rhs for K interleaved right-hand sides.
    ///
    /// `x` is row-major n-by-K: lane l of dof i lives at x[i*K + l].
    pub fn solve_panel<const K: usize>(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n * K);
        let w = self.b + 1;
        // forward: L y = rhs
        for i in 0..self.n {
            let j0 = i.saturating_sub(self.b);
            let off = i * w + self.b - i;
            let mut acc = [0.0f64; K];
            acc.copy_from_slice(&x[i * K..i * K + K]);
            for j in j0..i {
                let c = self.lo[off + j];
                let xa = &x[j * K..j * K + K];
                for l in 0..K {
                    acc[l] -= c * xa[l];
                }
            }
            let d = 1.0 / self.lo[i * w + self.b];
            for l in 0..K {
                acc[l] *= d;
            }
            x[i * K..i * K + K].copy_from_slice(&acc);
        }
        // backward: L' x = y
        for i in (0..self.n).rev() {
            let jhi = (i + self.b).min(self.n - 1);
            let off = i * w;
            let mut acc = [0.0f64; K];
            acc.copy_from_slice(&x[i * K..i * K + K]);
            for j in i + 1..=jhi {
                let c = self.up[off + (j - i)];
                let xa = &x[j * K..j * K + K];
                for l in 0..K {
                    acc[l] -= c * xa[l];
                }
            }
            let d = 1.0 / self.up[off];
            for l in 0..K {
                acc[l] *= d;
            }
            x[i * K..i * K + K].copy_from_slice(&acc);
        }
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        self.solve_panel::<1>(x);
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[inline]
fn dot_range(a: &[f64], b: &[f64]) -> f64 {
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sparse::SymCooBuilder;

    fn laplacian_1d(n: usize) -> SparseSym {
        let mut b = SymCooBuilder::new(n);
        for i in 0..n {
            b.push(i, i, 2.0);
            if i > 0 {
                b.push(i, i - 1, -1.0);
            }
        }
        b.build()
    }

    #[test]
    fn factor_and_solve_tridiagonal() {
        let a = laplacian_1d(50);
        let f = BandCholesky::factor(&a).unwrap();
        let xs: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut rhs = vec![0.0; 50];
        a.matvec(&xs, &mut rhs);
        let got = f.solve(&rhs);
        for (g, x) in got.iter().zip(&xs) {
            assert!((g - x).abs() < 1e-12);
        }
    }

    #[test]
    fn panel_solve_matches_single() {
        let a = laplacian_1d(33);
        let f = BandCholesky::factor(&a).unwrap();
        let mut panel = vec![0.0; 33 * 8];
        let mut singles = Vec::new();
        for l in 0..8 {
            let rhs: Vec<f64> = (0..33).map(|i| ((i + l) as f64 * 0.11).cos()).collect();
            for i in 0..33 {
                panel[i * 8 + l] = rhs[i];
            }
            singles.push(f.solve(&rhs));
        }
        f.solve_panel::<8>(&mut panel);
        for l in 0..8 {
            for i in 0..33 {
                assert!((panel[i * 8 + l] - singles[l][i]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn indefinite_rejected() {
        let mut b = SymCooBuilder::new(2);
        b.push(0, 0, 1.0);
        b.push(1, 1, -1.0);
        let a = b.build();
        assert!(matches!(
            BandCholesky::factor(&a),
            Err(GrpsError::NotSpd(_))
        ));
    }
}
