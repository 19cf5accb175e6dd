//! Sparse symmetric matrices (lower-triangle CSR) and sparse row vectors.

use crate::error::{GrpsError, Result};

/// Symmetric sparse matrix storing the lower triangle in CSR form.
///
/// Indices are sorted within each row and no explicit zeros are kept.
/// The full matrix is implied by symmetry.
#[derive(Debug, Clone)]
pub struct SparseSym {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Accumulates (i, j, v) triplets and builds a [`SparseSym`].
///
/// Entries may repeat; duplicates are summed. Upper-triangle pushes are
/// mirrored to the lower triangle.
pub struct SymCooBuilder {
    n: usize,
    entries: Vec<(u32, u32, f64)>,
}

impl SymCooBuilder {
    pub fn new(n: usize) -> Self {
        SymCooBuilder {
            n,
            entries: Vec::new(),
        }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.entries.push((r as u32, c as u32, v));
    }

    pub fn build(mut self) -> SparseSym {
        self.entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut it = self.entries.iter().peekable();
        while let Some(&(i, j, v)) = it.next() {
            let mut sum = v;
            while let Some(&&(i2, j2, v2)) = it.peek() {
                if i2 == i && j2 == j {
                    sum += v2;
                    it.next();
                } else {
                    break;
                }
            }
            if sum != 0.0 {
                col_idx.push(j as usize);
                values.push(sum);
                row_ptr[i as usize + 1] += 1;
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseSym {
            n: self.n,
            row_ptr,
            col_idx,
            values,
        }
    }
}

impl SparseSym {
    pub fn identity(n: usize) -> Self {
        SparseSym {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz_lower(&self) -> usize {
        self.values.len()
    }

    /// Entries of the lower-triangle row `i` as (column, value) pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    /// y = A x using the implied full symmetric matrix.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.fill(0.0);
        for i in 0..self.n {
            let lo = self.row_ptr[i];
            let hi = self.row_ptr[i + 1];
            let xi = x[i];
            let mut acc = 0.0;
            for k in lo..hi {
                let j = self.col_idx[k];
                let v = self.values[k];
                acc += v * x[j];
                if j != i {
                    y[j] += v * xi;
                }
            }
            y[i] += acc;
        }
    }

    /// x' A x.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    /// x' A y.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let mut acc = 0.0;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let v = self.values[k];
                if j == i {
                    acc += v * x[i] * y[i];
                } else {
                    acc += v * (x[i] * y[j] + x[j] * y[i]);
                }
            }
        }
        acc
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                if j == i {
                    d[i] = v;
                }
            }
        }
        d
    }

    /// Largest |i - j| over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut b = 0;
        for i in 0..self.n {
            if self.row_ptr[i] < self.row_ptr[i + 1] {
                let first = self.col_idx[self.row_ptr[i]];
                b = b.max(i - first);
            }
        }
        b
    }

    /// Restriction A[dofs, dofs] in the ordering of `dofs` (must be sorted
    /// ascending). The result stays lower-triangular.
    pub fn restrict(&self, dofs: &[usize], local_of: &[i64]) -> SparseSym {
        let nl = dofs.len();
        let mut row_ptr = vec![0usize; nl + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for (li, &gi) in dofs.iter().enumerate() {
            for (gj, v) in self.row(gi) {
                let lj = local_of[gj];
                if lj >= 0 {
                    col_idx.push(lj as usize);
                    values.push(v);
                }
            }
            row_ptr[li + 1] = col_idx.len();
        }
        SparseSym {
            n: nl,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// self + s * other, with the union of both patterns.
    pub fn add_scaled(&self, s: f64, other: &SparseSym) -> Result<SparseSym> {
        if self.n != other.n {
            return Err(GrpsError::InvalidArgument(format!(
                "dimension mismatch in matrix sum: {} vs {}",
                self.n, other.n
            )));
        }
        let mut b = SymCooBuilder::new(self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                b.push(i, j, v);
            }
            for (j, v) in other.row(i) {
                b.push(i, j, s * v);
            }
        }
        Ok(b.build())
    }

    /// Dense copy of the full symmetric matrix (for small oracles/tests).
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }
}

/// Sparse vector with sorted indices.
#[derive(Debug, Clone, Default)]
pub struct SparseVec {
    pub idx: Vec<usize>,
    pub val: Vec<f64>,
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_unstable_by_key(|&(i, _)| i);
        let mut idx = Vec::with_capacity(pairs.len());
        let mut val = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            if let Some(&last) = idx.last() {
                if last == i {
                    *val.last_mut().unwrap() += v;
                    continue;
                }
            }
            idx.push(i);
            val.push(v);
        }
        SparseVec { idx, val }
    }

    pub fn nnz(&self) -> usize {
        self.idx.len()
    }

    pub fn dot_dense(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (&i, &v) in self.idx.iter().zip(&self.val) {
            acc += v * x[i];
        }
        acc
    }

    /// y += s * self scattered into a dense vector.
    pub fn axpy_into(&self, s: f64, y: &mut [f64]) {
        for (&i, &v) in self.idx.iter().zip(&self.val) {
            y[i] += s * v;
        }
    }

    /// Restriction onto a local index set; entries mapping to -1 are dropped.
    pub fn restrict(&self, local_of: &[i64]) -> SparseVec {
        let mut idx = Vec::new();
        let mut val = Vec::new();
        for (&i, &v) in self.idx.iter().zip(&self.val) {
            let li = local_of[i];
            if li >= 0 {
                idx.push(li as usize);
                val.push(v);
            }
        }
        SparseVec { idx, val }
    }

    pub fn norm2(&self) -> f64 {
        self.val.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Merge-based dot of two sparse vectors.
    pub fn dot_sparse(&self, other: &SparseVec) -> f64 {
        let mut acc = 0.0;
        let (mut a, mut b) = (0, 0);
        while a < self.idx.len() && b < other.idx.len() {
            match self.idx[a].cmp(&other.idx[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.val[a] * other.val[b];
                    a += 1;
                    b += 1;
                }
            }
        }
        acc
    }
}

/// A set of sparse rows sharing a common column dimension.
#[derive(Debug, Clone)]
pub struct SparseRows {
    pub ncols: usize,
    pub rows: Vec<SparseVec>,
}

impl SparseRows {
    pub fn new(ncols: usize) -> Self {
        SparseRows {
            ncols,
            rows: Vec::new(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    /// Apply every row to a dense vector: result[i] = rows[i] . x
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.dot_dense(x)).collect()
    }

    /// y += C' lambda.
    pub fn transpose_axpy(&self, lambda: &[f64], y: &mut [f64]) {
        for (r, &l) in self.rows.iter().zip(lambda) {
            r.axpy_into(l, y);
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows(), self.ncols);
        for (i, r) in self.rows.iter().enumerate() {
            for (&j, &v) in r.idx.iter().zip(&r.val) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
