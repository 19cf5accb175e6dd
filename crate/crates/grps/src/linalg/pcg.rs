//! Preconditioned conjugate gradients for SPD systems.

use super::sparse::{axpy, dot, norm2, SparseSym};
use crate::error::{GrpsError, Result};

/// Iteration cap as a multiple of the system dimension.
const CAP_FACTOR: usize = 20;

/// Solve A x = b for SPD A with Jacobi-preconditioned CG.
///
/// Terminates when ||A x - b|| <= tol * ||b||. `tol` must lie in (0, 1e-6].
pub fn solve_spd(a: &SparseSym, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let n = a.dim();
    if b.len() != n {
        return Err(GrpsError::InvalidArgument(format!(
            "rhs length {} does not match dimension {}",
            b.len(),
            n
        )));
    }
    if !(tol > 0.0 && tol <= 1e-6) {
        return Err(GrpsError::InvalidArgument(format!(
            "tolerance {tol:.3e} outside (0, 1e-6]"
        )));
    }
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let diag = a.diagonal();
    for (i, &d) in diag.iter().enumerate() {
        if d <= 0.0 {
            return Err(GrpsError::NotSpd(format!(
                "nonpositive diagonal {d:.3e} at row {i}"
            )));
        }
    }
    let inv_diag: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    let cap = CAP_FACTOR * n;
    for _ in 0..cap {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(GrpsError::NotSpd(format!(
                "nonpositive curvature p'Ap = {pap:.3e}"
            )));
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        if norm2(&r) <= tol * bnorm {
            return Ok(x);
        }
        for ((zi, ri), di) in z.iter_mut().zip(&r).zip(&inv_diag) {
            *zi = ri * di;
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(GrpsError::SolverFailure {
        achieved: norm2(&r) / bnorm,
        target: tol,
        iterations: cap,
    })
}
