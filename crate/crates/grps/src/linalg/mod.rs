//! Sparse storage and the two solver kernels the pipeline needs:
//! SPD systems (conjugate gradients) and saddle-point systems (banded
//! Cholesky plus dense Schur complement).

mod band;
mod dense;
mod kkt;
mod pcg;
mod sparse;

pub use band::BandCholesky;
pub use dense::{pivoted_rank, DenseCholesky, PivotedRank};
pub use kkt::{solve_kkt, KktFactor, KktSystem, RANK_TOL};
pub use pcg::solve_spd;
pub use sparse::{axpy, dot, norm2, SparseRows, SparseSym, SparseVec, SymCooBuilder};
