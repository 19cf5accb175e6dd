//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GrpsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A coefficient field value is nonpositive or otherwise unusable.
    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    /// Raster file could not be parsed; `line` is 1-based.
    #[error("raster parse error at line {line}: {msg}")]
    RasterParse { line: usize, msg: String },

    /// Iterative solver ran out of iterations.
    #[error("solver failed to converge: achieved relative residual {achieved:.3e} (target {target:.3e}) after {iterations} iterations")]
    SolverFailure {
        achieved: f64,
        target: f64,
        iterations: usize,
    },

    /// A matrix expected to be SPD turned out not to be.
    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    /// Constraint block is rank deficient; `rows` are the offending row ids
    /// in the caller's indexing.
    #[error("constraint rows are linearly dependent: rows {rows:?}")]
    ConstraintRank { rows: Vec<usize> },

    /// A localized basis problem has no feasible solution.
    #[error("basis row {row} infeasible at level {level}: {source}")]
    BasisInfeasible {
        row: usize,
        level: usize,
        #[source]
        source: Box<GrpsError>,
    },

    /// Coarse stiffness is singular (dependent basis vectors).
    #[error("degenerate coarse basis: {0}")]
    DegenerateBasis(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GrpsError>;
