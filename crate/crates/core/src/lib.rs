//! Dynamic sampling data structures and sketched solvers.
//!
//! The crate maintains a sparse matrix under turnstile updates together with
//! weighted trees that support length-squared row and entry sampling in
//! logarithmic time. On top of that it builds:
//!
//! * [`ridge`] — sketched ridge regression returning a factored solution
//!   `AᵀSᵀX̃` with per-entry access,
//! * [`lowrank`] — a factored rank-k approximation `ARWSA` with a
//!   column-conditional row sampler whose query time is sublinear in the
//!   number of rows,
//! * [`leverage`] — leverage-score sampling via rejection from a cheap
//!   norm-proportional proposal distribution,
//! * [`svd`] — exact dense oracles (thin SVD, leverage scores, statistical
//!   dimension) sized for sketches, used for verification and for sample-size
//!   estimation.
//!
//! All randomized operations take an explicit `rand::Rng` handle; nothing in
//! the crate touches global randomness.

// Indexed loops over matrix dimensions read better than iterator chains in
// the numerical kernels.
#![allow(clippy::needless_range_loop)]

pub mod dense;
pub mod embed;
pub mod leverage;
pub mod lowrank;
pub mod ridge;
pub mod sampler;
pub mod sparse;
pub mod stats;
pub mod svd;
pub mod tree;

pub use dense::{DenseMatrix, MatrixView};
pub use sampler::{ColSampler, DynSamp, RowSampler, SamplePick};
pub use sparse::SparseMatrix;
pub use svd::SvdFactors;
pub use tree::WeightedTree;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix has no nonzero entries")]
    ZeroMatrix,
    #[error("index ({row}, {col}) out of bounds for {rows}x{cols}")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite value rejected")]
    NonFinite,
    #[error("SVD did not converge within {0} sweeps")]
    SvdNoConvergence(usize),
    #[error("row {0} has no nonzero entries")]
    EmptyRow(usize),
    #[error("id {0} not present")]
    UnknownId(usize),
    #[error("matrix is rank deficient on the selected columns")]
    RankDeficient,
    #[error("invalid rank parameter {k} for {rows}x{cols}")]
    InvalidRank { k: usize, rows: usize, cols: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("rejection acceptance ratio {ratio} exceeds 1; embedding event failed")]
    AcceptanceRatio { ratio: f64 },
    #[error("iterative solve produced non-finite values")]
    NumericalBreakdown,
    #[error("column {0} of the model is zero")]
    ZeroColumn(usize),
    #[error("stage {0} produced a zero matrix")]
    StageZero(&'static str),
    #[error("sampling budget of {0} proposals exhausted")]
    SamplingBudget(u64),
}
