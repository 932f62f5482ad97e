//! Precision-certified linear algebra over `Q` and over `K`.
//!
//! "Zero" is always decided by comparing a valuation with a precision, never
//! by a tolerance. An entry that is indistinguishable from zero but known to
//! fewer than `zero_prec` digits makes elimination stop with an error rather
//! than guess.

pub mod matrix;
pub mod scalar;
pub mod sparse;

pub use matrix::{Echelon, PrecMatrix, SolveOutcome};
pub use scalar::{Scalar, Status};
pub use sparse::{axpy, normalize, SparseMatrix, SparseVec};
