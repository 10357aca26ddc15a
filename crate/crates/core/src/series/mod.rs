//! Truncated sparse series over the rationals.
//!
//! Three layers of generality share the same storage discipline (sorted
//! maps, no explicit zeros, an explicit precision bound):
//!
//! * [`qseries`] - one-variable expansions in fractional powers of q, the
//!   home of eta and theta constants;
//! * [`jacobi`] - two-variable expansions in q and a Laurent variable z,
//!   the home of index-1 Jacobi forms;
//! * [`ortho`] - three-variable expansions q^n zeta^r xi^m indexed by
//!   half-integers, the Fourier side of orthogonal modular forms for
//!   signature (3, 2).
//!
//! [`fser`] serializes all three shapes into a plain-text interchange
//! format with exact rational coefficients.

pub mod fser;
pub mod jacobi;
pub mod ortho;
pub mod qseries;

use thiserror::Error;

/// Failures of the structural series operations.  Precision bookkeeping is
/// never an error: results are truncated to whatever can be certified.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeriesError {
    #[error("operands live on different parity classes")]
    ParityMismatch,
    #[error("index ({0}, {1}, {2}) mixes integral and half-integral entries")]
    MixedIndex(i64, i64, i64),
    #[error("{0} needs a series with nonempty support")]
    EmptySupport(&'static str),
    #[error("leading part is not a perfect square: {0}")]
    NotASquare(String),
    #[error("division is inexact: {0}")]
    InexactDivision(String),
    #[error("content of the zero series is undefined")]
    ZeroContent,
}
