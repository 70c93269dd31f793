// negated comparisons are used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Steepest-descent asymptotics of the terms `A(n, s)` of the globally
//! convergent series `ζ(s) = Σ A(n, s)`, in the regime `t = a·n`, `n → ∞`.
//!
//! The crate evaluates `A(n, s)` directly (binomial sum, quadrature) and
//! asymptotically (saddle-point expansion over the contributory saddles),
//! and traces the descent paths that decide which saddles contribute.

pub mod cli;
pub mod cnum;
pub mod direct;
pub mod error;
pub mod phase;
pub mod saddles;
pub mod sdexp;
pub mod tables;
pub mod tracer;

pub use cnum::{ComplexVal, LogComplex};
pub use direct::SeriesPoint;
pub use error::{Error, Result};
