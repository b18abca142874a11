//! Numerical laboratory for Landau-Lifshitz-Gilbert flows on the torus, their
//! moving-frame reformulation as a gauged complex Ginzburg-Landau system, and
//! the Morrey-type norms used to measure both.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cgl;
pub mod error;
pub mod field;
pub mod frame;
pub mod lab;
pub mod llg;
pub mod morrey;
pub mod semigroup;
pub mod snapshot;
pub mod trajectory;

pub use error::{LabError, Result};
