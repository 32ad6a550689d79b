//! Numerical laboratory for collapsing sequences of rotationally symmetric
//! Ricci flows on three-manifolds.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod flow;
pub mod gh;
pub mod collapse;
pub mod dilation;
pub mod interp;
pub mod io;
pub mod metric;
pub mod pinching;
pub mod pipeline;
pub mod virtual_limit;

pub use error::{Error, Result};
