//! Quantitative estimates for Lagrangian flows of partially regular vector
//! fields, measured on grids.
//!
//! - [`space`]: split space, fields, grids and grid functions.
//! - [`harmonic`]: mollification, maximal functions, weak and fractional norms.
//! - [`flow`]: particle flows, compressibility, sublevel and superlevel sets.
//! - [`stability`]: the logarithmic functional, its Chebyshev bound, the
//!   parameter schedule and the right-hand side of the estimate.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod flow;
pub mod harmonic;
pub mod quad;
pub mod reduce;
pub mod space;
pub mod stability;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fields.md")]
    mod fields {}
    #[doc = include_str!("../../../book/src/harmonic.md")]
    mod harmonic {}
    #[doc = include_str!("../../../book/src/flows.md")]
    mod flows {}
    #[doc = include_str!("../../../book/src/stability.md")]
    mod stability {}
}
