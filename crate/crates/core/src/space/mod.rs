//! The split space `R^N = R^{n1} x R^{n2}`, partially regular vector fields,
//! grid sampling, and validators for the growth assumption.

mod field;
pub(crate) mod grid;
mod growth;
pub(crate) mod io;

pub use field::{Block1Fn, Block2Fn, PartiallyRegularField};
pub use grid::{divergence_on_grid, sample_field, sample_to_grid, Extension, GridFunction, GridSpec};
pub use growth::{verify_growth_decomposition, GrowthDecomposition, GrowthReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimensions of the two coordinate blocks `x = (x1, x2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSplit", into = "RawSplit")]
pub struct SpaceSplit {
    n1: usize,
    n2: usize,
}

#[derive(Serialize, Deserialize)]
struct RawSplit {
    n1: usize,
    n2: usize,
}

impl TryFrom<RawSplit> for SpaceSplit {
    type Error = Error;

    fn try_from(raw: RawSplit) -> Result<Self> {
        SpaceSplit::new(raw.n1, raw.n2)
    }
}

impl From<SpaceSplit> for RawSplit {
    fn from(s: SpaceSplit) -> Self {
        RawSplit { n1: s.n1, n2: s.n2 }
    }
}

impl SpaceSplit {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidSplit { n1, n2 });
        }
        Ok(SpaceSplit { n1, n2 })
    }

    /// The planar split `R^2 = R x R` used by most experiments.
    pub fn planar() -> Self {
        SpaceSplit { n1: 1, n2: 1 }
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// Total dimension `N = n1 + n2`.
    pub fn dim(&self) -> usize {
        self.n1 + self.n2
    }

    /// Splits a point into its `(x1, x2)` blocks.
    pub fn blocks<'a>(&self, x: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        x.split_at(self.n1)
    }
}
