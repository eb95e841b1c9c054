//! Analytic tools on grids: mollification in `x1`, maximal functions, weak
//! and fractional norms, the anisotropic operator `U`, and the checks built
//! on them.

mod anisotropic;
mod interpolation;
pub(crate) mod maximal;
mod mollify;
mod norms;
mod quotient;
mod rates;
mod seminorm;

pub use anisotropic::{anisotropic_u, anisotropic_u_block, u_bound_check, AnisotropicScale, DerivativeBlock, UBoundReport};
pub use interpolation::{interpolation_bound, InterpolationReport};
pub use maximal::maximal_function;
pub use mollify::{mollify_x1, MollifierKernel, Mollified};
pub use norms::{lp_norm, norm_report, region_measure, weak_l1, weak_l1_norm, NormReport};
pub use quotient::{difference_quotient_check, QuotientReport};
pub use rates::{linear_fit, rate_fit, RateFit, RateSample};
pub use seminorm::{fractional_seminorm, SeminormEstimate};
