//! Particle flows of partially regular fields and the measure-theoretic
//! quantities read off them.

mod compress;
mod ensemble;
mod integrate;
mod levels;

pub use compress::compressibility_constant;
pub use ensemble::FlowEnsemble;
pub use integrate::{integrate_flow, integrate_ode, Scheme};
pub use levels::{domain_mask, sublevel_mask, superlevel_measure, SublevelMask};
pub(crate) use levels::distance;
