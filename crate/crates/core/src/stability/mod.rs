//! Logarithmic functionals between two flows, the Chebyshev superlevel
//! bound, and the parameter balance behind the stability estimate.

mod functional;
mod rhs;
mod schedule;

pub use functional::{anisotropic_functional, chebyshev_bound, log_functional, max_separation, ChebyshevPoint, FunctionalTrace};
pub use rhs::{choose_lambda, cutoff, regularization_norms, theorem_rhs, RegularizationNorms, TheoremInputs, TheoremRhsReport};
pub use schedule::{choose_parameters, schedule_exponent, ParameterChoice, ParameterSchedule, ScheduleInputs};
