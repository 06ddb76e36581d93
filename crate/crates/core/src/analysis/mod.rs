//! Estimators that turn qualitative statements about solutions into numbers:
//! Hölder seminorms and `C^{1,α}` norms, oscillation decay over parabolic
//! cylinders, difference quotients and their advection–diffusion
//! inequalities, sup/inf convolutions, and rate fits.

mod convolution;
mod holder;
mod oscillation;
mod quotients;
mod rates;

pub use convolution::{inf_convolution, sup_convolution};
pub use holder::{c1alpha_norm, default_pair_window, holder_seminorm, HolderReport};
pub(crate) use oscillation::least_squares;
pub use oscillation::{oscillation_sequence, CylinderSpec, OscillationReport};
pub use quotients::{
    advection_inequality_residuals, default_source_bound, difference_quotient, subsolution_excess, InequalityExcess,
    InequalityParams,
};
pub use rates::{dyadic_ladder, fit_rate, Coverage, RateFit, RateModel};
