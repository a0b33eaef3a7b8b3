//! Equivalent measures, densities, minimal penalties, closed forms and premium measures.
//!
//! Densities follow `dQ/dP = exp(int q dB - 1/2 int |q|^2 ds)`: under `Q` the
//! process `B - int q ds` is Brownian, so a linear generator `b . z` prices under
//! the measure with `q = b`.

mod closed_form;
mod measure;
mod premium;

pub use closed_form::closed_form;
pub use measure::{build_mc_density, build_tree_density, penalty_mc, MeasureSpec, QKernel};
pub use premium::{build_premium_measure, premium_identity, PremiumIdentity};
