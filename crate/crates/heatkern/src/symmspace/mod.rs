//! Algebraic heat traces for covariantly constant backgrounds.

mod nilpotent;
mod space;
mod theta;

pub use nilpotent::{nilpotent_trace_density, ConstantFieldStrength};
pub use space::{build_symmetric_space, SymmetricFixture, SymmetricSpaceData};
pub use theta::{theta_quadrature, theta_series, theta_t_max, MAX_THETA_ORDER};
