//! Exact-spectrum oracles and asymptotic-series fitting.

pub mod fit;
pub mod models;

pub use fit::{fit_expansion, geometric_grid, FitResult};
pub use models::{
    circle_trace, interval_trace, landau_direct_sum, landau_trace_density, quadratic_part, sphere_trace,
    torus_potential_trace, IntervalBc, Level, ModelDescriptor, SpectralModel, TorusPotentialTrace, TraceSum,
};
