//! Numerical laboratory for short-time heat-kernel asymptotics.
//!
//! The crate computes heat-trace coefficients of second-order elliptic operators
//! and cross-checks them against exact spectral sums.

pub mod error;
pub mod formfactors;
pub mod hmds;
pub mod linalg;
pub mod nonlaplace;
pub mod oblique;
pub mod quad;
pub mod special;
pub mod spectra;
pub mod symmspace;
pub mod tensorcalc;
pub mod zaremba;

pub use error::{Error, Result};
