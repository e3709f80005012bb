//! Recursion engine for the heat-kernel coefficients `a_k`.

pub mod expansion;
pub mod jet;
pub mod recursion;

pub use expansion::{trace_expansion, HeatTraceExpansion, Term};
pub use jet::{build_operator_jet, ConjugatedOperator, OperatorJet};
pub use recursion::{b_lambda, dk_inverse, hmds_coefficients, recursion_residuals, HmdsCoefficient};

use crate::error::Result;
use crate::tensorcalc::{ModelGeometry, PotentialJet};

/// Builds the jet and solves for `a_0..=a_kmax` resolved through `cutoff`.
pub fn solve(
    geom: &ModelGeometry,
    pot: &PotentialJet,
    kmax: usize,
    cutoff: usize,
) -> Result<(OperatorJet, Vec<HmdsCoefficient>)> {
    let jet = build_operator_jet(geom, pot, cutoff + 2 * kmax)?;
    let coeffs = hmds_coefficients(&jet, kmax, cutoff)?;
    Ok((jet, coeffs))
}
