//! Heat-trace expansions `Tr e^{−tF} ~ Σ_j t^{(j−m)/2} A_j`.

use crate::error::{validation, Result};
use crate::hmds::recursion::HmdsCoefficient;
use crate::linalg::trace;
use crate::tensorcalc::ModelGeometry;

/// One term `coefficient · t^{twice_exponent/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub twice_exponent: i32,
    pub coefficient: f64,
}

impl Term {
    pub fn exponent(&self) -> f64 {
        self.twice_exponent as f64 / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatTraceExpansion {
    pub dim: usize,
    terms: Vec<Term>,
    /// Coefficients of `t^{(j−m)/2} log t`, when the model carries them.
    pub log_terms: Option<Vec<f64>>,
}

impl HeatTraceExpansion {
    pub fn new(dim: usize, terms: Vec<Term>, log_terms: Option<Vec<f64>>) -> Result<Self> {
        if terms.windows(2).any(|w| w[0].twice_exponent >= w[1].twice_exponent) {
            return validation("expansion exponents must be strictly increasing");
        }
        Ok(Self { dim, terms, log_terms })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Coefficient of `t^{twice_exponent/2}`, zero when absent.
    pub fn coefficient(&self, twice_exponent: i32) -> f64 {
        self.terms.iter().find(|t| t.twice_exponent == twice_exponent).map_or(0.0, |t| t.coefficient)
    }

    /// Partial sum at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        let mut s: f64 = self.terms.iter().map(|term| term.coefficient * t.powf(term.exponent())).sum();
        if let Some(logs) = &self.log_terms {
            for (j, h) in logs.iter().enumerate() {
                s += h * t.powf((j as f64 - self.dim as f64) / 2.0) * t.ln();
            }
        }
        s
    }
}

/// `A_{2k} = (4π)^{−m/2} ((−1)^k/k!) vol tr a_k`; odd entries vanish.
pub fn trace_expansion(geom: &ModelGeometry, coeffs: &[HmdsCoefficient]) -> Result<HeatTraceExpansion> {
    if coeffs.iter().any(|a| !a.homogeneous) {
        return validation("trace expansion needs a homogeneous background (constant potential)");
    }
    for (k, a) in coeffs.iter().enumerate() {
        if a.order != k {
            return validation("coefficients must be consecutive from a_0");
        }
    }
    let m = geom.dim();
    let pre = (4.0 * std::f64::consts::PI).powf(-(m as f64) / 2.0) * geom.volume();
    let mut terms = Vec::new();
    for (k, a) in coeffs.iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let value = pre * sign / crate::special::factorial(k as u32) * trace(&a.diagonal).re;
        terms.push(Term { twice_exponent: 2 * k as i32 - m as i32, coefficient: value });
        if k + 1 < coeffs.len() {
            terms.push(Term { twice_exponent: 2 * k as i32 + 1 - m as i32, coefficient: 0.0 });
        }
    }
    HeatTraceExpansion::new(m, terms, None)
}
