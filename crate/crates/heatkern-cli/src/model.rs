//! Asymptotic and exact heat traces for the configured model.

use heatkern::hmds::{solve, trace_expansion, HeatTraceExpansion, Term};
use heatkern::linalg::{c, trace_exp_neg, CMat};
use heatkern::nonlaplace::{
    a0_coefficient, a2_potential_part, eigenstructure, h_endomorphism, sample_directions, torus_oracle, LeadingSymbol,
    SymbolSpectrum,
};
use heatkern::spectra::{circle_trace, interval_trace, sphere_trace, IntervalBc};
use heatkern::tensorcalc::{build_model_geometry, GeometryKind, PotentialJet};
use std::f64::consts::PI;

use crate::config::{Boundary, Geometry, RunConfig, Symbol};
use crate::error::CliError;

#[derive(Debug, Clone)]
pub enum Model {
    /// Laplace-type operator `Δ + Q` on a closed manifold.
    Closed { geometry: Geometry, q: CMat },
    /// `Δ + q` on an interval.
    Interval { length: f64, boundary: Boundary, q: f64 },
    /// `|ξ|² I + c ξ⊗ξ` plus `q I` on a flat torus.
    OneForm { symbol: LeadingSymbol, spectrum: SymbolSpectrum, periods: Vec<f64>, q: f64 },
}

impl Model {
    pub fn build(cfg: &RunConfig) -> Result<Model, CliError> {
        let n = cfg.potential.len();
        let q = CMat::from_fn(n, n, |i, j| c(cfg.potential[i][j]));
        Ok(match (&cfg.geometry, cfg.symbol) {
            (Geometry::Interval { length }, _) => Model::Interval {
                length: *length,
                boundary: cfg.boundary.expect("validated: intervals carry a boundary"),
                q: cfg.potential[0][0],
            },
            (Geometry::Torus { periods }, Symbol::OneForm { coupling }) => {
                let m = periods.len();
                let symbol = LeadingSymbol::one_form(m, coupling)?;
                let spectrum = eigenstructure(&symbol, &sample_directions(m, 64, 7))?;
                Model::OneForm { symbol, spectrum, periods: periods.clone(), q: cfg.potential[0][0] }
            }
            (geometry, _) => Model::Closed { geometry: geometry.clone(), q },
        })
    }

    pub fn default_order(&self) -> usize {
        match self {
            Model::OneForm { .. } => 1,
            _ => 2,
        }
    }

    /// Partial sum through `t^{order − m/2}`.
    pub fn expansion(&self, order: usize) -> Result<HeatTraceExpansion, CliError> {
        match self {
            Model::Closed { geometry, q } => {
                let (kind, m) = match geometry {
                    Geometry::Sphere { dim, radius } => (GeometryKind::Sphere { radius: *radius }, *dim),
                    Geometry::Torus { periods } => (GeometryKind::Torus { periods: periods.clone() }, periods.len()),
                    Geometry::Interval { .. } => unreachable!("intervals are not closed"),
                };
                let geom = build_model_geometry(kind, m, 2 * order)?;
                let pot = PotentialJet::constant(m, q.clone(), 2 * order)?;
                let (_, coeffs) = solve(&geom, &pot, order, 0)?;
                let full = trace_expansion(&geom, &coeffs)?;
                let terms =
                    full.terms().iter().copied().filter(|t| t.twice_exponent <= 2 * order as i32 - m as i32).collect();
                Ok(HeatTraceExpansion::new(m, terms, None)?)
            }
            Model::Interval { length, boundary, q } => {
                // Bare coefficients of t^{(j−1)/2} for Δ alone.
                let top = 2 * order;
                let mut bare = vec![0.0; top + 1];
                bare[0] = length / (4.0 * PI).sqrt();
                if top >= 1 {
                    bare[1] = match boundary {
                        Boundary::Dirichlet => -0.5,
                        Boundary::Neumann | Boundary::Robin(_) => 0.5,
                        Boundary::DirichletNeumann => 0.0,
                    };
                }
                if let Boundary::Robin(s) = boundary {
                    // Two endpoints, each contributing ½ Σ_{n≥1} (S√t)^n / Γ(n/2 + 1).
                    for (n, b) in bare.iter_mut().enumerate().skip(2) {
                        *b = s.powi(n as i32 - 1) / heatkern::special::ln_gamma((n as f64 - 1.0) / 2.0 + 1.0).exp();
                    }
                }
                // Multiply by e^{−tq} and keep exponents up to order − ½.
                let mut coeff = vec![0.0; top + 1];
                for (j, b) in bare.iter().enumerate() {
                    let mut factor = 1.0;
                    for k in 0..=(top - j) / 2 {
                        if k > 0 {
                            factor *= -q / k as f64;
                        }
                        coeff[j + 2 * k] += b * factor;
                    }
                }
                let terms = coeff
                    .iter()
                    .enumerate()
                    .map(|(j, &coefficient)| Term { twice_exponent: j as i32 - 1, coefficient })
                    .collect();
                Ok(HeatTraceExpansion::new(1, terms, None)?)
            }
            Model::OneForm { symbol, spectrum, periods, q } => {
                let m = periods.len();
                let vol: f64 = periods.iter().product();
                let mut terms =
                    vec![Term { twice_exponent: -(m as i32), coefficient: a0_coefficient(spectrum, m, vol) }];
                if order >= 1 {
                    let d = symbol.fiber();
                    let h = h_endomorphism(symbol, spectrum)?;
                    let a2 = a2_potential_part(&h, &(CMat::identity(d, d) * c(*q)), vol)?;
                    terms.push(Term { twice_exponent: 1 - m as i32, coefficient: 0.0 });
                    terms.push(Term { twice_exponent: 2 - m as i32, coefficient: a2 });
                }
                Ok(HeatTraceExpansion::new(m, terms, None)?)
            }
        }
    }

    /// Exact trace from the spectrum.
    pub fn oracle(&self, t: f64) -> Result<f64, CliError> {
        Ok(match self {
            Model::Closed { geometry, q } => {
                let base = match geometry {
                    Geometry::Sphere { dim, radius } => sphere_trace(*dim, *radius, t)?,
                    Geometry::Torus { periods } => {
                        periods.iter().map(|&l| circle_trace(l, t)).product::<heatkern::Result<f64>>()?
                    }
                    Geometry::Interval { .. } => unreachable!("intervals are not closed"),
                };
                base * trace_exp_neg(&(q * c(t)))
            }
            Model::Interval { length, boundary, q } => {
                let bc = match *boundary {
                    Boundary::Dirichlet => IntervalBc::DD,
                    Boundary::Neumann => IntervalBc::NN,
                    Boundary::DirichletNeumann => IntervalBc::DN,
                    Boundary::Robin(s) => IntervalBc::Robin(s),
                };
                interval_trace(*length, bc, t)? * (-t * q).exp()
            }
            Model::OneForm { symbol, spectrum, periods, q } => {
                let d = symbol.fiber();
                torus_oracle(spectrum, &(CMat::identity(d, d) * c(*q)), periods, t, None)?
            }
        })
    }
}
