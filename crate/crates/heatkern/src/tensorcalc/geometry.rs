//! Closed-form normal-coordinate data for flat, torus and round-sphere backgrounds.
//!
//! On a sphere of radius `a` with `s = r/a`, `r² = Σ x_i²`:
//!
//! * `g_{μν} = f δ_{μν} + (1 − f) x_μ x_ν / r²` with `f = sin²s / s²`,
//! * `g^{μν} = f⁻¹ δ^{μν} + (1 − f⁻¹) x^μ x^ν / r²`,
//! * `√g = (sin s / s)^{m−1}` and `Δ^{1/2} = (s / sin s)^{(m−1)/2}`.
//!
//! Every factor is an even power series in `r`, so each is a polynomial in `x`
//! once truncated. Polynomials are kept two degrees above the jet cutoff so
//! that second derivatives are exact through the cutoff.

use nalgebra::DMatrix;

use crate::error::{validation, Result};
use crate::linalg::{c, CMat};
use crate::special::factorial;
use crate::tensorcalc::symtensor::SymTensor;
use crate::tensorcalc::taylor::{MatPoly, Poly, TaylorSeries};

pub const DEFAULT_MAX_CUTOFF: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum GeometryKind {
    Flat,
    Torus { periods: Vec<f64> },
    Sphere { radius: f64 },
}

#[derive(Debug, Clone)]
pub struct ModelGeometry {
    kind: GeometryKind,
    m: usize,
    cutoff: usize,
    volume: f64,
    metric: MatPoly,
    inverse_metric: MatPoly,
    sqrt_det: Poly,
    van_vleck: Poly,
    sqrt_det_series: Vec<f64>,
    metric_jets: Vec<SymTensor>,
    van_vleck_jets: Vec<SymTensor>,
    scalar_curvature: f64,
    ricci: DMatrix<f64>,
    riemann: Vec<f64>,
}

/// Builds a model geometry with jets through `cutoff` (at most [`DEFAULT_MAX_CUTOFF`]).
pub fn build_model_geometry(kind: GeometryKind, m: usize, cutoff: usize) -> Result<ModelGeometry> {
    build_model_geometry_capped(kind, m, cutoff, DEFAULT_MAX_CUTOFF)
}

pub fn build_model_geometry_capped(
    kind: GeometryKind,
    m: usize,
    cutoff: usize,
    max_cutoff: usize,
) -> Result<ModelGeometry> {
    if !(1..=4).contains(&m) {
        return validation(format!("dimension must be in 1..=4, got {m}"));
    }
    if cutoff > max_cutoff {
        return validation(format!("cutoff {cutoff} exceeds configured maximum {max_cutoff}"));
    }
    let deg = cutoff + 2;
    let (volume, radial) = match &kind {
        GeometryKind::Flat => (1.0, None),
        GeometryKind::Torus { periods } => {
            if periods.len() != m {
                return validation(format!("torus needs {m} periods, got {}", periods.len()));
            }
            for &p in periods {
                crate::error::require_positive("torus period", p)?;
            }
            (periods.iter().product(), None)
        }
        GeometryKind::Sphere { radius } => {
            crate::error::require_positive("sphere radius", *radius)?;
            let a = *radius;
            let vol = 2.0 * std::f64::consts::PI.powf((m as f64 + 1.0) / 2.0) * a.powi(m as i32)
                / libm::tgamma((m as f64 + 1.0) / 2.0);
            (vol, Some(a))
        }
    };

    let ident = CMat::identity(m, m);
    let (metric, inverse_metric, sqrt_det, van_vleck, sqrt_det_series, curv) = match radial {
        None => (
            MatPoly::constant(m, deg, ident.clone()),
            MatPoly::constant(m, deg, ident.clone()),
            Poly::constant(m, deg, 1.0),
            Poly::constant(m, deg, 1.0),
            vec![1.0],
            0.0,
        ),
        Some(a) => {
            let terms = deg / 2 + 2;
            let rescale =
                |s: &[f64]| -> Vec<f64> { s.iter().enumerate().map(|(j, v)| v * a.powi(-2 * j as i32)).collect() };
            let f = series::sin2_over_s2(terms);
            let finv = series::inverse(&f);
            let sinc = series::sinc(terms);
            let sqrt_det_u = series::powi(&sinc, m - 1);
            let vv_u = series::exp(&series::log(&sinc).iter().map(|v| -v * (m as f64 - 1.0) / 2.0).collect::<Vec<_>>());
            // (1 − f)/r² and (1 − f⁻¹)/r² as series in r².
            let shift = |s: &[f64]| -> Vec<f64> { s.iter().skip(1).map(|v| -v).collect() };
            let fr = rescale(&f);
            let finvr = rescale(&finv);
            let h = shift(&fr);
            let k = shift(&finvr);
            let outer = outer_xx(m, deg);
            let g = MatPoly::from_scalar(&Poly::radial(m, deg, &fr), &ident)
                .add(&outer.mul_scalar_poly(&Poly::radial(m, deg, &h)));
            let ginv = MatPoly::from_scalar(&Poly::radial(m, deg, &finvr), &ident)
                .add(&outer.mul_scalar_poly(&Poly::radial(m, deg, &k)));
            let sd = rescale(&sqrt_det_u);
            (g, ginv, Poly::radial(m, deg, &sd), Poly::radial(m, deg, &rescale(&vv_u)), sd, 1.0 / (a * a))
        }
    };

    let mf = m as f64;
    let scalar_curvature = mf * (mf - 1.0) * curv;
    let ricci = DMatrix::identity(m, m) * ((mf - 1.0) * curv);
    let mut riemann = vec![0.0; m * m * m * m];
    for a_ in 0..m {
        for b in 0..m {
            for c_ in 0..m {
                for d in 0..m {
                    let v = f64::from(u8::from(a_ == c_ && b == d)) - f64::from(u8::from(a_ == d && b == c_));
                    riemann[((a_ * m + b) * m + c_) * m + d] = v * curv;
                }
            }
        }
    }
    let metric_jets = TaylorSeries::from_poly(&metric, cutoff).components().to_vec();
    let van_vleck_jets = TaylorSeries::from_poly(&van_vleck.to_mat(1), cutoff).components().to_vec();
    Ok(ModelGeometry {
        kind,
        m,
        cutoff,
        volume,
        metric,
        inverse_metric,
        sqrt_det,
        van_vleck,
        sqrt_det_series,
        metric_jets,
        van_vleck_jets,
        scalar_curvature,
        ricci,
        riemann,
    })
}

/// Matrix polynomial `x_μ x_ν`.
fn outer_xx(m: usize, deg: usize) -> MatPoly {
    let mut out = MatPoly::zero(m, m, deg);
    for mu in 0..m {
        for nu in 0..m {
            let mut block = CMat::zeros(m, m);
            block[(mu, nu)] = c(1.0);
            let xx = Poly::variable(m, deg, mu).mul(&Poly::variable(m, deg, nu));
            out = out.add(&MatPoly::from_scalar(&xx, &block));
        }
    }
    out
}

impl ModelGeometry {
    pub fn kind(&self) -> &GeometryKind {
        &self.kind
    }
    pub fn dim(&self) -> usize {
        self.m
    }
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }
    pub fn volume(&self) -> f64 {
        self.volume
    }
    pub fn radius(&self) -> Option<f64> {
        match self.kind {
            GeometryKind::Sphere { radius } => Some(radius),
            _ => None,
        }
    }
    pub fn scalar_curvature(&self) -> f64 {
        self.scalar_curvature
    }
    pub fn ricci(&self) -> &DMatrix<f64> {
        &self.ricci
    }
    /// `R_{abcd}` at the base point.
    pub fn riemann(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let m = self.m;
        self.riemann[((a * m + b) * m + c) * m + d]
    }
    /// Taylor jets of `g_{μν}`; blocks are the `m × m` metric matrix.
    pub fn metric_jets(&self) -> &[SymTensor] {
        &self.metric_jets
    }
    /// Taylor jets of `Δ^{1/2}` (scalar blocks).
    pub fn van_vleck_jets(&self) -> &[SymTensor] {
        &self.van_vleck_jets
    }
    pub fn metric_poly(&self) -> &MatPoly {
        &self.metric
    }
    pub fn inverse_metric_poly(&self) -> &MatPoly {
        &self.inverse_metric
    }
    pub fn sqrt_det_poly(&self) -> &Poly {
        &self.sqrt_det
    }
    pub fn van_vleck_poly(&self) -> &Poly {
        &self.van_vleck
    }
    /// Coefficients of `√g` as a power series in `r²`.
    pub fn sqrt_det_series(&self) -> &[f64] {
        &self.sqrt_det_series
    }
    /// Degree cap of the stored polynomials.
    pub fn poly_degree(&self) -> usize {
        self.cutoff + 2
    }
}

/// Truncated univariate power series in `u = s²`.
pub(crate) mod series {
    use super::factorial;

    /// `sin² s / s²`.
    pub fn sin2_over_s2(n: usize) -> Vec<f64> {
        (0..n)
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * 2f64.powi(2 * j as i32 + 1) / factorial(2 * j as u32 + 2)
            })
            .collect()
    }

    /// `sin s / s`.
    pub fn sinc(n: usize) -> Vec<f64> {
        (0..n).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } / factorial(2 * j as u32 + 1)).collect()
    }

    pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
        let n = a.len().min(b.len());
        (0..n).map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum()).collect()
    }

    pub fn powi(a: &[f64], k: usize) -> Vec<f64> {
        let mut out = vec![0.0; a.len()];
        out[0] = 1.0;
        for _ in 0..k {
            out = mul(&out, a);
        }
        out
    }

    pub fn inverse(a: &[f64]) -> Vec<f64> {
        let n = a.len();
        let mut out = vec![0.0; n];
        out[0] = 1.0 / a[0];
        for k in 1..n {
            let s: f64 = (1..=k).map(|i| a[i] * out[k - i]).sum();
            out[k] = -s / a[0];
        }
        out
    }

    /// `log a` for `a[0] = 1`.
    pub fn log(a: &[f64]) -> Vec<f64> {
        let n = a.len();
        let mut out = vec![0.0; n];
        for k in 1..n {
            let s: f64 = (1..k).map(|i| i as f64 * out[i] * a[k - i]).sum();
            out[k] = a[k] - s / k as f64;
        }
        out
    }

    /// `exp a` for `a[0] = 0`.
    pub fn exp(a: &[f64]) -> Vec<f64> {
        let n = a.len();
        let mut out = vec![0.0; n];
        out[0] = 1.0;
        for k in 1..n {
            out[k] = (1..=k).map(|i| i as f64 * a[i] * out[k - i]).sum::<f64>() / k as f64;
        }
        out
    }
}
