//! The Zaremba wedge: Dirichlet on `θ = π/2`, Neumann on `θ = −π/2`, corner at `ρ = 0`.
//!
//! Coordinates near the corner are `r = ρ cos θ`, `y = ρ sin θ` plus tangential `x̂ ∈ ℝ^{m−2}`.
//! The boundary endomorphism `S` is zero.

use std::cell::RefCell;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{require_positive, validation, Error, Result};
use crate::hmds::{HeatTraceExpansion, Term};
use crate::quad::{integrate, QuadOptions};
use crate::special::{bessel_i_scaled, erf, erfc, ln_gamma};

#[derive(Debug, Clone, PartialEq)]
pub struct WedgePoint {
    pub rho: f64,
    pub theta: f64,
    pub tangential: Vec<f64>,
}

impl WedgePoint {
    pub fn new(rho: f64, theta: f64, tangential: Vec<f64>) -> Result<Self> {
        if !rho.is_finite() || rho < 0.0 {
            return validation(format!("ρ must be finite and non-negative, got {rho}"));
        }
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&theta) {
            return validation(format!("θ must lie in [−π/2, π/2], got {theta}"));
        }
        if tangential.iter().any(|x| !x.is_finite()) {
            return validation("tangential offset must be finite");
        }
        Ok(Self { rho, theta, tangential })
    }

    /// Point in the two-dimensional slice (`m = 2`).
    pub fn planar(rho: f64, theta: f64) -> Result<Self> {
        Self::new(rho, theta, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.tangential.len() + 2
    }
}

/// `(4πt)^{−m/2} exp{−[|x̂−x̂'|² + ρ² + ρ'² − 2ρρ' cos Δ]/4t} erf{√(ρρ'/t) cos(Δ/2)}`.
fn l_term(t: f64, m: usize, dx2: f64, rho: f64, rho2: f64, delta: f64) -> f64 {
    let expo = -(dx2 + rho * rho + rho2 * rho2 - 2.0 * rho * rho2 * delta.cos()) / (4.0 * t);
    (4.0 * PI * t).powf(-(m as f64) / 2.0) * expo.exp() * erf((rho * rho2 / t).sqrt() * (delta / 2.0).cos())
}

fn kernel_raw(t: f64, m: usize, dx2: f64, rho: f64, theta: f64, rho2: f64, theta2: f64) -> f64 {
    l_term(t, m, dx2, rho, rho2, theta - theta2) + l_term(t, m, dx2, rho, rho2, theta + theta2 + PI)
}

/// Leading mixed parametrix `L(θ−θ') + L(θ+θ'+π)`.
pub fn wedge_kernel(t: f64, p: &WedgePoint, q: &WedgePoint) -> Result<f64> {
    require_positive("t", t)?;
    if p.tangential.len() != q.tangential.len() {
        return validation("wedge points must have the same dimension");
    }
    let dx2: f64 = p.tangential.iter().zip(&q.tangential).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(kernel_raw(t, p.dim(), dx2, p.rho, p.theta, q.rho, q.theta))
}

/// Diagonal of the mixed parametrix.
///
/// `sign(0)` is taken as the `θ → 0⁺` limit; the combination
/// `sign(θ)(1 − erfc(ρ|sin θ|/√t))` is continuous there.
pub fn wedge_diagonal(t: f64, rho: f64, theta: f64, m: usize) -> Result<f64> {
    require_positive("t", t)?;
    if !rho.is_finite() || rho < 0.0 {
        return validation(format!("ρ must be finite and non-negative, got {rho}"));
    }
    if !(-FRAC_PI_2..=FRAC_PI_2).contains(&theta) {
        return validation(format!("θ must lie in [−π/2, π/2], got {theta}"));
    }
    Ok(diagonal_raw(t, rho, theta, m))
}

fn diagonal_raw(t: f64, rho: f64, theta: f64, m: usize) -> f64 {
    let sign = if theta < 0.0 { -1.0 } else { 1.0 };
    let s = rho / t.sqrt();
    let e = (-(s * theta.cos()).powi(2)).exp();
    (4.0 * PI * t).powf(-(m as f64) / 2.0) * (1.0 - sign * e - erfc(s) + sign * e * erfc(s * theta.sin().abs()))
}

/// `∫₀^∞ ρ dρ ∫_{−π/2}^{π/2} dθ (diagonal − bulk)` per unit volume of the corner and per fiber dimension.
pub fn corner_integral(t: f64, m: usize) -> Result<f64> {
    require_positive("t", t)?;
    let bulk = (4.0 * PI * t).powf(-(m as f64) / 2.0);
    let opts = QuadOptions { abs_tol: 1e-14 * bulk.max(1.0), rel_tol: 1e-12, max_intervals: 500 };
    let angular = |rho: f64| -> Result<f64> {
        let f = |th: f64| diagonal_raw(t, rho, th, m) - bulk;
        Ok(integrate(f, -FRAC_PI_2, 0.0, opts)?.value + integrate(f, 0.0, FRAC_PI_2, opts)?.value)
    };
    let failure = RefCell::new(None);
    let outer = integrate(
        |rho| match angular(rho) {
            Ok(v) => rho * v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        12.0 * t.sqrt(),
        QuadOptions { abs_tol: 1e-13 * bulk.max(1.0) * t, rel_tol: 1e-11, max_intervals: 500 },
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(outer?.value)
}

/// Corner coefficient `b₂ = −(4π)^{−(m−2)/2} dim V / 16`, returned after a numerical cross-check at `t = 1`.
pub fn corner_coefficient(m: usize, dim_v: usize) -> Result<f64> {
    if m < 2 {
        return validation(format!("a corner needs m >= 2, got {m}"));
    }
    let dv = dim_v as f64;
    let moment = integrate(|x| x * erfc(x), 0.0, 12.0, QuadOptions::default())?.value;
    if (moment - 0.25).abs() > 1e-12 {
        return Err(Error::Consistency(format!("∫ ξ erfc(ξ) dξ evaluated to {moment}, expected 1/4")));
    }
    let t = 1.0;
    let numeric = dv * corner_integral(t, m)?;
    let expected = -t.powf((2.0 - m as f64) / 2.0) * (4.0 * PI).powf(-(m as f64) / 2.0) * PI / 4.0 * dv;
    if dim_v > 0 && ((numeric - expected) / expected).abs() > 1e-6 {
        return Err(Error::Consistency(format!(
            "corner integral {numeric:.12e} disagrees with closed form {expected:.12e}"
        )));
    }
    Ok(-(4.0 * PI).powf(-(m as f64 - 2.0) / 2.0) * dv / 16.0)
}

/// Truncated Bessel mode sum with its remainder bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselSum {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: usize,
    /// Set when the tail bound exceeds `1e−12` relative to the value.
    pub warning: Option<String>,
}

/// Planar kernel from the angular modes `√(2/π) sin((n+½)(π/2−θ))` and radial Bessel functions `I_{n+½}`.
pub fn bessel_oracle(t: f64, p: &WedgePoint, q: &WedgePoint, terms: usize) -> Result<BesselSum> {
    require_positive("t", t)?;
    if terms == 0 {
        return validation("at least one mode is required");
    }
    if p.dim() != 2 || q.dim() != 2 {
        return validation("the Bessel oracle covers the planar slice only");
    }
    let z = p.rho * q.rho / (2.0 * t);
    let gauss = (p.rho - q.rho).powi(2) / (4.0 * t);
    // (1/2t) e^{−(ρ²+ρ'²)/4t} I_ν(z) = (1/2t) e^{−(ρ−ρ')²/4t} e^{−z} I_ν(z)
    let pref = (-gauss).exp() / (2.0 * t);
    let mode = |n: usize, theta: f64| (2.0 / PI).sqrt() * ((n as f64 + 0.5) * (FRAC_PI_2 - theta)).sin();
    let mut value = 0.0;
    for n in 0..terms {
        value += mode(n, p.theta) * mode(n, q.theta) * pref * bessel_i_scaled(n as f64 + 0.5, z);
    }
    let tail_bound = bessel_tail(z, terms, gauss, t);
    let warning = (tail_bound > 1e-12 * value.abs().max(f64::MIN_POSITIVE))
        .then(|| format!("mode sum truncated at {terms} terms; tail bound {tail_bound:.3e}"));
    Ok(BesselSum { value, tail_bound, terms, warning })
}

/// `(2/π)(1/2t) e^{−(ρ−ρ')²/4t} Σ_{n≥N} e^{−z} I_{n+½}(z)` bounded by `I_ν(z) ≤ (z/2)^ν e^{min(z, z²/4)}/Γ(ν+1)`.
fn bessel_tail(z: f64, first: usize, gauss: f64, t: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let nu = first as f64 + 0.5;
    let ratio = 0.5 * z / (nu + 1.0);
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    let log_term = nu * (0.5 * z).ln() + z.min(0.25 * z * z) - z - ln_gamma(nu + 1.0) - gauss;
    (2.0 / PI) / (2.0 * t) * log_term.exp() / (1.0 - ratio)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcResiduals {
    pub dirichlet: f64,
    pub neumann: f64,
}

/// Largest violations of `Ψ|_{θ=π/2} = 0` and `∂_θΨ|_{θ=−π/2} = 0` over the sample pairs `(p, p')`.
///
/// The first argument of each pair supplies `ρ` and `x̂`; its angle is replaced by the face angle.
pub fn bc_residuals(t: f64, samples: &[(WedgePoint, WedgePoint)]) -> Result<BcResiduals> {
    require_positive("t", t)?;
    const STEP: f64 = 1e-5;
    let mut out = BcResiduals { dirichlet: 0.0, neumann: 0.0 };
    for (p, q) in samples {
        if p.tangential.len() != q.tangential.len() {
            return validation("wedge points must have the same dimension");
        }
        let dx2: f64 = p.tangential.iter().zip(&q.tangential).map(|(a, b)| (a - b) * (a - b)).sum();
        let k = |theta: f64| kernel_raw(t, p.dim(), dx2, p.rho, theta, q.rho, q.theta);
        out.dirichlet = out.dirichlet.max(k(FRAC_PI_2).abs());
        let d = (k(-FRAC_PI_2 + STEP) - k(-FRAC_PI_2 - STEP)) / (2.0 * STEP);
        out.neumann = out.neumann.max(d.abs());
    }
    Ok(out)
}

/// `(∂_t − ∂_ρ² − ρ^{−1}∂_ρ − ρ^{−2}∂_θ²)Ψ` for the planar kernel, by fourth-order central differences with step `h`.
pub fn heat_residual(t: f64, p: &WedgePoint, q: &WedgePoint, h: f64) -> Result<f64> {
    require_positive("t", t)?;
    require_positive("h", h)?;
    if p.dim() != 2 || q.dim() != 2 {
        return validation("the heat residual covers the planar slice only");
    }
    if p.rho <= 2.0 * h || t <= 2.0 * h {
        return validation("stencil reaches the corner or t = 0");
    }
    let k = |tt: f64, rho: f64, theta: f64| kernel_raw(tt, 2, 0.0, rho, theta, q.rho, q.theta);
    let d1 = |f: &dyn Fn(f64) -> f64, x: f64| {
        (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
    };
    let d2 = |f: &dyn Fn(f64) -> f64, x: f64| {
        (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h * h)
    };
    let dt = d1(&|s| k(s, p.rho, p.theta), t);
    let drho = d1(&|r| k(t, r, p.theta), p.rho);
    let drr = d2(&|r| k(t, r, p.theta), p.rho);
    let dthth = d2(&|th| k(t, p.rho, th), p.theta);
    Ok(dt - drr - drho / p.rho - dthth / (p.rho * p.rho))
}

/// Leading heat-trace terms of a flat Zaremba wedge region.
///
/// `vol_m`, `vol_dirichlet`, `vol_neumann` and `vol_corner` are the volumes of the
/// region, the two faces and the corner. Logarithmic coefficients are reported as zero.
pub fn zaremba_expansion(
    m: usize,
    dim_v: usize,
    vol_m: f64,
    vol_dirichlet: f64,
    vol_neumann: f64,
    vol_corner: f64,
) -> Result<HeatTraceExpansion> {
    if m < 2 {
        return validation(format!("a corner needs m >= 2, got {m}"));
    }
    let dv = dim_v as f64;
    let pi4 = 4.0 * PI;
    let face = 0.25 * pi4.powf(-(m as f64 - 1.0) / 2.0) * dv;
    let terms = vec![
        Term { twice_exponent: -(m as i32), coefficient: pi4.powf(-(m as f64) / 2.0) * dv * vol_m },
        Term { twice_exponent: 1 - m as i32, coefficient: face * (vol_neumann - vol_dirichlet) },
        Term { twice_exponent: 2 - m as i32, coefficient: corner_coefficient(m, dim_v)? * vol_corner },
    ];
    HeatTraceExpansion::new(m, terms, Some(vec![0.0; 3]))
}
