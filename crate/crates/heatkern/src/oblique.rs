//! Boundary coefficients for smooth boundaries and oblique boundary conditions.
//!
//! Tangential derivatives enter the boundary operator through anti-Hermitian
//! matrices `Γ^i`. The boundary metric is the identity at the frozen point.

use num_complex::Complex64;

use crate::error::{validation, Error, Result};
use crate::linalg::{c, commutator, hermitian_fn, identity, is_hermitian, max_abs, min_eigenvalue, zeros, CMat};
use crate::nonlaplace::sample_directions;
use crate::quad::GaussHermite;

/// Minimum number of boundary directions for [`strong_ellipticity`].
pub const MIN_BOUNDARY_DIRECTIONS: usize = 50;
/// Smallest admissible eigenvalue of `I + (Γ·ζ̂)²` for the quadrature path.
pub const CONDITIONING_FLOOR: f64 = 1e-3;
const QUAD_TARGET: f64 = 1e-9;
const QUAD_COARSE: usize = 48;
const QUAD_FINE: usize = 64;
const ELLIPTICITY_SAMPLES: usize = 400;

/// Projector `Π`, tangential matrices `Γ^i` and endomorphism `S` of an oblique boundary condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ObliqueBoundaryData {
    m: usize,
    pi: CMat,
    gammas: Vec<CMat>,
    s: CMat,
}

impl ObliqueBoundaryData {
    pub fn new(m: usize, pi: CMat, gammas: Vec<CMat>, s: CMat) -> Result<Self> {
        const TOL: f64 = 1e-12;
        if m < 2 {
            return validation(format!("oblique data needs m >= 2, got {m}"));
        }
        if gammas.len() != m - 1 {
            return validation(format!("expected {} tangential matrices, got {}", m - 1, gammas.len()));
        }
        let d = pi.nrows();
        let shapes_ok = d > 0 && pi.is_square() && s.shape() == (d, d) && gammas.iter().all(|g| g.shape() == (d, d));
        if !shapes_ok {
            return validation("Π, Γ^i and S must be square matrices of a common size");
        }
        let all = std::iter::once(&pi).chain(&gammas).chain(std::iter::once(&s));
        if all.flat_map(|x| x.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return validation("boundary data must be finite");
        }
        if !is_hermitian(&pi, TOL) || max_abs(&(&pi * &pi - &pi)) > TOL {
            return validation("Π must be a Hermitian projector");
        }
        for (i, g) in gammas.iter().enumerate() {
            if max_abs(&(g + g.adjoint())) > TOL {
                return validation(format!("Γ^{i} must be anti-Hermitian"));
            }
            if max_abs(&(&pi * g)) > TOL || max_abs(&(g * &pi)) > TOL {
                return validation(format!("Γ^{i} must vanish against Π"));
            }
        }
        if !is_hermitian(&s, TOL) || max_abs(&(&pi * &s)) > TOL || max_abs(&(&s * &pi)) > TOL {
            return validation("S must be Hermitian and vanish against Π");
        }
        Ok(Self { m, pi, gammas, s })
    }

    /// `Γ = 0`, `S = 0`, `Π = 0` (Neumann) or `Π = I` (Dirichlet).
    pub fn pure(m: usize, d: usize, dirichlet: bool) -> Result<Self> {
        let pi = if dirichlet { identity(d) } else { zeros(d) };
        Self::new(m, pi, vec![zeros(d); m - 1], zeros(d))
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn fiber(&self) -> usize {
        self.pi.nrows()
    }

    pub fn projector(&self) -> &CMat {
        &self.pi
    }

    pub fn gammas(&self) -> &[CMat] {
        &self.gammas
    }

    pub fn s(&self) -> &CMat {
        &self.s
    }

    /// `Γ·ζ = Γ^i ζ_i`.
    pub fn gamma_dot(&self, zeta: &[f64]) -> CMat {
        self.gammas.iter().zip(zeta).fold(zeros(self.fiber()), |acc, (g, &z)| acc + g * c(z))
    }

    /// `Γ² = Γ^i Γ^i`.
    pub fn gamma_square(&self) -> CMat {
        self.gammas.iter().fold(zeros(self.fiber()), |acc, g| acc + g * g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EllipticityVerdict {
    Elliptic,
    Violated(Vec<f64>),
}

/// Unit covectors on the boundary: `±1` when `m = 2`, pseudo-random otherwise.
pub fn boundary_directions(m: usize, count: usize) -> Vec<Vec<f64>> {
    if m == 2 {
        (0..count).map(|k| vec![if k % 2 == 0 { 1.0 } else { -1.0 }]).collect()
    } else {
        sample_directions(m - 1, count, 0x0b11)
    }
}

/// Checks `|ζ| I − iΓ·ζ > 0` at every supplied covector.
pub fn strong_ellipticity(data: &ObliqueBoundaryData, directions: &[Vec<f64>]) -> Result<EllipticityVerdict> {
    if directions.len() < MIN_BOUNDARY_DIRECTIONS {
        return validation(format!("need at least {MIN_BOUNDARY_DIRECTIONS} directions, got {}", directions.len()));
    }
    for zeta in directions {
        let n = zeta.iter().map(|x| x * x).sum::<f64>().sqrt();
        if zeta.len() != data.m - 1 || !(n > 0.0) || !n.is_finite() {
            return validation("boundary directions must be finite non-zero covectors of length m-1");
        }
        let unit: Vec<f64> = zeta.iter().map(|x| x / n).collect();
        let op = identity(data.fiber()) - data.gamma_dot(&unit) * Complex64::i();
        if min_eigenvalue(&op) <= 0.0 {
            return Ok(EllipticityVerdict::Violated(unit));
        }
    }
    Ok(EllipticityVerdict::Elliptic)
}

fn prefactor(m: usize) -> f64 {
    0.25 * (4.0 * std::f64::consts::PI).powf(-((m - 1) as f64) / 2.0)
}

/// `(4π)^{−(m−1)/2} ¼ {−I − 2Π + 2 J}`.
fn assemble(data: &ObliqueBoundaryData, j: &CMat) -> CMat {
    let d = data.fiber();
    (-identity(d) - &data.pi * c(2.0) + j * c(2.0)) * c(prefactor(data.m))
}

/// `π^{−(m−1)/2} ∫ dζ exp[−|ζ|² − (Γ·ζ)²]` after `ζ = s u` with `s² = 1/λ_min`.
fn gaussian_integral(data: &ObliqueBoundaryData, n: usize, lambda_min: f64) -> Result<CMat> {
    let k = data.m - 1;
    let d = data.fiber();
    let rule = GaussHermite::new(n)?;
    let s2 = 1.0 / lambda_min;
    let norm = (s2.sqrt() / std::f64::consts::PI.sqrt()).powi(k as i32);
    let mut out = zeros(d);
    let mut u = vec![0.0; k];
    for flat in 0..n.pow(k as u32) {
        let mut rem = flat;
        let mut w = norm;
        for x in u.iter_mut() {
            *x = rule.nodes[rem % n];
            w *= rule.weights[rem % n];
            rem /= n;
        }
        let u2: f64 = u.iter().map(|x| x * x).sum();
        let g = data.gamma_dot(&u);
        // exponent −(s²(|u|² + (Γ·u)²) − |u|²), the GH weight carries e^{−|u|²}
        let expo = (identity(d) * c(u2) + &g * &g) * c(s2) - identity(d) * c(u2);
        out += hermitian_fn(&expo, |x| (-x).exp()) * c(w);
    }
    Ok(out)
}

/// `a₁` from Gauss–Hermite quadrature of the ζ-integral.
pub fn a1_quadrature(data: &ObliqueBoundaryData) -> Result<CMat> {
    let dirs = boundary_directions(data.m, ELLIPTICITY_SAMPLES);
    if let EllipticityVerdict::Violated(dir) = strong_ellipticity(data, &dirs)? {
        return Err(Error::Domain(format!(
            "integral divergent: strong ellipticity is violated at boundary direction {dir:?}"
        )));
    }
    let lambda_min = dirs
        .iter()
        .map(|z| {
            let g = data.gamma_dot(z);
            min_eigenvalue(&(identity(data.fiber()) + &g * &g))
        })
        .fold(f64::INFINITY, f64::min);
    if lambda_min < CONDITIONING_FLOOR {
        return Err(Error::Numeric(format!(
            "ill-conditioned: min eigenvalue {lambda_min:.3e} of I + (Γ·ζ)² is below {CONDITIONING_FLOOR:e}"
        )));
    }
    let coarse = gaussian_integral(data, QUAD_COARSE, lambda_min)?;
    let fine = gaussian_integral(data, QUAD_FINE, lambda_min)?;
    let change = max_abs(&(&fine - &coarse));
    if change > QUAD_TARGET {
        return Err(Error::Numeric(format!("ζ-quadrature did not converge (change {change:.3e})")));
    }
    Ok(assemble(data, &fine))
}

fn inverse_power(m: &CMat, power: f64) -> Result<CMat> {
    let lam = min_eigenvalue(m);
    if lam <= 1e-10 {
        return Err(Error::Domain(format!(
            "integral divergent: I + Γ² has eigenvalue {lam:.3e}, strong ellipticity fails"
        )));
    }
    Ok(hermitian_fn(m, |x| x.powf(-power)))
}

/// Closed form `¼{−I − 2Π + 2(I+Γ²)^{−1/2}}` for mutually commuting `Γ^i`.
pub fn a1_abelian(data: &ObliqueBoundaryData) -> Result<CMat> {
    for (i, a) in data.gammas.iter().enumerate() {
        for (j, b) in data.gammas.iter().enumerate().skip(i + 1) {
            if max_abs(&commutator(a, b)) > 1e-12 {
                return validation(format!("Γ^{i} and Γ^{j} do not commute"));
            }
        }
    }
    let m = identity(data.fiber()) + data.gamma_square();
    Ok(assemble(data, &inverse_power(&m, 0.5)?))
}

/// Closed form `¼{−I − 2Π + 2(I+Γ²/(m−1))^{−(m−1)/2}}` when `Γ^iΓ^j + Γ^jΓ^i = 2δ^{ij}Γ²/(m−1)`.
pub fn a1_clifford(data: &ObliqueBoundaryData) -> Result<CMat> {
    let k = (data.m - 1) as f64;
    let g2 = data.gamma_square();
    for (i, a) in data.gammas.iter().enumerate() {
        for (j, b) in data.gammas.iter().enumerate() {
            let target = if i == j { &g2 * c(2.0 / k) } else { zeros(data.fiber()) };
            if max_abs(&(a * b + b * a - target)) > 1e-10 {
                return validation(format!("Γ^{i}, Γ^{j} violate the Clifford-type relation"));
            }
        }
    }
    let m = identity(data.fiber()) + g2 * c(1.0 / k);
    Ok(assemble(data, &inverse_power(&m, k / 2.0)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothBoundary {
    Dirichlet,
    Neumann,
}

/// `(b0, b1, b2)` for pure Dirichlet or Neumann conditions; `k` is the trace of the extrinsic curvature.
pub fn smooth_boundary_constants(bc: SmoothBoundary, m: usize, dim_v: usize, k: f64) -> (f64, f64, f64) {
    let sign = match bc {
        SmoothBoundary::Dirichlet => -1.0,
        SmoothBoundary::Neumann => 1.0,
    };
    let pi4 = 4.0 * std::f64::consts::PI;
    let b1 = sign * pi4.powf(-((m as f64) - 1.0) / 2.0) * dim_v as f64 / 4.0;
    let b2 = pi4.powf(-(m as f64) / 2.0) * dim_v as f64 * k / 3.0;
    (0.0, b1, b2)
}
