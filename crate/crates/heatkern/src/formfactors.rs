//! Universal quadratic-term constants, form-factor profiles and the generating functional `H(t)`.
//!
//! On flat tori every curvature-quadratic invariant is diagonal in Fourier space,
//! with `□ = −|k|²` on the mode `e^{ik·x}`. Integrals over the torus become mode
//! sums times the cell volume `Π L_i`.

use num_rational::Rational64;

use crate::error::{require_positive, validation, Error, Result};
use crate::linalg::{trace, CMat};
use crate::quad::{integrate, QuadOptions};

/// Closed rational constants `f^{(i)}_k`.
pub fn f_universal(i: usize, k: i64) -> Result<Rational64> {
    if k < 2 {
        return validation(format!("f_universal needs k >= 2, got {k}"));
    }
    let r = Rational64::new;
    Ok(match i {
        1 => r(1, 1),
        2 => r(1, 2 * (2 * k - 1)),
        3 => r(k - 1, 2 * (2 * k - 1)),
        4 => r(1, 2 * (4 * k * k - 1)),
        5 => r(k * k - k - 1, 4 * (4 * k * k - 1)),
        _ => return validation(format!("form-factor index must be 1..=5, got {i}")),
    })
}

/// Profile coefficients in powers of `ξ²`.
fn profile_coeffs(i: usize) -> Result<&'static [f64]> {
    Ok(match i {
        1 => &[1.0],
        2 => &[0.0, 0.5],
        3 => &[0.25, -0.25],
        4 => &[0.0, 0.0, 1.0 / 6.0],
        5 => &[3.0 / 48.0, -6.0 / 48.0, -1.0 / 48.0],
        _ => return validation(format!("form-factor index must be 1..=5, got {i}")),
    })
}

/// `f^{(i)}(ξ)` on `[0, 1]`.
pub fn f_profile(i: usize, xi: f64) -> Result<f64> {
    let coeffs = profile_coeffs(i)?;
    if !(0.0..=1.0).contains(&xi) {
        return validation(format!("profile argument must lie in [0, 1], got {xi}"));
    }
    let x2 = xi * xi;
    Ok(coeffs.iter().rev().fold(0.0, |acc, cf| acc * x2 + cf))
}

/// `∫₀¹ ξ^{2j} (1−ξ²)^n dξ = Γ(j+½) Γ(n+1) / (2 Γ(n+j+3/2))`.
fn moment(j: usize, n: usize) -> f64 {
    let (jf, nf) = (j as f64, n as f64);
    0.5 * (libm::lgamma(jf + 0.5) + libm::lgamma(nf + 1.0) - libm::lgamma(nf + jf + 1.5)).exp()
}

/// Power series `Σ_n (−z/4)^n/n! ∫ f^{(i)}(ξ)(1−ξ²)^n dξ` truncated after `terms` terms.
pub fn gamma_factor_series(i: usize, z: f64, terms: usize) -> Result<f64> {
    let coeffs = profile_coeffs(i)?;
    let mut sum = 0.0;
    let mut pref = 1.0;
    for n in 0..terms {
        if n > 0 {
            pref *= -z / 4.0 / n as f64;
        }
        let mom: f64 = coeffs.iter().enumerate().map(|(j, cf)| cf * moment(j, n)).sum();
        sum += pref * mom;
    }
    Ok(sum)
}

/// `γ^{(i)}(z) = ∫₀¹ f^{(i)}(ξ) exp(−(1−ξ²) z/4) dξ` by adaptive quadrature.
pub fn gamma_factor_quadrature(i: usize, z: f64) -> Result<f64> {
    profile_coeffs(i)?;
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-14, max_intervals: 500 };
    let r = integrate(
        |xi| f_profile(i, xi.clamp(0.0, 1.0)).unwrap_or(f64::NAN) * (-(1.0 - xi * xi) * z / 4.0).exp(),
        0.0,
        1.0,
        opts,
    )
    .map_err(|e| Error::Numeric(format!("gamma_factor({i}, {z}): {e}")))?;
    if r.error > 1e-12 {
        return Err(Error::Numeric(format!("gamma_factor({i}, {z}) error estimate {:e} above 1e-12", r.error)));
    }
    Ok(r.value)
}

/// `γ^{(i)}(z)`: series for `|z| < 1`, quadrature otherwise.
pub fn gamma_factor(i: usize, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return validation(format!("gamma_factor argument must be finite, got {z}"));
    }
    if z.abs() < 1.0 {
        gamma_factor_series(i, z, 30)
    } else {
        gamma_factor_quadrature(i, z)
    }
}

/// One Fourier mode `amplitude · e^{i k·x}` with `k_j = 2π n_j / L_j`.
#[derive(Debug, Clone)]
pub struct PotentialMode {
    pub index: Vec<i64>,
    pub amplitude: CMat,
}

/// One Fourier mode of the connection curvature; `components` are the `m × m` blocks `ℛ^{μν}_k`.
#[derive(Debug, Clone)]
pub struct CurvatureMode {
    pub index: Vec<i64>,
    pub components: Vec<CMat>,
}

/// Flat torus carrying a trigonometric-polynomial potential and curvature.
#[derive(Debug, Clone)]
pub struct FourierBackground {
    periods: Vec<f64>,
    fiber: usize,
    potential: Vec<PotentialMode>,
    curvature: Vec<CurvatureMode>,
}

impl FourierBackground {
    pub fn new(
        periods: Vec<f64>,
        fiber: usize,
        potential: Vec<PotentialMode>,
        curvature: Vec<CurvatureMode>,
    ) -> Result<Self> {
        let m = periods.len();
        if m == 0 {
            return validation("background needs at least one period");
        }
        for &p in &periods {
            require_positive("torus period", p)?;
        }
        let tol = 1e-12;
        for mode in &potential {
            if mode.index.len() != m || mode.amplitude.shape() != (fiber, fiber) {
                return validation("potential mode has wrong index length or block size");
            }
            let neg: Vec<i64> = mode.index.iter().map(|v| -v).collect();
            let partner = potential.iter().find(|p| p.index == neg);
            let ok = partner.is_some_and(|p| crate::linalg::max_abs(&(&p.amplitude - mode.amplitude.adjoint())) <= tol);
            if !ok {
                return validation(format!("potential not Hermitian: mode {:?} lacks its adjoint partner", mode.index));
            }
        }
        for mode in &curvature {
            if mode.index.iter().all(|&v| v == 0) {
                return validation("curvature modes at zero wavevector are not supported");
            }
            if mode.index.len() != m || mode.components.len() != m * m {
                return validation("curvature mode has wrong index length or component count");
            }
            for a in 0..m {
                for b in 0..m {
                    let x = &mode.components[a * m + b];
                    if x.shape() != (fiber, fiber) || crate::linalg::max_abs(&(x + &mode.components[b * m + a])) > tol {
                        return validation("curvature mode must be antisymmetric with fiber-sized blocks");
                    }
                }
            }
            let neg: Vec<i64> = mode.index.iter().map(|v| -v).collect();
            let ok = curvature.iter().find(|p| p.index == neg).is_some_and(|p| {
                p.components
                    .iter()
                    .zip(&mode.components)
                    .all(|(x, y)| crate::linalg::max_abs(&(x + y.adjoint())) <= tol)
            });
            if !ok {
                return validation(format!("curvature not anti-Hermitian: mode {:?} lacks its partner", mode.index));
            }
        }
        Ok(Self { periods, fiber, potential, curvature })
    }

    /// Scalar potential `q cos(n x)` on a circle of length `length`.
    pub fn cosine_potential(length: f64, n: i64, q: f64) -> Result<Self> {
        let half = CMat::from_element(1, 1, crate::linalg::c(q / 2.0));
        Self::new(
            vec![length],
            1,
            vec![
                PotentialMode { index: vec![n], amplitude: half.clone() },
                PotentialMode { index: vec![-n], amplitude: half },
            ],
            Vec::new(),
        )
    }

    pub fn dim(&self) -> usize {
        self.periods.len()
    }
    pub fn periods(&self) -> &[f64] {
        &self.periods
    }
    pub fn fiber(&self) -> usize {
        self.fiber
    }
    pub fn volume(&self) -> f64 {
        self.periods.iter().product()
    }
    pub fn potential_modes(&self) -> &[PotentialMode] {
        &self.potential
    }
    pub fn curvature_modes(&self) -> &[CurvatureMode] {
        &self.curvature
    }

    pub fn wavevector(&self, index: &[i64]) -> Vec<f64> {
        index.iter().zip(&self.periods).map(|(&n, &l)| 2.0 * std::f64::consts::PI * n as f64 / l).collect()
    }

    /// Same background with every amplitude multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let c = crate::linalg::c(s);
        let mut out = self.clone();
        out.potential.iter_mut().for_each(|p| p.amplitude *= c);
        out.curvature.iter_mut().for_each(|p| p.components.iter_mut().for_each(|x| *x *= c));
        out
    }

    /// Sorted-index mode pairs `(|k|², tr Q_k† Q_k)`.
    fn potential_channel(&self) -> Vec<(f64, f64)> {
        let mut modes: Vec<&PotentialMode> = self.potential.iter().collect();
        modes.sort_by(|a, b| a.index.cmp(&b.index));
        modes
            .iter()
            .map(|p| {
                let k2: f64 = self.wavevector(&p.index).iter().map(|v| v * v).sum();
                (k2, trace(&(p.amplitude.adjoint() * &p.amplitude)).re)
            })
            .collect()
    }

    /// Mode pairs `(|k|², tr Σ_γ (k·ℛ_{−k})_γ (k·ℛ_k)_γ)`.
    fn curvature_channel(&self) -> Vec<(f64, f64)> {
        let m = self.dim();
        let mut modes: Vec<&CurvatureMode> = self.curvature.iter().collect();
        modes.sort_by(|a, b| a.index.cmp(&b.index));
        modes
            .iter()
            .map(|mode| {
                let k = self.wavevector(&mode.index);
                let neg: Vec<i64> = mode.index.iter().map(|v| -v).collect();
                let partner = self.curvature.iter().find(|p| p.index == neg).expect("validated partner");
                let contract = |comps: &[CMat], g: usize| -> CMat {
                    (0..m).fold(CMat::zeros(self.fiber, self.fiber), |acc, a| {
                        acc + &comps[a * m + g] * crate::linalg::c(k[a])
                    })
                };
                let mut tr = 0.0;
                for g in 0..m {
                    tr += trace(&(contract(&partner.components, g) * contract(&mode.components, g))).re;
                }
                (k.iter().map(|v| v * v).sum(), tr)
            })
            .collect()
    }
}

/// `H(t)`: the resummed quadratic part of the heat trace on a flat torus.
pub fn h_functional(bg: &FourierBackground, t: f64) -> Result<f64> {
    require_positive("t", t)?;
    let m = bg.dim() as f64;
    let pre = (4.0 * std::f64::consts::PI).powf(-m / 2.0) * 0.5 * bg.volume();
    let mut sum = 0.0;
    for (k2, tr) in bg.potential_channel() {
        sum += tr * gamma_factor(1, t * k2)?;
    }
    for (k2, tr) in bg.curvature_channel() {
        sum += 2.0 * tr * gamma_factor(2, t * k2)? / k2;
    }
    Ok(pre * sum)
}

/// Coefficient of `t^{k−2}` in the small-`t` expansion of [`h_functional`].
pub fn a2k2_coefficient(bg: &FourierBackground, k: i64) -> Result<f64> {
    if k < 2 {
        return validation(format!("a2k2_coefficient needs k >= 2, got {k}"));
    }
    let m = bg.dim() as f64;
    let n = (k - 2) as u32;
    let pre = (4.0 * std::f64::consts::PI).powf(-m / 2.0) * crate::special::factorial(n)
        / (2.0 * crate::special::factorial(2 * k as u32 - 3))
        * bg.volume();
    let f2 = *f_universal(2, k)?.numer() as f64 / *f_universal(2, k)?.denom() as f64;
    let mut sum = 0.0;
    for (k2, tr) in bg.potential_channel() {
        sum += tr * (-k2).powi(n as i32);
    }
    for (k2, tr) in bg.curvature_channel() {
        sum += 2.0 * f2 * tr * (-k2).powi(n as i32) / k2;
    }
    Ok(pre * sum)
}
