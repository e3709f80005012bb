//! Diagonal heat trace of `−Δ + Q` on a symmetric space.
//!
//! The diagonal is `(4πt)^{−m/2} tr e^{−t(Q−R/8−R_H/6)} Θ(t)` with
//! `Θ(t) = E_ω[det^{1/2}_H(sinh(√t ω·F/2)/(√t ω·F/2)) det^{−1/2}_{TM}(sinh(√t ω·D/2)/(√t ω·D/2))]`
//! and `ω` Gaussian with covariance `2β^{−1}`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{require_positive, validation, Error, Result};
use crate::linalg::{c, from_real, is_hermitian, trace, trace_exp_neg, CMat};
use crate::quad::GaussLegendre;
use crate::special::{bernoulli, double_factorial_odd, factorial};
use crate::symmspace::space::SymmetricSpaceData;
use crate::tensorcalc::multi_index as mi;
use crate::tensorcalc::{MatPoly, Poly};

pub const MAX_THETA_ORDER: usize = 6;

/// Half-width of the whitened quadrature box, in standard deviations.
const BOX: f64 = 6.0;
const QUAD_NODES: usize = 48;
const LOG_DET_TERMS: usize = 40;

struct Whitened {
    d: Vec<DMatrix<f64>>,
    f: Vec<DMatrix<f64>>,
}

/// Generators in coordinates `ω = Lz` with `LLᵀ = 2β^{−1}` and `z` standard normal.
fn whiten(space: &SymmetricSpaceData) -> Result<Whitened> {
    let p = space.holonomy_dim();
    let cov = space
        .beta()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Validation("β must be positive definite".into()))?
        .inverse()
        * 2.0;
    let l = cov.cholesky().ok_or_else(|| Error::Numeric("covariance factorization failed".into()))?.l();
    let mix = |gens: &[DMatrix<f64>]| -> Vec<DMatrix<f64>> {
        (0..p)
            .map(|j| (0..p).fold(DMatrix::zeros(gens[0].nrows(), gens[0].ncols()), |acc, i| acc + &gens[i] * l[(i, j)]))
            .collect()
    };
    Ok(Whitened { d: mix(space.d_generators()), f: mix(space.f_generators()) })
}

fn check_potential(q: &CMat) -> Result<()> {
    if !q.is_square() || q.nrows() == 0 || !is_hermitian(q, 1e-12) {
        return validation("potential must be a non-empty Hermitian matrix");
    }
    Ok(())
}

fn curvature_shift(space: &SymmetricSpaceData) -> f64 {
    space.scalar_curvature() / 8.0 + space.holonomy_curvature() / 6.0
}

/// `tr (z·X)^n` as a polynomial in `z`.
fn trace_powers(gens: &[DMatrix<f64>], deg: usize) -> Vec<Poly> {
    let p = gens.len();
    let n = gens[0].nrows();
    let mut x = MatPoly::zero(p, n, deg);
    for (j, g) in gens.iter().enumerate() {
        let mut counts = vec![0u8; p];
        counts[j] = 1;
        x = x.add(&MatPoly::monomial(p, deg, &counts, from_real(g)));
    }
    let mut out = vec![Poly::constant(p, deg, n as f64)];
    let mut pw = MatPoly::constant(p, deg, crate::linalg::identity(n));
    for _ in 1..=deg {
        pw = pw.mul(&x);
        out.push((0..n).fold(Poly::zero(p, deg), |acc, i| acc.add(&pw.entry_poly(i, i))));
    }
    out
}

/// `E[z^α]` for a standard normal vector.
fn gaussian_moment(counts: &[u8]) -> f64 {
    counts.iter().map(|&a| if a % 2 == 1 { 0.0 } else { double_factorial_odd(a as usize / 2) }).product()
}

/// Coefficients `θ_k` of `Θ(t) = Σ θ_k t^k`.
fn theta_expansion(space: &SymmetricSpaceData, order: usize) -> Result<Vec<f64>> {
    let w = whiten(space)?;
    let p = space.holonomy_dim();
    let deg = 2 * order;
    let bern = bernoulli(deg.max(2));
    let tf = trace_powers(&w.f, deg);
    let td = trace_powers(&w.d, deg);
    // log Θ-integrand = Σ_j t^j P_j(z)
    let logs: Vec<Poly> = (0..=order)
        .map(|j| {
            if j == 0 {
                return Poly::zero(p, deg);
            }
            let n = 2 * j;
            let cf = bern[n] / (n as f64 * factorial(n as u32));
            tf[n].add(&td[n].scale(-1.0)).scale(0.5 * cf)
        })
        .collect();
    let mut series = vec![Poly::constant(p, deg, 1.0)];
    for k in 1..=order {
        let mut acc = Poly::zero(p, deg);
        for j in 1..=k {
            acc = acc.add(&logs[j].mul(&series[k - j]).scale(j as f64));
        }
        series.push(acc.scale(1.0 / k as f64));
    }
    Ok(series
        .iter()
        .enumerate()
        .map(|(k, poly)| mi::enumerate(p, 2 * k).iter().map(|a| poly.coefficient(a) * gaussian_moment(a)).sum())
        .collect())
}

/// Coefficients `c_0..=c_K` of `(4πt)^{m/2} tr U^{diag}(t) = Σ c_k t^k + O(t^{K+1})`.
pub fn theta_series(space: &SymmetricSpaceData, q: &CMat, order: usize) -> Result<Vec<f64>> {
    if order > MAX_THETA_ORDER {
        return validation(format!("theta_series order must be <= {MAX_THETA_ORDER}, got {order}"));
    }
    check_potential(q)?;
    let theta = theta_expansion(space, order)?;
    let d = q.nrows();
    let shift = crate::linalg::scalar(d, curvature_shift(space));
    let gen = -(q - shift);
    let mut pref = Vec::with_capacity(order + 1);
    let mut pw = crate::linalg::identity(d);
    for a in 0..=order {
        pref.push(trace(&pw).re / factorial(a as u32));
        pw = &pw * &gen;
    }
    Ok((0..=order).map(|k| (0..=k).map(|a| pref[a] * theta[k - a]).sum()).collect())
}

/// Largest `t` admitted by [`theta_quadrature`].
pub fn theta_t_max(space: &SymmetricSpaceData) -> Result<f64> {
    let w = whiten(space)?;
    let spectral = |x: &DMatrix<f64>| x.clone().singular_values().max();
    let s: f64 = w.d.iter().zip(&w.f).map(|(d, f)| spectral(d).max(spectral(f))).sum();
    Ok(if s == 0.0 { f64::INFINITY } else { (std::f64::consts::PI / (BOX * s)).powi(2) })
}

/// `B_{2n}/(2n)! = (−1)^{n+1} 2ζ(2n)/(2π)^{2n}`.
fn bernoulli_ratio(n: usize) -> f64 {
    if n <= 6 {
        return bernoulli(2 * n)[2 * n] / factorial(2 * n as u32);
    }
    let zeta: f64 = (1..=40).rev().map(|k| (k as f64).powi(-2 * n as i32)).sum();
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    sign * 2.0 * zeta / (2.0 * std::f64::consts::PI).powi(2 * n as i32)
}

/// `log det (sinh(X/2)/(X/2)) = Σ_n B_{2n}/(2n (2n)!) tr X^{2n}`, valid for spectral radius below `2π`.
fn log_det_sinhc(x: &DMatrix<f64>, coeffs: &[f64]) -> f64 {
    let x2 = x * x;
    let mut pw = x2.clone();
    let mut sum = 0.0;
    for cf in coeffs {
        sum += cf * pw.trace();
        pw = &pw * &x2;
    }
    sum
}

/// Direct quadrature of the diagonal heat trace over the whitened box `|z_j| ≤ 6`.
pub fn theta_quadrature(space: &SymmetricSpaceData, q: &CMat, t: f64) -> Result<f64> {
    require_positive("t", t)?;
    check_potential(q)?;
    let t_max = theta_t_max(space)?;
    if t >= t_max {
        return Err(Error::Domain(format!(
            "t = {t} violates the pole constraint sqrt(t)·|D|·6σ < π (requires t < {t_max:.6e})"
        )));
    }
    let w = whiten(space)?;
    let p = space.holonomy_dim();
    let rule = GaussLegendre::new(QUAD_NODES)?;
    let nodes: Vec<(f64, f64)> = rule
        .on(-BOX, BOX)
        .map(|(z, wt)| (z, wt * (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()))
        .collect();
    let total = nodes.len().pow(p as u32);
    let rt = t.sqrt();
    let coeffs: Vec<f64> = (1..=LOG_DET_TERMS).map(|n| bernoulli_ratio(n) / (2.0 * n as f64)).collect();
    let m = space.dim();
    let parts: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rem = flat;
            let mut weight = 1.0;
            let mut xd = DMatrix::zeros(m, m);
            let mut xf = DMatrix::zeros(p, p);
            for j in 0..p {
                let (z, wt) = nodes[rem % nodes.len()];
                rem /= nodes.len();
                weight *= wt;
                xd += &w.d[j] * (rt * z);
                xf += &w.f[j] * (rt * z);
            }
            weight * (0.5 * (log_det_sinhc(&xf, &coeffs) - log_det_sinhc(&xd, &coeffs))).exp()
        })
        .collect();
    let theta: f64 = parts.iter().sum();
    let fiber = trace_exp_neg(&(q * c(t))) * (t * curvature_shift(space)).exp();
    Ok((4.0 * std::f64::consts::PI * t).powf(-(m as f64) / 2.0) * fiber * theta)
}
