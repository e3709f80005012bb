//! Polynomials in normal coordinates and the Taylor basis.
//!
//! The basis function `|n⟩` is `x^{⊗n}/n!` and the dual pairing `⟨n|f⟩` is the
//! symmetrized `n`-th derivative at the origin, so the canonical component of
//! `⟨n|f⟩` at multi-index `β` equals `β!` times the coefficient of `x^β`.

use crate::error::{validation, Result};
use crate::linalg::{c, CMat};
use crate::tensorcalc::multi_index as mi;
use crate::tensorcalc::symtensor::SymTensor;

/// Dense graded layout of all monomials of degree `≤ deg` in `m` variables.
#[derive(Debug, Clone, PartialEq)]
struct Layout {
    m: usize,
    deg: usize,
    offsets: Vec<usize>,
}

impl Layout {
    fn new(m: usize, deg: usize) -> Self {
        let mut offsets = Vec::with_capacity(deg + 2);
        let mut acc = 0;
        for n in 0..=deg + 1 {
            offsets.push(acc);
            acc += mi::count(m, n);
        }
        Self { m, deg, offsets }
    }

    fn len(&self) -> usize {
        self.offsets[self.deg + 1]
    }

    fn index(&self, counts: &[u8]) -> usize {
        let n: usize = counts.iter().map(|&x| x as usize).sum();
        self.offsets[n] + mi::rank(counts)
    }

    fn monomials(&self) -> Vec<(usize, Vec<u8>)> {
        (0..=self.deg).flat_map(|n| mi::enumerate(self.m, n).into_iter().map(move |a| (n, a))).collect()
    }
}

/// Real scalar polynomial truncated at a fixed degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    layout: Layout,
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn zero(m: usize, deg: usize) -> Self {
        let layout = Layout::new(m, deg);
        let len = layout.len();
        Self { layout, coeffs: vec![0.0; len] }
    }

    pub fn constant(m: usize, deg: usize, value: f64) -> Self {
        let mut p = Self::zero(m, deg);
        p.coeffs[0] = value;
        p
    }

    /// The coordinate function `x^i`.
    pub fn variable(m: usize, deg: usize, i: usize) -> Self {
        let mut p = Self::zero(m, deg);
        if deg >= 1 {
            let mut a = vec![0u8; m];
            a[i] = 1;
            let idx = p.layout.index(&a);
            p.coeffs[idx] = 1.0;
        }
        p
    }

    /// `Σ_j s_j r^{2j}` with `r² = Σ x_i²`.
    pub fn radial(m: usize, deg: usize, series: &[f64]) -> Self {
        let r2 = (0..m).fold(Self::zero(m, deg), |acc, i| {
            let x = Self::variable(m, deg, i);
            acc.add(&x.mul(&x))
        });
        let mut out = Self::zero(m, deg);
        let mut power = Self::constant(m, deg, 1.0);
        for (j, &s) in series.iter().enumerate() {
            if 2 * j > deg {
                break;
            }
            out = out.add(&power.scale(s));
            power = power.mul(&r2);
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.layout.m
    }
    pub fn degree_cap(&self) -> usize {
        self.layout.deg
    }

    pub fn coefficient(&self, counts: &[u8]) -> f64 {
        let n: usize = counts.iter().map(|&x| x as usize).sum();
        if n > self.layout.deg {
            0.0
        } else {
            self.coeffs[self.layout.index(counts)]
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|x| *x *= s);
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.layout.m, self.layout.deg);
        let monos = self.layout.monomials();
        for (i, (ni, a)) in monos.iter().enumerate() {
            let ca = self.coeffs[i];
            if ca == 0.0 {
                continue;
            }
            for (j, (nj, b)) in monos.iter().enumerate() {
                if ni + nj > self.layout.deg || other.coeffs[j] == 0.0 {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.coeffs[self.layout.index(&sum)] += ca * other.coeffs[j];
            }
        }
        out
    }

    pub fn deriv(&self, i: usize) -> Self {
        let mut out = Self::zero(self.layout.m, self.layout.deg);
        for (k, (_, a)) in self.layout.monomials().iter().enumerate() {
            if a[i] == 0 || self.coeffs[k] == 0.0 {
                continue;
            }
            let mut b = a.clone();
            b[i] -= 1;
            out.coeffs[self.layout.index(&b)] += a[i] as f64 * self.coeffs[k];
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.layout
            .monomials()
            .iter()
            .zip(&self.coeffs)
            .map(|((_, a), &cf)| cf * a.iter().zip(x).map(|(&e, &xi)| xi.powi(e as i32)).product::<f64>())
            .sum()
    }

    /// Same polynomial on a different degree cap (higher terms dropped).
    pub fn resized(&self, deg: usize) -> Self {
        let mut out = Self::zero(self.layout.m, deg);
        for n in 0..=deg.min(self.layout.deg) {
            for a in mi::enumerate(self.layout.m, n) {
                let idx = out.layout.index(&a);
                out.coeffs[idx] = self.coefficient(&a);
            }
        }
        out
    }

    pub fn to_mat(&self, d: usize) -> MatPoly {
        MatPoly::from_scalar(self, &CMat::identity(d, d))
    }
}

/// Polynomial with complex `d × d` matrix coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct MatPoly {
    layout: Layout,
    d: usize,
    coeffs: Vec<CMat>,
}

impl MatPoly {
    pub fn zero(m: usize, d: usize, deg: usize) -> Self {
        let layout = Layout::new(m, deg);
        let len = layout.len();
        Self { layout, d, coeffs: vec![CMat::zeros(d, d); len] }
    }

    pub fn constant(m: usize, deg: usize, block: CMat) -> Self {
        let mut p = Self::zero(m, block.nrows(), deg);
        p.coeffs[0] = block;
        p
    }

    /// Scalar polynomial times a fixed block.
    pub fn from_scalar(p: &Poly, block: &CMat) -> Self {
        let mut out = Self::zero(p.layout.m, block.nrows(), p.layout.deg);
        for (dst, &cf) in out.coeffs.iter_mut().zip(&p.coeffs) {
            if cf != 0.0 {
                *dst = block * c(cf);
            }
        }
        out
    }

    /// `scale · x^counts · block`.
    pub fn monomial(m: usize, deg: usize, counts: &[u8], block: CMat) -> Self {
        let mut out = Self::zero(m, block.nrows(), deg);
        let n: usize = counts.iter().map(|&x| x as usize).sum();
        if n <= deg {
            let idx = out.layout.index(counts);
            out.coeffs[idx] = block;
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.layout.m
    }
    pub fn fiber(&self) -> usize {
        self.d
    }
    pub fn degree_cap(&self) -> usize {
        self.layout.deg
    }

    pub fn coefficient(&self, counts: &[u8]) -> CMat {
        let n: usize = counts.iter().map(|&x| x as usize).sum();
        if n > self.layout.deg {
            CMat::zeros(self.d, self.d)
        } else {
            self.coeffs[self.layout.index(counts)].clone()
        }
    }

    pub fn coefficient_mut(&mut self, counts: &[u8]) -> &mut CMat {
        let idx = self.layout.index(counts);
        &mut self.coeffs[idx]
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|x| *x *= c(s));
        out
    }

    /// Product with matrix composition `self · other`.
    pub fn mul(&self, other: &Self) -> Self {
        let deg = self.layout.deg;
        let mut out = Self::zero(self.layout.m, self.d, deg);
        let monos = self.layout.monomials();
        let nz_a: Vec<bool> = self.coeffs.iter().map(|b| b.iter().any(|z| z.norm() != 0.0)).collect();
        let nz_b: Vec<bool> = other.coeffs.iter().map(|b| b.iter().any(|z| z.norm() != 0.0)).collect();
        for (i, (ni, a)) in monos.iter().enumerate() {
            if !nz_a[i] {
                continue;
            }
            for (j, (nj, b)) in monos.iter().enumerate() {
                if ni + nj > deg || !nz_b[j] {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let idx = self.layout.index(&sum);
                out.coeffs[idx] += &self.coeffs[i] * &other.coeffs[j];
            }
        }
        out
    }

    /// Product with `scale · x^counts` (cheaper than a full product).
    pub fn mul_monomial(&self, counts: &[u8], scale: f64) -> Self {
        let deg = self.layout.deg;
        let shift: usize = counts.iter().map(|&x| x as usize).sum();
        let mut out = Self::zero(self.layout.m, self.d, deg);
        for (k, (n, a)) in self.layout.monomials().iter().enumerate() {
            if n + shift > deg {
                continue;
            }
            let sum: Vec<u8> = a.iter().zip(counts).map(|(x, y)| x + y).collect();
            let idx = self.layout.index(&sum);
            out.coeffs[idx] += &self.coeffs[k] * c(scale);
        }
        out
    }

    /// Scalar polynomial formed by the real parts of entry `(i, j)` of every coefficient.
    pub fn entry_poly(&self, i: usize, j: usize) -> Poly {
        let mut p = Poly::zero(self.layout.m, self.layout.deg);
        for (dst, b) in p.coeffs.iter_mut().zip(&self.coeffs) {
            *dst = b[(i, j)].re;
        }
        p
    }

    pub fn mul_scalar_poly(&self, p: &Poly) -> Self {
        self.mul(&p.to_mat(self.d))
    }

    pub fn deriv(&self, i: usize) -> Self {
        let mut out = Self::zero(self.layout.m, self.d, self.layout.deg);
        for (k, (_, a)) in self.layout.monomials().iter().enumerate() {
            if a[i] == 0 {
                continue;
            }
            let mut b = a.clone();
            b[i] -= 1;
            let idx = self.layout.index(&b);
            out.coeffs[idx] += &self.coeffs[k] * c(a[i] as f64);
        }
        out
    }

    /// Euler operator `x^μ ∂_μ`: scales the degree-`n` part by `n`.
    pub fn euler(&self) -> Self {
        let mut out = self.clone();
        for (k, (n, _)) in self.layout.monomials().iter().enumerate() {
            out.coeffs[k] *= c(*n as f64);
        }
        out
    }

    /// Same polynomial on a different degree cap (higher terms dropped).
    pub fn resized(&self, deg: usize) -> Self {
        let mut out = Self::zero(self.layout.m, self.d, deg);
        for n in 0..=deg.min(self.layout.deg) {
            for a in mi::enumerate(self.layout.m, n) {
                let idx = out.layout.index(&a);
                out.coeffs[idx] = self.coefficient(&a);
            }
        }
        out
    }

    /// Drops all terms of degree above `deg`.
    pub fn truncate(&self, deg: usize) -> Self {
        let mut out = self.clone();
        for (k, (n, _)) in self.layout.monomials().iter().enumerate() {
            if *n > deg {
                out.coeffs[k] = CMat::zeros(self.d, self.d);
            }
        }
        out
    }

    /// Largest block modulus among terms of degree `≤ deg`.
    pub fn max_abs_upto(&self, deg: usize) -> f64 {
        self.layout
            .monomials()
            .iter()
            .zip(&self.coeffs)
            .filter(|((n, _), _)| *n <= deg)
            .fold(0.0, |acc, (_, b)| acc.max(crate::linalg::max_abs(b)))
    }

    pub fn eval(&self, x: &[f64]) -> CMat {
        let mut out = CMat::zeros(self.d, self.d);
        for ((_, a), b) in self.layout.monomials().iter().zip(&self.coeffs) {
            let w: f64 = a.iter().zip(x).map(|(&e, &xi)| xi.powi(e as i32)).product();
            out += b * c(w);
        }
        out
    }
}

/// Coefficients `⟨n|f⟩` for `n = 0..=cutoff`; component `n` has lower order `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorSeries {
    m: usize,
    d: usize,
    components: Vec<SymTensor>,
}

impl TaylorSeries {
    pub fn new(components: Vec<SymTensor>) -> Result<Self> {
        let Some(first) = components.first() else {
            return validation("a Taylor series needs at least the order-0 component");
        };
        let (m, d) = (first.dim(), first.fiber());
        for (n, t) in components.iter().enumerate() {
            if t.upper() != 0 || t.lower() != n || t.dim() != m || t.fiber() != d {
                return validation(format!("component {n} must be a lower-order-{n} tensor over the same space"));
            }
        }
        Ok(Self { m, d, components })
    }

    pub fn zero(m: usize, d: usize, cutoff: usize) -> Self {
        Self { m, d, components: (0..=cutoff).map(|n| SymTensor::zeros(m, d, 0, n)).collect() }
    }

    /// Taylor data of a polynomial up to `cutoff`.
    pub fn from_poly(p: &MatPoly, cutoff: usize) -> Self {
        let (m, d) = (p.dim(), p.fiber());
        let components = (0..=cutoff)
            .map(|n| {
                let mut t = SymTensor::zeros(m, d, 0, n);
                for (r, beta) in mi::enumerate(m, n).iter().enumerate() {
                    t.set(0, r, p.coefficient(beta) * c(mi::factorial(beta)));
                }
                t
            })
            .collect();
        Self { m, d, components }
    }

    /// Polynomial with the same Taylor data, degree cap `deg ≥ cutoff`.
    pub fn to_poly(&self, deg: usize) -> MatPoly {
        let mut p = MatPoly::zero(self.m, self.d, deg.max(self.cutoff()));
        for (n, t) in self.components.iter().enumerate() {
            for (r, beta) in mi::enumerate(self.m, n).iter().enumerate() {
                *p.coefficient_mut(beta) = t.get(0, r) * c(1.0 / mi::factorial(beta));
            }
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.m
    }
    pub fn fiber(&self) -> usize {
        self.d
    }
    pub fn cutoff(&self) -> usize {
        self.components.len() - 1
    }
    pub fn components(&self) -> &[SymTensor] {
        &self.components
    }
    pub fn component(&self, n: usize) -> Option<&SymTensor> {
        self.components.get(n)
    }

    /// Keeps components `0..=cutoff`.
    pub fn truncated(&self, cutoff: usize) -> Self {
        Self { m: self.m, d: self.d, components: self.components[..=cutoff.min(self.cutoff())].to_vec() }
    }
}

/// `⟨n|f⟩`.
pub fn taylor_basis_pairing(n: usize, f: &TaylorSeries) -> Result<SymTensor> {
    f.component(n)
        .cloned()
        .ok_or_else(|| crate::error::Error::Validation(format!("order {n} exceeds series cutoff {}", f.cutoff())))
}

/// `⟨n|k⟩`, computed by pairing `⟨n|` with the tensor-valued polynomial `|k⟩`.
///
/// The result has upper order `k` (the label of `|k⟩`) and lower order `n`.
pub fn basis_pairing(m: usize, d: usize, n: usize, k: usize) -> SymTensor {
    let mut out = SymTensor::zeros(m, d, k, n);
    let kfact = crate::special::factorial(k as u32);
    for (g, gamma) in mi::enumerate(m, k).iter().enumerate() {
        let ket = MatPoly::monomial(m, n.max(k), gamma, CMat::identity(d, d) * c(1.0 / kfact));
        let bra = TaylorSeries::from_poly(&ket, n);
        for r in 0..mi::count(m, n) {
            out.set(g, r, bra.components[n].get(0, r).clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_roundtrip_through_taylor() {
        let x = Poly::variable(2, 4, 0);
        let y = Poly::variable(2, 4, 1);
        let p = x.mul(&x).mul(&y).add(&y.scale(3.0)).add(&Poly::constant(2, 4, -1.0));
        let mp = p.to_mat(1);
        let series = TaylorSeries::from_poly(&mp, 4);
        assert_eq!(series.to_poly(4), mp);
        // ∂x∂x∂y (x²y) = 2
        assert_eq!(series.component(3).unwrap().component(&[], &[0, 0, 1])[(0, 0)].re, 2.0);
    }

    #[test]
    fn euler_scales_by_degree() {
        let x = Poly::variable(1, 5, 0);
        let p = x.mul(&x).mul(&x).to_mat(1).euler();
        assert_eq!(p.coefficient(&[3])[(0, 0)].re, 3.0);
    }

    #[test]
    fn radial_series() {
        let p = Poly::radial(2, 4, &[1.0, 2.0, 3.0]);
        assert!((p.eval(&[0.5, 0.1]) - (1.0 + 2.0 * 0.26 + 3.0 * 0.26f64.powi(2))).abs() < 1e-14);
    }
}
