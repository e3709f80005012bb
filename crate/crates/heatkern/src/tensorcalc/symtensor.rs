//! Dense symmetric (p, q)-tensors with endomorphism-valued entries.

use crate::error::{validation, Error, Result};
use crate::linalg::{c, max_abs, CMat};
use crate::tensorcalc::multi_index as mi;

/// Symmetric tensor with `p` upper and `q` lower indices over `ℝ^m`, each
/// component a complex `d × d` block. Only canonical components are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    m: usize,
    d: usize,
    p: usize,
    q: usize,
    entries: Vec<CMat>,
}

impl SymTensor {
    pub fn zeros(m: usize, d: usize, p: usize, q: usize) -> Self {
        let len = mi::count(m, p) * mi::count(m, q);
        Self { m, d, p, q, entries: vec![CMat::zeros(d, d); len] }
    }

    /// Order-zero tensor holding a single block.
    pub fn scalar(m: usize, block: CMat) -> Self {
        let d = block.nrows();
        Self { m, d, p: 0, q: 0, entries: vec![block] }
    }

    /// The identity map on symmetric `n`-tensors, type `(n, n)`.
    pub fn identity(m: usize, d: usize, n: usize) -> Self {
        let mut t = Self::zeros(m, d, n, n);
        for alpha in mi::enumerate(m, n) {
            let r = mi::rank(&alpha);
            t.set(r, r, CMat::identity(d, d) * c(1.0 / mi::multiplicity(&alpha)));
        }
        t
    }

    /// Covariant tensor of order 1 from a covector with scalar (d = 1) entries.
    pub fn covector(values: &[f64]) -> Self {
        let m = values.len();
        let mut t = Self::zeros(m, 1, 0, 1);
        for (i, &v) in values.iter().enumerate() {
            t.entries[i] = CMat::from_element(1, 1, c(v));
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.m
    }
    pub fn fiber(&self) -> usize {
        self.d
    }
    pub fn upper(&self) -> usize {
        self.p
    }
    pub fn lower(&self) -> usize {
        self.q
    }
    pub fn entries(&self) -> &[CMat] {
        &self.entries
    }

    fn lower_len(&self) -> usize {
        mi::count(self.m, self.q)
    }

    /// Block at canonical ranks `(upper, lower)`.
    pub fn get(&self, upper: usize, lower: usize) -> &CMat {
        &self.entries[upper * self.lower_len() + lower]
    }

    pub fn get_mut(&mut self, upper: usize, lower: usize) -> &mut CMat {
        let ll = self.lower_len();
        &mut self.entries[upper * ll + lower]
    }

    pub fn set(&mut self, upper: usize, lower: usize, block: CMat) {
        *self.get_mut(upper, lower) = block;
    }

    /// Block for arbitrary (unsorted) index lists.
    pub fn component(&self, upper: &[usize], lower: &[usize]) -> &CMat {
        let u = mi::rank(&mi::from_indices(self.m, upper));
        let l = mi::rank(&mi::from_indices(self.m, lower));
        self.get(u, l)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, b| acc.max(max_abs(b)))
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(crate::linalg::is_finite)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for b in &mut out.entries {
            *b *= c(s);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(&other.entries) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if (self.m, self.d, self.p, self.q) != (other.m, other.d, other.p, other.q) {
            return validation(format!(
                "shape mismatch: (m={}, d={}, {}/{}) vs (m={}, d={}, {}/{})",
                self.m, self.d, self.p, self.q, other.m, other.d, other.p, other.q
            ));
        }
        Ok(())
    }
}

/// Normalized symmetric product: upper and lower blocks are each symmetrized
/// with unit weight, fiber blocks compose as `A·B`.
pub fn sym_product(a: &SymTensor, b: &SymTensor) -> Result<SymTensor> {
    if a.m != b.m || a.d != b.d {
        return Err(Error::Validation(format!(
            "sym_product needs equal dimension and fiber: (m={}, d={}) vs (m={}, d={})",
            a.m, a.d, b.m, b.d
        )));
    }
    let (m, d) = (a.m, a.d);
    let (p, q) = (a.p + b.p, a.q + b.q);
    let mut out = SymTensor::zeros(m, d, p, q);
    let uppers = mi::enumerate(m, p);
    let lowers = mi::enumerate(m, q);
    let lower_splits: Vec<_> = lowers.iter().map(|l| mi::splits(l, a.q)).collect();
    for (ur, u) in uppers.iter().enumerate() {
        let usplits = mi::splits(u, a.p);
        for (lr, lsplit) in lower_splits.iter().enumerate() {
            let mut acc = CMat::zeros(d, d);
            for (u1, wu) in &usplits {
                let u2: Vec<u8> = u.iter().zip(u1).map(|(x, y)| x - y).collect();
                let (ra1, rb1) = (mi::rank(u1), mi::rank(&u2));
                for (l1, wl) in lsplit {
                    let l2: Vec<u8> = lowers[lr].iter().zip(l1).map(|(x, y)| x - y).collect();
                    let blk = a.get(ra1, mi::rank(l1)) * b.get(rb1, mi::rank(&l2));
                    acc += blk * c(wu * wl);
                }
            }
            out.set(ur, lr, acc);
        }
    }
    Ok(out)
}

/// `k`-fold symmetric power; `k = 0` gives the unit scalar.
pub fn sym_power(a: &SymTensor, k: i64) -> Result<SymTensor> {
    if k < 0 {
        return validation(format!("sym_power exponent must be non-negative, got {k}"));
    }
    let mut out = SymTensor::scalar(a.m, CMat::identity(a.d, a.d));
    for _ in 0..k {
        out = sym_product(&out, a)?;
    }
    Ok(out)
}

/// Full contraction of `a`'s upper block against `b`'s lower block:
/// `(a ⋆ b)^I_M = Σ_ν a^ν_M b^I_ν`, blocks composed as `a·b`.
pub fn inner_product(a: &SymTensor, b: &SymTensor) -> Result<SymTensor> {
    if a.m != b.m || a.d != b.d {
        return validation("inner_product needs equal dimension and fiber");
    }
    if a.p != b.q {
        return validation(format!("inner_product order mismatch: upper order {} against lower order {}", a.p, b.q));
    }
    let (m, d) = (a.m, a.d);
    let weights: Vec<f64> = mi::enumerate(m, a.p).iter().map(|g| mi::multiplicity(g)).collect();
    let mut out = SymTensor::zeros(m, d, b.p, a.q);
    for i in 0..mi::count(m, b.p) {
        for mm in 0..mi::count(m, a.q) {
            let mut acc = CMat::zeros(d, d);
            for (g, &w) in weights.iter().enumerate() {
                let ab = a.get(g, mm);
                let bb = b.get(i, g);
                if max_abs(ab) == 0.0 || max_abs(bb) == 0.0 {
                    continue;
                }
                acc += ab * bb * c(w);
            }
            out.set(i, mm, acc);
        }
    }
    Ok(out)
}
