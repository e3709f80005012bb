//! Non-Laplace operators `∇* a ∇ + Q` with covariantly constant leading symbol.
//!
//! The symbol `A(ξ) = a^{μν}ξ_μξ_ν` has eigenvalues `μ_i|ξ|²` with constant
//! multiplicities `d_i` and spectral projectors `Π_i(ξ̂)` that are even in `ξ̂`.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{require_positive, validation, Error, Result};
use crate::linalg::{c, hermitian_eigen, identity, is_hermitian, max_abs, trace, trace_exp_neg, zeros, CMat};
use crate::quad::GaussHermite;
use crate::special::ln_gamma;

/// Relative tolerance for grouping eigenvalues into slopes.
pub const CLUSTER_TOL: f64 = 1e-8;
/// Minimum number of sample directions accepted by [`eigenstructure`].
pub const MIN_DIRECTIONS: usize = 20;
/// Largest number of lattice points the torus oracle will visit.
pub const LATTICE_BUDGET: usize = 4_000_000;
/// Tail bound demanded from the torus oracle.
pub const TAIL_TARGET: f64 = 1e-10;

/// Constant symbol blocks `a^{μν}`, each a Hermitian `d×d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadingSymbol {
    m: usize,
    d: usize,
    blocks: Vec<CMat>,
}

impl LeadingSymbol {
    /// `blocks[μ * m + ν] = a^{μν}`.
    pub fn new(m: usize, blocks: Vec<CMat>) -> Result<Self> {
        if m == 0 || blocks.len() != m * m {
            return validation(format!("expected {} symbol blocks for m = {m}, got {}", m * m, blocks.len()));
        }
        let d = blocks[0].nrows();
        if d == 0 || blocks.iter().any(|b| b.nrows() != d || b.ncols() != d) {
            return validation("symbol blocks must be square with a common non-zero size");
        }
        for mu in 0..m {
            for nu in 0..m {
                let b = &blocks[mu * m + nu];
                if !b.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                    return validation("symbol blocks must be finite");
                }
                if !is_hermitian(b, 1e-12) {
                    return validation(format!("block a^{{{mu}{nu}}} is not Hermitian"));
                }
                if max_abs(&(b - &blocks[nu * m + mu])) > 1e-12 {
                    return validation(format!("a^{{{mu}{nu}}} differs from a^{{{nu}{mu}}}"));
                }
            }
        }
        Ok(Self { m, d, blocks })
    }

    /// `a^{μν} = g^{μν} I_d`.
    pub fn laplace(m: usize, d: usize) -> Result<Self> {
        let blocks = (0..m * m).map(|k| if k / m == k % m { identity(d) } else { zeros(d) }).collect();
        Self::new(m, blocks)
    }

    /// Symbol `|ξ|² I + c ξ⊗ξ` on 1-forms (`d = m`).
    pub fn one_form(m: usize, cpl: f64) -> Result<Self> {
        let mut blocks = Vec::with_capacity(m * m);
        for mu in 0..m {
            for nu in 0..m {
                let mut b = if mu == nu { identity(m) } else { zeros(m) };
                b[(mu, nu)] += c(cpl / 2.0);
                b[(nu, mu)] += c(cpl / 2.0);
                blocks.push(b);
            }
        }
        Self::new(m, blocks)
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn fiber(&self) -> usize {
        self.d
    }

    pub fn block(&self, mu: usize, nu: usize) -> &CMat {
        &self.blocks[mu * self.m + nu]
    }

    /// `A(ξ) = a^{μν} ξ_μ ξ_ν`.
    pub fn symbol(&self, xi: &[f64]) -> CMat {
        let mut out = zeros(self.d);
        for mu in 0..self.m {
            for nu in 0..self.m {
                let w = xi[mu] * xi[nu];
                if w != 0.0 {
                    out += self.block(mu, nu) * c(w);
                }
            }
        }
        out
    }
}

/// Slopes `μ_i`, multiplicities `d_i` and the projector evaluator.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSpectrum {
    symbol: LeadingSymbol,
    slopes: Vec<f64>,
    multiplicities: Vec<usize>,
    spread: f64,
}

impl SymbolSpectrum {
    pub fn symbol(&self) -> &LeadingSymbol {
        &self.symbol
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn distinct(&self) -> usize {
        self.slopes.len()
    }

    /// Largest relative deviation of a sampled eigenvalue from its slope.
    pub fn spread(&self) -> f64 {
        self.spread
    }

    /// Spectral projectors `Π_i(ξ̂)` at a non-zero covector.
    pub fn projectors(&self, xi: &[f64]) -> Result<Vec<CMat>> {
        let norm2: f64 = xi.iter().map(|x| x * x).sum();
        if xi.len() != self.symbol.m || !(norm2 > 0.0) || !norm2.is_finite() {
            return validation("projectors need a finite non-zero covector of the symbol dimension");
        }
        let unit: Vec<f64> = xi.iter().map(|x| x / norm2.sqrt()).collect();
        let (vals, vecs) = hermitian_eigen(&self.symbol.symbol(&unit));
        let d = self.symbol.d;
        let mut out = vec![zeros(d); self.slopes.len()];
        for (j, &lam) in vals.iter().enumerate() {
            let i = nearest(&self.slopes, lam);
            let v = vecs.column(j);
            out[i] += v * v.adjoint();
        }
        Ok(out)
    }
}

fn nearest(slopes: &[f64], lam: f64) -> usize {
    let mut best = 0;
    for (i, s) in slopes.iter().enumerate() {
        if (s - lam).abs() < (slopes[best] - lam).abs() {
            best = i;
        }
    }
    best
}

/// Sorted eigenvalues grouped into `(mean, multiplicity)` clusters.
fn cluster(vals: &[f64], scale: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize, f64)> = Vec::new();
    for &v in vals {
        match out.last_mut() {
            Some((sum, n, last)) if (v - *last).abs() <= CLUSTER_TOL * scale => {
                *sum += v;
                *n += 1;
                *last = v;
            }
            _ => out.push((v, 1, v)),
        }
    }
    out.into_iter().map(|(s, n, _)| (s / n as f64, n)).collect()
}

/// Deterministic pseudo-random unit directions in `ℝ^m`.
pub fn sample_directions(m: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let v: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 1e-3 {
                break v.into_iter().map(|x| x / n).collect();
            }
        })
        .collect()
}

/// Groups the eigenvalues of `A(ξ̂)` into direction-independent slopes.
pub fn eigenstructure(sym: &LeadingSymbol, directions: &[Vec<f64>]) -> Result<SymbolSpectrum> {
    if directions.len() < MIN_DIRECTIONS {
        return validation(format!("need at least {MIN_DIRECTIONS} directions, got {}", directions.len()));
    }
    let mut reference: Option<Vec<(f64, usize)>> = None;
    let mut samples: Vec<Vec<f64>> = Vec::with_capacity(directions.len());
    for dir in directions {
        let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if dir.len() != sym.m || !(n > 0.0) || !n.is_finite() {
            return validation("directions must be finite non-zero vectors of the symbol dimension");
        }
        let unit: Vec<f64> = dir.iter().map(|x| x / n).collect();
        let (vals, _) = hermitian_eigen(&sym.symbol(&unit));
        let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if vals[0] <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Ellipticity(format!(
                "symbol eigenvalue {:.3e} is not positive at direction {unit:?}",
                vals[0]
            )));
        }
        let groups = cluster(&vals, scale);
        match &reference {
            None => reference = Some(groups),
            Some(r) => {
                let same = r.len() == groups.len()
                    && r.iter().zip(&groups).all(|(a, b)| a.1 == b.1 && (a.0 - b.0).abs() <= CLUSTER_TOL * scale);
                if !same {
                    return Err(Error::Structure(format!(
                        "symbol eigenvalues depend on the direction (at {unit:?}); \
                         the operator is not of the constant-slope class"
                    )));
                }
            }
        }
        samples.push(vals);
    }
    let groups = reference.expect("at least one direction");
    let slopes: Vec<f64> = groups.iter().map(|g| g.0).collect();
    let multiplicities: Vec<usize> = groups.iter().map(|g| g.1).collect();
    let mut spread: f64 = 0.0;
    for vals in &samples {
        for &v in vals {
            let s = slopes[nearest(&slopes, v)];
            spread = spread.max((v - s).abs() / s);
        }
    }
    Ok(SymbolSpectrum { symbol: sym.clone(), slopes, multiplicities, spread })
}

/// `A₀ = (4π)^{−m/2} vol Σ d_i μ_i^{−m/2}`.
pub fn a0_coefficient(spec: &SymbolSpectrum, m: usize, vol: f64) -> f64 {
    let mh = m as f64 / 2.0;
    (4.0 * std::f64::consts::PI).powf(-mh)
        * vol
        * spec.slopes.iter().zip(&spec.multiplicities).map(|(mu, &d)| d as f64 * mu.powf(-mh)).sum::<f64>()
}

/// `Σ d_i (4πtμ_i)^{−m/2}` per unit volume.
pub fn u0_trace(spec: &SymbolSpectrum, m: usize, t: f64) -> Result<f64> {
    require_positive("t", t)?;
    let mh = m as f64 / 2.0;
    Ok(spec
        .slopes
        .iter()
        .zip(&spec.multiplicities)
        .map(|(mu, &d)| d as f64 * (4.0 * std::f64::consts::PI * t * mu).powf(-mh))
        .sum())
}

/// `|ξ|^{2(s−1)} Π_i(ξ̂)` as the Lagrange product `Π_{j≠i} (A(ξ) − μ_j|ξ|²)/(μ_i − μ_j)`.
fn lagrange_projector(spec: &SymbolSpectrum, i: usize, xi: &[f64]) -> CMat {
    let a = spec.symbol.symbol(xi);
    let r2: f64 = xi.iter().map(|x| x * x).sum();
    let d = spec.symbol.d;
    let mut out = identity(d);
    for (j, &mu_j) in spec.slopes.iter().enumerate() {
        if j != i {
            out *= (&a - identity(d) * c(mu_j * r2)) * c(1.0 / (spec.slopes[i] - mu_j));
        }
    }
    out
}

/// Gaussian averages `∫ dξ π^{−m/2} e^{−|ξ|²} Π_i(ξ̂)` by product Gauss–Hermite quadrature with `n` nodes per axis.
fn projector_averages(spec: &SymbolSpectrum, n: usize) -> Result<Vec<CMat>> {
    let m = spec.symbol.m;
    let d = spec.symbol.d;
    let k = spec.slopes.len() - 1;
    let rule = GaussHermite::new(n)?;
    let norm = std::f64::consts::PI.powf(-(m as f64) / 2.0);
    // E[|ξ|^{2k}] for the weight π^{−m/2} e^{−|ξ|²}
    let radial = (ln_gamma(m as f64 / 2.0 + k as f64) - ln_gamma(m as f64 / 2.0)).exp();
    let total = n.pow(m as u32);
    let mut out = vec![zeros(d); spec.slopes.len()];
    let mut xi = vec![0.0; m];
    for flat in 0..total {
        let mut rem = flat;
        let mut w = norm;
        for x in xi.iter_mut() {
            *x = rule.nodes[rem % n];
            w *= rule.weights[rem % n];
            rem /= n;
        }
        for (i, acc) in out.iter_mut().enumerate() {
            *acc += lagrange_projector(spec, i, &xi) * c(w / radial);
        }
    }
    Ok(out)
}

/// `H = −(4π)^{−m/2} Σ_i μ_i^{−m/2} ∫ dξ π^{−m/2} e^{−|ξ|²} Π_i(ξ̂)`.
pub fn h_endomorphism(sym: &LeadingSymbol, spec: &SymbolSpectrum) -> Result<CMat> {
    if sym != &spec.symbol {
        return validation("spectrum was computed for a different symbol");
    }
    let m = sym.m;
    let k = spec.slopes.len() - 1;
    // the integrand is a polynomial of degree 2k, integrated exactly once n > k
    let n = 2 * (k / 2 + 1);
    let coarse = projector_averages(spec, n)?;
    let fine = projector_averages(spec, n + 2)?;
    let defect = coarse.iter().zip(&fine).map(|(a, b)| max_abs(&(a - b))).fold(0.0, f64::max);
    if defect > 1e-10 {
        return Err(Error::Numeric(format!("projector averages did not converge (change {defect:.3e})")));
    }
    let mh = m as f64 / 2.0;
    let mut h = zeros(sym.d);
    for (avg, mu) in fine.iter().zip(&spec.slopes) {
        h += avg * c(mu.powf(-mh));
    }
    Ok(h * c(-(4.0 * std::f64::consts::PI).powf(-mh)))
}

/// `vol · tr(HQ)`, the potential channel of `A₂` on flat backgrounds.
pub fn a2_potential_part(h: &CMat, q: &CMat, vol: f64) -> Result<f64> {
    if h.shape() != q.shape() || !h.is_square() {
        return validation("H and Q must be square matrices of equal size");
    }
    Ok(vol * trace(&(h * q)).re)
}

/// `Σ_{n>Λ} e^{−a n²}`.
fn gaussian_tail(a: f64, cutoff: usize) -> f64 {
    let n = cutoff as f64 + 1.0;
    (-a * n * n).exp() / (1.0 - (-a * (2.0 * n + 1.0)).exp())
}

/// Discarded-tail bound of the box `|n_j| ≤ Λ` for `Σ_k tr e^{−t(A(k)+Q)}`.
fn lattice_tail_bound(spec: &SymbolSpectrum, q_norm: f64, periods: &[f64], t: f64, cutoff: usize) -> f64 {
    let mu_min = spec.slopes[0];
    let d = spec.symbol.d as f64;
    let a: Vec<f64> = periods.iter().map(|l| t * mu_min * (2.0 * std::f64::consts::PI / l).powi(2)).collect();
    let full: Vec<f64> = a.iter().map(|&aj| 1.0 + 2.0 * gaussian_tail(aj, 0)).collect();
    let mut s = 0.0;
    for j in 0..periods.len() {
        let rest: f64 = (0..periods.len()).filter(|&i| i != j).map(|i| full[i]).product();
        s += 2.0 * gaussian_tail(a[j], cutoff) * rest;
    }
    d * (t * q_norm).exp() * s
}

/// Exact heat trace `Σ_k tr exp(−t(A(k)+Q))` on the flat torus with the given periods.
///
/// With `cutoff = None` the smallest box meeting the tail target is used.
pub fn torus_oracle(spec: &SymbolSpectrum, q: &CMat, periods: &[f64], t: f64, cutoff: Option<usize>) -> Result<f64> {
    Ok(torus_oracle_trace(spec, q, periods, t, cutoff)?.value)
}

/// Lattice trace together with the box half-width used and its tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusOracleTrace {
    pub value: f64,
    pub tail_bound: f64,
    pub cutoff: usize,
}

pub fn torus_oracle_trace(
    spec: &SymbolSpectrum,
    q: &CMat,
    periods: &[f64],
    t: f64,
    cutoff: Option<usize>,
) -> Result<TorusOracleTrace> {
    require_positive("t", t)?;
    let sym = &spec.symbol;
    let m = sym.m;
    if periods.len() != m {
        return validation(format!("expected {m} periods, got {}", periods.len()));
    }
    for &l in periods {
        require_positive("period", l)?;
    }
    if q.shape() != (sym.d, sym.d) || !is_hermitian(q, 1e-12) {
        return validation("Q must be a Hermitian matrix of the fiber size");
    }
    let q_norm = q.norm();
    let lambda = match cutoff {
        Some(l) => {
            let bound = lattice_tail_bound(spec, q_norm, periods, t, l);
            if bound >= TAIL_TARGET {
                return validation(format!("cutoff {l} leaves a tail bound {bound:.3e} >= {TAIL_TARGET:e}"));
            }
            l
        }
        None => {
            let mut l = 0;
            while lattice_tail_bound(spec, q_norm, periods, t, l) >= TAIL_TARGET {
                l += 1;
                if (2 * l + 1).checked_pow(m as u32).is_none_or(|n| n > LATTICE_BUDGET) {
                    return Err(Error::Resource(format!(
                        "lattice tail bound below {TAIL_TARGET:e} needs more than {LATTICE_BUDGET} points"
                    )));
                }
            }
            l
        }
    };
    let side = 2 * lambda + 1;
    let total = side.checked_pow(m as u32).filter(|&n| n <= LATTICE_BUDGET).ok_or_else(|| {
        Error::Resource(format!("cutoff {lambda} exceeds the lattice budget of {LATTICE_BUDGET} points"))
    })?;
    let terms: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rem = flat;
            let k: Vec<f64> = periods
                .iter()
                .map(|l| {
                    let n = (rem % side) as f64 - lambda as f64;
                    rem /= side;
                    2.0 * std::f64::consts::PI * n / l
                })
                .collect();
            trace_exp_neg(&((sym.symbol(&k) + q) * c(t)))
        })
        .collect();
    Ok(TorusOracleTrace {
        value: terms.iter().sum(),
        tail_bound: lattice_tail_bound(spec, q_norm, periods, t, lambda),
        cutoff: lambda,
    })
}

/// `X^{μν}_{αβ} = −⅓ a^{λ(μ} R^{ν)}_{(α|λ|β)}`, indexed `[((μ m + ν) m + α) m + β]`.
///
/// `riemann(a, b, c, d)` returns `R^a_{bcd}` in an orthonormal frame.
pub fn x_tensor(sym: &LeadingSymbol, riemann: impl Fn(usize, usize, usize, usize) -> f64) -> Vec<CMat> {
    let m = sym.m;
    let mut out = Vec::with_capacity(m.pow(4));
    for mu in 0..m {
        for nu in 0..m {
            for al in 0..m {
                for be in 0..m {
                    let mut acc = zeros(sym.d);
                    for la in 0..m {
                        let w = riemann(nu, al, la, be) + riemann(nu, be, la, al);
                        let v = riemann(mu, al, la, be) + riemann(mu, be, la, al);
                        acc += sym.block(la, mu) * c(w) + sym.block(la, nu) * c(v);
                    }
                    out.push(acc * c(-1.0 / 12.0));
                }
            }
        }
    }
    out
}

/// `Y^μ_α = ⅔ a^{μλ} R_{λα} − ½ [ℛ_{αν}, a^{μν}]_+`, indexed `[μ m + α]`.
///
/// `curvature[α m + ν]` holds the bundle curvature `ℛ_{αν}`.
pub fn y_tensor(sym: &LeadingSymbol, ricci: &DVector<f64>, curvature: &[CMat]) -> Result<Vec<CMat>> {
    let m = sym.m;
    if ricci.len() != m * m || curvature.len() != m * m {
        return validation("Ricci tensor and curvature need m*m entries");
    }
    let mut out = Vec::with_capacity(m * m);
    for mu in 0..m {
        for al in 0..m {
            let mut acc = zeros(sym.d);
            for la in 0..m {
                acc += sym.block(mu, la) * c(2.0 / 3.0 * ricci[la * m + al]);
                let r = &curvature[al * m + la];
                acc -= (r * sym.block(mu, la) + sym.block(mu, la) * r) * c(0.5);
            }
            out.push(acc);
        }
    }
    Ok(out)
}
