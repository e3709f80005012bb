//! Exact spectra with analytic tail bounds.

use std::f64::consts::PI;

use crate::error::{require_positive, validation, Error, Result};
use crate::formfactors::PotentialMode;
use crate::linalg::{c, hermitian_eigen, max_abs, CMat};
use crate::special::erfc;

/// Boundary conditions for the interval `[0, L]`.
///
/// `Robin(S)` imposes `∂_N φ + S φ = 0` at both ends with the inward normal `N`,
/// so `S > 0` is attractive and produces negative eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntervalBc {
    DD,
    NN,
    DN,
    Robin(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelDescriptor {
    Interval { length: f64, bc: IntervalBc },
    Circle { length: f64 },
    Sphere { dim: usize, radius: f64 },
}

/// One distinct eigenvalue with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub eigenvalue: f64,
    pub multiplicity: u64,
}

/// Partial trace sum with the bound on what was left out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSum {
    pub value: f64,
    pub levels: usize,
    pub tail_bound: f64,
}

#[derive(Debug, Clone)]
pub struct SpectralModel {
    descriptor: ModelDescriptor,
    robin: Option<RobinSpectrum>,
}

impl SpectralModel {
    pub fn new(descriptor: ModelDescriptor) -> Result<Self> {
        let robin = match descriptor {
            ModelDescriptor::Interval { length, bc } => {
                require_positive("interval length", length)?;
                match bc {
                    IntervalBc::Robin(s) if !s.is_finite() => return validation("Robin constant must be finite"),
                    IntervalBc::Robin(s) if s != 0.0 => Some(RobinSpectrum::new(length, s)?),
                    _ => None,
                }
            }
            ModelDescriptor::Circle { length } => {
                require_positive("circle length", length)?;
                None
            }
            ModelDescriptor::Sphere { dim, radius } => {
                require_positive("sphere radius", radius)?;
                if !(dim == 2 || dim == 3) {
                    return validation(format!("sphere spectra are available for dimension 2 or 3, got {dim}"));
                }
                None
            }
        };
        Ok(Self { descriptor, robin })
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        self.descriptor
    }

    /// The `n`-th distinct level in nondecreasing order.
    pub fn level(&self, n: usize) -> Result<Level> {
        let nf = n as f64;
        Ok(match self.descriptor {
            ModelDescriptor::Interval { length, bc } => {
                let k = PI / length;
                let lam = match bc {
                    IntervalBc::DD => ((nf + 1.0) * k).powi(2),
                    IntervalBc::NN => (nf * k).powi(2),
                    IntervalBc::DN => ((nf + 0.5) * k).powi(2),
                    IntervalBc::Robin(_) => match &self.robin {
                        None => (nf * k).powi(2),
                        Some(r) => r.level(n)?,
                    },
                };
                Level { eigenvalue: lam, multiplicity: 1 }
            }
            ModelDescriptor::Circle { length } => {
                Level { eigenvalue: (2.0 * PI * nf / length).powi(2), multiplicity: if n == 0 { 1 } else { 2 } }
            }
            ModelDescriptor::Sphere { dim, radius } => {
                let a2 = radius * radius;
                if dim == 2 {
                    Level { eigenvalue: nf * (nf + 1.0) / a2, multiplicity: 2 * n as u64 + 1 }
                } else {
                    Level { eigenvalue: nf * (nf + 2.0) / a2, multiplicity: (n as u64 + 1).pow(2) }
                }
            }
        })
    }

    pub fn levels(&self) -> impl Iterator<Item = Result<Level>> + '_ {
        (0..).map(move |n| self.level(n))
    }

    /// Upper bound on `Σ_{j ≥ n} mult_j e^{−tλ_j}`; infinite where no bound is available yet.
    pub fn tail_bound(&self, t: f64, n: usize) -> f64 {
        let nf = n as f64;
        match self.descriptor {
            ModelDescriptor::Interval { length, bc } => {
                let cc = t * (PI / length).powi(2);
                let start = match bc {
                    IntervalBc::DD => nf + 1.0,
                    IntervalBc::NN => nf,
                    IntervalBc::DN => nf + 0.5,
                    IntervalBc::Robin(_) => match &self.robin {
                        None => nf,
                        Some(r) => return r.tail_bound(t, n),
                    },
                };
                gaussian_tail(cc, start)
            }
            ModelDescriptor::Circle { length } => {
                let cc = t * (2.0 * PI / length).powi(2);
                if n == 0 {
                    1.0 + 2.0 * gaussian_tail(cc, 1.0)
                } else {
                    2.0 * gaussian_tail(cc, nf)
                }
            }
            ModelDescriptor::Sphere { dim, radius } => {
                let cc = t / (radius * radius);
                if dim == 2 {
                    if cc * (2.0 * nf + 1.0).powi(2) <= 2.0 {
                        return f64::INFINITY;
                    }
                    (2.0 * nf + 1.0) * (-cc * nf * (nf + 1.0)).exp() + (-cc * nf * (nf + 1.0)).exp() / cc
                } else {
                    let p = nf + 1.0;
                    if cc * p * p <= 1.0 {
                        return f64::INFINITY;
                    }
                    let head = p * p * (-cc * (p * p - 1.0)).exp();
                    let integral = cc.exp()
                        * (p * (-cc * p * p).exp() / (2.0 * cc)
                            + PI.sqrt() * erfc(cc.sqrt() * p) / (4.0 * cc.powf(1.5)));
                    head + integral
                }
            }
        }
    }

    /// `Σ mult e^{−tλ}` summed until the tail bound drops below `tol`.
    pub fn trace(&self, t: f64, tol: f64) -> Result<TraceSum> {
        require_positive("t", t)?;
        let mut value = 0.0;
        for n in 0..50_000_000usize {
            let bound = self.tail_bound(t, n);
            if bound < tol {
                return Ok(TraceSum { value, levels: n, tail_bound: bound });
            }
            let lvl = self.level(n)?;
            value += lvl.multiplicity as f64 * (-t * lvl.eigenvalue).exp();
        }
        Err(Error::Resource(format!("trace at t = {t} did not reach tail bound {tol:e}")))
    }

    /// `Σ_{j < n} mult_j e^{−tλ_j}`.
    pub fn partial_sum(&self, t: f64, n: usize) -> Result<f64> {
        let mut value = 0.0;
        for j in 0..n {
            let lvl = self.level(j)?;
            value += lvl.multiplicity as f64 * (-t * lvl.eigenvalue).exp();
        }
        Ok(value)
    }
}

/// Bound on `Σ_{j≥0} e^{−c (x0 + j)²}` for `x0 ≥ 0`.
fn gaussian_tail(c: f64, x0: f64) -> f64 {
    (-c * x0 * x0).exp() + 0.5 * (PI / c).sqrt() * erfc(x0 * c.sqrt())
}

/// Robin spectrum on `[0, L]` with equal constants at both ends.
///
/// Positive eigenvalues `k²` solve `kL + 2 atan(S/k) = jπ`; each root lies
/// between consecutive Neumann and Dirichlet values. Negative eigenvalues
/// `−κ²` come from `κ tanh(κL/2) = S` (even) and `κ coth(κL/2) = S` (odd).
#[derive(Debug, Clone)]
struct RobinSpectrum {
    length: f64,
    s: f64,
    negatives: Vec<f64>,
    first_phase: usize,
}

impl RobinSpectrum {
    fn new(length: f64, s: f64) -> Result<Self> {
        let mut negatives = Vec::new();
        let critical = 2.0 / length;
        let first_phase;
        if s > 0.0 {
            let even = bisect(
                |k| k * (0.5 * k * length).tanh() - s,
                0.0,
                expand(|k| k * (0.5 * k * length).tanh() - s, s + critical),
            )?;
            negatives.push(-even * even);
            if s > critical {
                let odd = bisect(|k| k / (0.5 * k * length).tanh() - s, 1e-300, s)?;
                negatives.push(-odd * odd);
                first_phase = 2;
            } else if s == critical {
                negatives.push(0.0);
                first_phase = 2;
            } else {
                first_phase = 1;
            }
        } else {
            first_phase = 0;
        }
        Ok(Self { length, s, negatives, first_phase })
    }

    fn phase(&self, k: f64) -> f64 {
        k * self.length + 2.0 * (self.s / k).atan()
    }

    fn positive_root(&self, j: usize) -> Result<f64> {
        let step = PI / self.length;
        let jf = j as f64;
        let (lo, hi) = if self.s < 0.0 { (jf * step, (jf + 1.0) * step) } else { ((jf - 1.0) * step, jf * step) };
        let target = jf * PI;
        let lo = if lo <= 0.0 { 1e-9 * step } else { lo };
        let f = |k: f64| self.phase(k) - target;
        if f(lo) > 0.0 {
            return Err(Error::Numeric(format!("Robin bracket for phase {j} does not straddle a root")));
        }
        bisect(f, lo, hi)
    }

    fn level(&self, n: usize) -> Result<f64> {
        if n < self.negatives.len() {
            return Ok(self.negatives[n]);
        }
        let j = self.first_phase + n - self.negatives.len();
        let k = self.positive_root(j)?;
        let residual = (self.phase(k) - j as f64 * PI).abs();
        if residual > 1e-12 * (1.0 + j as f64 * PI) {
            return Err(Error::Numeric(format!("Robin root {j} residual {residual:e}")));
        }
        Ok(k * k)
    }

    fn tail_bound(&self, t: f64, n: usize) -> f64 {
        let cc = t * (PI / self.length).powi(2);
        if n < self.negatives.len() {
            let neg: f64 = self.negatives[n..].iter().map(|l| (-t * l).exp()).sum();
            return neg + self.tail_bound(t, self.negatives.len());
        }
        let j = self.first_phase + n - self.negatives.len();
        let start = if self.s < 0.0 { j as f64 } else { (j as f64 - 1.0).max(0.0) };
        gaussian_tail(cc, start)
    }
}

fn expand(f: impl Fn(f64) -> f64, mut hi: f64) -> f64 {
    while f(hi) <= 0.0 {
        hi *= 2.0;
    }
    hi
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::Numeric(format!("bisection bracket [{lo}, {hi}] does not enclose a sign change")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `Tr e^{−tΔ}` on an interval, summed to an absolute tail bound of `1e−15`.
pub fn interval_trace(length: f64, bc: IntervalBc, t: f64) -> Result<f64> {
    Ok(SpectralModel::new(ModelDescriptor::Interval { length, bc })?.trace(t, 1e-15)?.value)
}

/// `Tr e^{−tΔ}` on a circle.
pub fn circle_trace(length: f64, t: f64) -> Result<f64> {
    Ok(SpectralModel::new(ModelDescriptor::Circle { length })?.trace(t, 1e-15)?.value)
}

/// `Tr e^{−tΔ}` on the round sphere `S^m`, `m ∈ {2, 3}`, tail bound below `1e−14`.
pub fn sphere_trace(m: usize, radius: f64, t: f64) -> Result<f64> {
    Ok(SpectralModel::new(ModelDescriptor::Sphere { dim: m, radius })?.trace(t, 1e-14)?.value)
}

/// Landau trace per unit area, `(B/2π) Σ_n e^{−tB(2n+1)} = (B/4π)/sinh(tB)`.
pub fn landau_trace_density(b: f64, t: f64) -> Result<f64> {
    require_positive("field strength", b)?;
    require_positive("t", t)?;
    Ok(b / (4.0 * PI) / (t * b).sinh())
}

/// Direct level sum of the Landau trace density.
pub fn landau_direct_sum(b: f64, t: f64) -> Result<f64> {
    require_positive("field strength", b)?;
    require_positive("t", t)?;
    let mut sum = 0.0;
    for n in 0..10_000_000u64 {
        let term = (-t * b * (2.0 * n as f64 + 1.0)).exp();
        // Remaining geometric tail: term · 1/(1 − e^{−2tB}).
        if term / (-(-2.0 * t * b).exp_m1()) < 1e-17 * sum {
            break;
        }
        sum += term;
    }
    Ok(b / (2.0 * PI) * sum)
}

/// Fourier-truncated trace of `exp(−t(−Δ + Q))` on a flat torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPotentialTrace {
    pub value: f64,
    pub tail_bound: f64,
    pub basis_size: usize,
}

/// Largest Fourier basis accepted by [`torus_potential_trace`].
pub const FOURIER_BUDGET: usize = 4096;

pub fn torus_potential_trace(
    periods: &[f64],
    fiber: usize,
    modes: &[PotentialMode],
    cutoff: usize,
    t: f64,
) -> Result<TorusPotentialTrace> {
    require_positive("t", t)?;
    let m = periods.len();
    if m == 0 {
        return validation("torus needs at least one period");
    }
    for &p in periods {
        require_positive("torus period", p)?;
    }
    let side = 2 * cutoff + 1;
    let points = side.checked_pow(m as u32).unwrap_or(usize::MAX);
    let size = points.saturating_mul(fiber);
    if size > FOURIER_BUDGET {
        return Err(Error::Resource(format!("Fourier basis of size {size} exceeds budget {FOURIER_BUDGET}")));
    }
    // Frobenius norms bound the operator norm of the multiplication by Q.
    let qnorm: f64 = modes.iter().map(|p| p.amplitude.norm()).sum();
    let totals: Vec<f64> =
        periods.iter().map(|&l| 1.0 + 2.0 * gaussian_tail(t * (2.0 * PI / l).powi(2), 1.0)).collect();
    let free_tail: f64 = periods
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            let outside = 2.0 * gaussian_tail(t * (2.0 * PI / l).powi(2), cutoff as f64 + 1.0);
            outside * totals.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, v)| v).product::<f64>()
        })
        .sum();
    let tail_bound = fiber as f64 * free_tail * (t * qnorm).exp();
    if tail_bound >= 1e-10 {
        return validation(format!("Fourier cutoff {cutoff} leaves tail bound {tail_bound:e} >= 1e-10"));
    }
    let lattice: Vec<Vec<i64>> = (0..points)
        .map(|mut idx| {
            (0..m)
                .map(|_| {
                    let v = (idx % side) as i64 - cutoff as i64;
                    idx /= side;
                    v
                })
                .collect()
        })
        .collect();
    let position = |n: &[i64]| -> Option<usize> {
        let mut idx = 0usize;
        for j in (0..m).rev() {
            let v = n[j] + cutoff as i64;
            if v < 0 || v >= side as i64 {
                return None;
            }
            idx = idx * side + v as usize;
        }
        Some(idx)
    };
    let mut h = CMat::zeros(size, size);
    for (i, n) in lattice.iter().enumerate() {
        let k2: f64 = n.iter().zip(periods).map(|(&v, &l)| (2.0 * PI * v as f64 / l).powi(2)).sum();
        for a in 0..fiber {
            h[(i * fiber + a, i * fiber + a)] += c(k2);
        }
        for mode in modes {
            if mode.index.len() != m || mode.amplitude.shape() != (fiber, fiber) {
                return validation("potential mode shape does not match the torus");
            }
            let target: Vec<i64> = n.iter().zip(&mode.index).map(|(x, p)| x + p).collect();
            if let Some(j) = position(&target) {
                for a in 0..fiber {
                    for b in 0..fiber {
                        h[(j * fiber + a, i * fiber + b)] += mode.amplitude[(a, b)];
                    }
                }
            }
        }
    }
    if max_abs(&(&h - h.adjoint())) > 1e-12 {
        return validation("potential modes do not form a Hermitian operator");
    }
    let eig: Vec<f64> = if h.iter().all(|z| z.im == 0.0) {
        nalgebra::SymmetricEigen::new(h.map(|z| z.re)).eigenvalues.iter().copied().collect()
    } else {
        hermitian_eigen(&h).0
    };
    let mut terms: Vec<f64> = eig.iter().map(|&l| (-t * l).exp()).collect();
    terms.sort_by(f64::total_cmp);
    Ok(TorusPotentialTrace { value: terms.iter().sum(), tail_bound, basis_size: size })
}

/// Coefficient of `q²` in `T(q)` from the even part `(T(q)+T(−q)−2T(0))/2`,
/// Richardson-extrapolated between `q` and `2q`.
pub fn quadratic_part(trace_at: impl Fn(f64) -> Result<f64>, q: f64) -> Result<f64> {
    let t0 = trace_at(0.0)?;
    let even = |x: f64| -> Result<f64> { Ok(0.5 * (trace_at(x)? + trace_at(-x)? - 2.0 * t0)) };
    let (s1, s2) = (even(q)?, even(2.0 * q)?);
    Ok((16.0 * s1 - s2) / (12.0 * q * q))
}
