//! Least-squares extraction of expansion coefficients from sampled traces.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{validation, Error, Result};

const BOOTSTRAP_REPLICATES: usize = 200;
const BOOTSTRAP_SEED: u64 = 0x05ee_df17;

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub exponents: Vec<f64>,
    pub coefficients: Vec<f64>,
    /// Bootstrap standard deviations, one per coefficient.
    pub errors: Vec<f64>,
    /// Condition number of the column-scaled, weighted design matrix.
    pub condition: f64,
    /// Root-mean-square relative residual.
    pub rms_residual: f64,
}

/// Fits `trace(t) ≈ Σ_j c_j t^{e_j}` with relative weights `1/|trace|`.
///
/// Exponents must come from the menu `(j − m)/2`, `j = 0, 1, …`, and the
/// sample grid must be geometric with at least twice as many points as exponents.
pub fn fit_expansion(samples: &[(f64, f64)], m: usize, exponents: &[f64]) -> Result<FitResult> {
    let p = exponents.len();
    if p == 0 {
        return validation("need at least one exponent");
    }
    if samples.len() < 2 * p {
        return validation(format!("{} samples are fewer than twice the {p} exponents", samples.len()));
    }
    for &e in exponents {
        let j = 2.0 * e + m as f64;
        if j < -1e-12 || (j - j.round()).abs() > 1e-12 {
            return validation(format!("exponent {e} is not of the form (j - {m})/2 with j >= 0"));
        }
    }
    let mut pts = samples.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.iter().any(|&(t, y)| !(t > 0.0 && t.is_finite() && y.is_finite() && y != 0.0)) {
        return validation("samples need positive finite t and finite nonzero trace values");
    }
    let ratio = pts[1].0 / pts[0].0;
    if pts.windows(2).any(|w| ((w[1].0 / w[0].0) / ratio - 1.0).abs() > 1e-6) || ratio <= 1.0 {
        return validation("t-grid must be geometric and strictly increasing");
    }

    let n = pts.len();
    let mut design = DMatrix::<f64>::zeros(n, p);
    let mut rhs = DVector::<f64>::zeros(n);
    for (i, &(t, y)) in pts.iter().enumerate() {
        let w = 1.0 / y.abs();
        for (j, &e) in exponents.iter().enumerate() {
            design[(i, j)] = w * t.powf(e);
        }
        rhs[i] = w * y;
    }
    let scales: Vec<f64> = (0..p).map(|j| design.column(j).norm()).collect();
    for (j, s) in scales.iter().enumerate() {
        design.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > 1e12 {
        return Err(Error::Numeric(format!("ill-conditioned fit basis: condition number {condition:e}")));
    }
    let solve = |b: &DVector<f64>| -> Result<DVector<f64>> {
        svd.solve(b, 0.0).map_err(|e| Error::Numeric(format!("least-squares solve failed: {e}")))
    };
    let x = solve(&rhs)?;
    let fitted = &design * &x;
    let resid = &rhs - &fitted;
    let rms_residual = (resid.norm_squared() / n as f64).sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(BOOTSTRAP_SEED);
    let mut sums = vec![0.0; p];
    let mut sq = vec![0.0; p];
    for _ in 0..BOOTSTRAP_REPLICATES {
        let b = DVector::from_fn(n, |i, _| fitted[i] + resid[rng.gen_range(0..n)]);
        let xb = solve(&b)?;
        for j in 0..p {
            let v = xb[j] / scales[j];
            sums[j] += v;
            sq[j] += v * v;
        }
    }
    let r = BOOTSTRAP_REPLICATES as f64;
    let errors = (0..p).map(|j| ((sq[j] / r - (sums[j] / r).powi(2)).max(0.0)).sqrt()).collect();
    Ok(FitResult {
        exponents: exponents.to_vec(),
        coefficients: (0..p).map(|j| x[j] / scales[j]).collect(),
        errors,
        condition,
        rms_residual,
    })
}

/// `count` points geometrically spaced on `[start, stop]`.
pub fn geometric_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop >= start && count >= 1) {
        return validation(format!("invalid geometric grid [{start}, {stop}] with {count} points"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let r = (stop / start).ln() / (count - 1) as f64;
    Ok((0..count).map(|i| start * (r * i as f64).exp()).collect())
}
