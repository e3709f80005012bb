//! Solution of the transport recursion `(1 + D/k) a_k = L a_{k−1}` in the Taylor basis.

use crate::error::{validation, Result};
use crate::hmds::jet::OperatorJet;
use crate::linalg::CMat;
use crate::special::binomial;
use crate::tensorcalc::{inner_product, SymTensor, TaylorSeries};

/// `a_k` as Taylor data at the base point.
#[derive(Debug, Clone)]
pub struct HmdsCoefficient {
    pub order: usize,
    /// `⟨n|a_k⟩` for `n` up to the largest order the recursion could resolve.
    pub series: TaylorSeries,
    /// `⟨0|a_k⟩`, the coincidence-limit value.
    pub diagonal: CMat,
    pub homogeneous: bool,
}

/// `D_k^{-1}`: scales component `n` by `k/(k+n)`.
pub fn dk_inverse(k: i64, f: &TaylorSeries) -> Result<TaylorSeries> {
    if k <= 0 {
        return validation(format!("dk_inverse needs k >= 1, got {k}"));
    }
    let comps = f.components().iter().enumerate().map(|(n, t)| t.scale(k as f64 / (k as f64 + n as f64))).collect();
    TaylorSeries::new(comps)
}

/// Applies the jet to a series: `⟨n|L f⟩ = Σ_j ⟨n|L|j⟩ ⋆ ⟨j|f⟩` for `n ≤ rows`.
fn apply_jet(jet: &OperatorJet, f: &TaylorSeries, rows: usize) -> Result<TaylorSeries> {
    let comps = (0..=rows)
        .map(|n| {
            let mut acc = SymTensor::zeros(jet.dim(), jet.fiber(), 0, n);
            for j in 0..=(n + 2).min(f.cutoff()) {
                acc = acc.add(&inner_product(jet.element(n, j), &f.components()[j])?)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    TaylorSeries::new(comps)
}

/// Coefficients `a_0..=a_kmax`, each resolved at least through order `cutoff`.
pub fn hmds_coefficients(jet: &OperatorJet, kmax: usize, cutoff: usize) -> Result<Vec<HmdsCoefficient>> {
    let capacity = cutoff + 2 * kmax;
    if capacity > jet.cutoff() {
        return validation(format!(
            "cutoff {cutoff} with kmax {kmax} needs jet capacity {capacity}, jet has {}",
            jet.cutoff()
        ));
    }
    let (m, d) = (jet.dim(), jet.fiber());
    let mut a0 = TaylorSeries::zero(m, d, capacity);
    let mut comps = a0.components().to_vec();
    comps[0] = SymTensor::scalar(m, CMat::identity(d, d));
    a0 = TaylorSeries::new(comps)?;
    let mut out = vec![HmdsCoefficient {
        order: 0,
        diagonal: CMat::identity(d, d),
        series: a0,
        homogeneous: jet.is_homogeneous(),
    }];
    for k in 1..=kmax {
        let rows = cutoff + 2 * (kmax - k);
        let la = apply_jet(jet, &out[k - 1].series, rows)?;
        let ak = dk_inverse(k as i64, &la)?;
        out.push(HmdsCoefficient {
            order: k,
            diagonal: ak.components()[0].get(0, 0).clone(),
            series: ak,
            homogeneous: jet.is_homogeneous(),
        });
    }
    Ok(out)
}

/// Largest Taylor-component residual of `(1 + D/k) a_k − L a_{k−1}` per order `k ≥ 1`,
/// evaluated through polynomial arithmetic independent of the jet table.
pub fn recursion_residuals(jet: &OperatorJet, coeffs: &[HmdsCoefficient]) -> Vec<f64> {
    let op = jet.operator();
    coeffs
        .windows(2)
        .map(|w| {
            let (prev, cur) = (&w[0], &w[1]);
            let deg = op.degree_cap().max(prev.series.cutoff());
            let lhs = {
                let p = cur.series.to_poly(deg);
                p.add(&p.euler().scale(1.0 / cur.order as f64))
            };
            let rhs = op.apply(&prev.series.to_poly(deg));
            let top = cur.series.cutoff();
            let diff = TaylorSeries::from_poly(&lhs.resized(top).sub(&rhs.resized(top)), top);
            diff.components().iter().fold(0.0f64, |acc, t| acc.max(t.max_abs()))
        })
        .collect()
}

/// `b_k(λ) = Σ_n C(k,n) (−λ)^{k−n} a_n`.
pub fn b_lambda(k: usize, lambda: f64, coeffs: &[HmdsCoefficient]) -> Result<TaylorSeries> {
    for n in 0..=k {
        if coeffs.get(n).map(|a| a.order) != Some(n) {
            return validation(format!("b_lambda({k}) needs coefficient a_{n}"));
        }
    }
    let cutoff = coeffs[..=k].iter().map(|a| a.series.cutoff()).min().unwrap_or(0);
    let (m, d) = (coeffs[0].series.dim(), coeffs[0].series.fiber());
    let mut acc = TaylorSeries::zero(m, d, cutoff);
    for (n, a) in coeffs[..=k].iter().enumerate() {
        let w = binomial(k, n) as f64 * (-lambda).powi((k - n) as i32);
        let comps = acc
            .components()
            .iter()
            .zip(a.series.truncated(cutoff).components())
            .map(|(x, y)| x.add(&y.scale(w)))
            .collect::<Result<Vec<_>>>()?;
        acc = TaylorSeries::new(comps)?;
    }
    Ok(acc)
}
