//! The conjugated operator in normal coordinates and its Taylor-basis matrix elements.
//!
//! In the radial gauge with `Φ = Δ^{1/2}` and `G^{μν} = √g g^{μν}`,
//!
//! ```text
//! L f = −g^{μν} ∂_μ∂_ν f + β^ν ∂_ν f + γ f
//! u^μ = 2Φ G^{μν} ∂_νΦ + Φ² ∂_ν G^{νμ}
//! β^ν = −u^ν − 2 g^{μν} A_μ
//! γ   = −Φ ∂_μ(G^{μν} ∂_νΦ) − u^μ A_μ − g^{μν} ∂_μA_ν − g^{μν} A_μ A_ν + Q
//! ```

use crate::error::{validation, Error, Result};
use crate::linalg::{c, CMat};
use crate::tensorcalc::multi_index as mi;
use crate::tensorcalc::taylor::{MatPoly, Poly};
use crate::tensorcalc::{GeometryKind, ModelGeometry, PotentialJet, SymTensor};

/// Coefficient polynomials of the second-order operator `L`.
#[derive(Debug, Clone)]
pub struct ConjugatedOperator {
    m: usize,
    d: usize,
    deg: usize,
    alpha: Vec<MatPoly>,
    beta: Vec<MatPoly>,
    gamma: MatPoly,
}

impl ConjugatedOperator {
    pub fn build(geom: &ModelGeometry, pot: &PotentialJet, cutoff: usize) -> Result<Self> {
        let (m, d) = (geom.dim(), pot.fiber());
        if pot.dim() != m {
            return validation(format!("potential lives over dimension {}, geometry over {m}", pot.dim()));
        }
        if geom.cutoff() < cutoff || pot.cutoff() < cutoff && !pot.is_constant() {
            return validation(format!(
                "insufficient input cutoff: geometry {}, potential {}, requested {cutoff}",
                geom.cutoff(),
                pot.cutoff()
            ));
        }
        let deg = cutoff + 2;
        let trunc = |p: &Poly| p.resized(deg);
        let phi = trunc(geom.van_vleck_poly());
        let sqrt_det = trunc(geom.sqrt_det_poly());
        let ginv: Vec<Vec<Poly>> =
            (0..m).map(|i| (0..m).map(|j| trunc(&geom.inverse_metric_poly().entry_poly(i, j))).collect()).collect();
        let big_g: Vec<Vec<Poly>> = ginv.iter().map(|row| row.iter().map(|p| p.mul(&sqrt_det)).collect()).collect();
        let dphi: Vec<Poly> = (0..m).map(|i| phi.deriv(i)).collect();
        let phi2 = phi.mul(&phi);

        let u: Vec<Poly> = (0..m)
            .map(|mu| {
                let mut acc = Poly::zero(m, deg);
                for nu in 0..m {
                    acc = acc.add(&phi.mul(&big_g[mu][nu]).mul(&dphi[nu]).scale(2.0));
                    acc = acc.add(&phi2.mul(&big_g[nu][mu].deriv(nu)));
                }
                acc
            })
            .collect();
        let mut sigma = Poly::zero(m, deg);
        for mu in 0..m {
            for nu in 0..m {
                sigma = sigma.add(&big_g[mu][nu].mul(&dphi[nu]).deriv(mu));
            }
        }
        let sigma = phi.mul(&sigma).scale(-1.0);

        let conn = connection(geom, pot, deg)?;
        let id = CMat::identity(d, d);
        let alpha: Vec<MatPoly> =
            (0..m * m).map(|k| MatPoly::from_scalar(&ginv[k / m][k % m].scale(-1.0), &id)).collect();
        let beta: Vec<MatPoly> = (0..m)
            .map(|nu| {
                let mut acc = MatPoly::from_scalar(&u[nu].scale(-1.0), &id);
                if let Some(a) = &conn {
                    for mu in 0..m {
                        acc = acc.sub(&a[mu].mul_scalar_poly(&ginv[mu][nu]).scale(2.0));
                    }
                }
                acc
            })
            .collect();
        let mut gamma = MatPoly::from_scalar(&sigma, &id);
        if let Some(a) = &conn {
            for mu in 0..m {
                gamma = gamma.sub(&a[mu].mul_scalar_poly(&u[mu]));
                for nu in 0..m {
                    gamma = gamma.sub(&a[nu].deriv(mu).mul_scalar_poly(&ginv[mu][nu]));
                    gamma = gamma.sub(&a[mu].mul(&a[nu]).mul_scalar_poly(&ginv[mu][nu]));
                }
            }
        }
        let q = pot.series().to_poly(deg).resized(deg);
        gamma = gamma.add(&q);
        Ok(Self { m, d, deg, alpha, beta, gamma })
    }

    pub fn dim(&self) -> usize {
        self.m
    }
    pub fn fiber(&self) -> usize {
        self.d
    }
    pub fn degree_cap(&self) -> usize {
        self.deg
    }
    pub fn gamma(&self) -> &MatPoly {
        &self.gamma
    }

    /// `L f` by full polynomial products, truncated at the degree cap.
    pub fn apply(&self, f: &MatPoly) -> MatPoly {
        let f = f.resized(self.deg);
        let mut out = self.gamma.mul(&f);
        for nu in 0..self.m {
            let df = f.deriv(nu);
            out = out.add(&self.beta[nu].mul(&df));
            for mu in 0..self.m {
                out = out.add(&self.alpha[mu * self.m + nu].mul(&df.deriv(mu)));
            }
        }
        out
    }

    /// `L (x^counts)` by shifting the coefficient polynomials.
    fn apply_monomial(&self, counts: &[u8], scale: f64) -> MatPoly {
        let mut out = self.gamma.mul_monomial(counts, scale);
        for nu in 0..self.m {
            if counts[nu] == 0 {
                continue;
            }
            let mut d1 = counts.to_vec();
            d1[nu] -= 1;
            let s1 = scale * counts[nu] as f64;
            out = out.add(&self.beta[nu].mul_monomial(&d1, s1));
            for mu in 0..self.m {
                if d1[mu] == 0 {
                    continue;
                }
                let mut d2 = d1.clone();
                d2[mu] -= 1;
                out = out.add(&self.alpha[mu * self.m + nu].mul_monomial(&d2, s1 * d1[mu] as f64));
            }
        }
        out
    }
}

/// Radial-gauge connection one-form for a covariantly constant curvature.
fn connection(geom: &ModelGeometry, pot: &PotentialJet, deg: usize) -> Result<Option<Vec<MatPoly>>> {
    let Some(rc) = pot.curvature() else {
        return Ok(None);
    };
    let (m, d) = (geom.dim(), pot.fiber());
    let profile: Vec<f64> = match geom.kind() {
        GeometryKind::Flat | GeometryKind::Torus { .. } => vec![0.5],
        GeometryKind::Sphere { .. } if m <= 2 => {
            geom.sqrt_det_series().iter().enumerate().map(|(j, g)| g / (2.0 * j as f64 + 2.0)).collect()
        }
        GeometryKind::Sphere { .. } => {
            return Err(Error::Validation(
                "constant connection curvature on spheres is supported only for m <= 2".into(),
            ))
        }
    };
    let h = Poly::radial(m, deg, &profile);
    Ok(Some(
        (0..m)
            .map(|mu| {
                let mut acc = MatPoly::zero(m, d, deg);
                for nu in 0..m {
                    let x = Poly::variable(m, deg, nu).mul(&h);
                    acc = acc.sub(&MatPoly::from_scalar(&x, &rc[mu * m + nu]));
                }
                acc
            })
            .collect(),
    ))
}

/// Matrix elements `⟨m'|L|n⟩` for `m', n ≤ cutoff`.
#[derive(Debug, Clone)]
pub struct OperatorJet {
    m: usize,
    d: usize,
    cutoff: usize,
    table: Vec<Vec<SymTensor>>,
    operator: ConjugatedOperator,
    homogeneous: bool,
}

impl OperatorJet {
    pub fn dim(&self) -> usize {
        self.m
    }
    pub fn fiber(&self) -> usize {
        self.d
    }
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }
    /// `⟨row|L|col⟩`, a tensor with upper order `col` and lower order `row`.
    pub fn element(&self, row: usize, col: usize) -> &SymTensor {
        &self.table[row][col]
    }
    pub fn operator(&self) -> &ConjugatedOperator {
        &self.operator
    }
    /// Constant potential on a homogeneous model geometry.
    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }
}

pub fn build_operator_jet(geom: &ModelGeometry, pot: &PotentialJet, cutoff: usize) -> Result<OperatorJet> {
    let operator = ConjugatedOperator::build(geom, pot, cutoff)?;
    let (m, d) = (operator.m, operator.d);
    let mut table = vec![Vec::with_capacity(cutoff + 1); cutoff + 1];
    for n in 0..=cutoff {
        let gammas = mi::enumerate(m, n);
        let nfact = crate::special::factorial(n as u32);
        let images: Vec<MatPoly> = gammas.iter().map(|g| operator.apply_monomial(g, 1.0 / nfact)).collect();
        for (row, slot) in table.iter_mut().enumerate() {
            let mut t = SymTensor::zeros(m, d, n, row);
            for (gr, img) in images.iter().enumerate() {
                for (br, beta) in mi::enumerate(m, row).iter().enumerate() {
                    t.set(gr, br, img.coefficient(beta) * c(mi::factorial(beta)));
                }
            }
            if n > row + 2 && t.max_abs() != 0.0 {
                return Err(Error::Consistency(format!("matrix element <{row}|L|{n}> should vanish")));
            }
            slot.push(t);
        }
    }
    let homogeneous = pot.is_constant();
    Ok(OperatorJet { m, d, cutoff, table, operator, homogeneous })
}
