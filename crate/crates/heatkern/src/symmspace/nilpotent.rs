//! Heat-trace density for a covariantly constant field strength on flat space.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{require_positive, validation, Result};
use crate::linalg::{is_hermitian, trace_exp_neg, CMat};

/// Constant curvature 2-form `R̂` (real antisymmetric, fiber-scalar) and constant potential `Q`.
///
/// The bundle curvature is `ℛ = i R̂`, so a magnetic field `B` in the plane has
/// `R̂ = [[0, B], [−B, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantFieldStrength {
    rhat: DMatrix<f64>,
    q: CMat,
}

impl ConstantFieldStrength {
    pub fn new(rhat: DMatrix<f64>, q: CMat) -> Result<Self> {
        if !rhat.is_square() || rhat.nrows() == 0 {
            return validation("field strength must be a non-empty square matrix");
        }
        let scale = rhat.amax().max(1.0);
        if (&rhat + rhat.transpose()).amax() > 1e-12 * scale {
            return validation("field strength must be antisymmetric");
        }
        if !q.is_square() || q.nrows() == 0 || !is_hermitian(&q, 1e-12) {
            return validation("potential must be a non-empty Hermitian matrix");
        }
        if rhat.iter().chain(q.iter().map(|z| &z.re)).any(|x| !x.is_finite()) {
            return validation("field strength and potential must be finite");
        }
        Ok(Self { rhat, q })
    }

    /// Block-diagonal field with one `2×2` block per entry of `fields`.
    pub fn blocks(fields: &[f64], q: CMat) -> Result<Self> {
        let m = 2 * fields.len();
        let mut rhat = DMatrix::zeros(m, m);
        for (j, &b) in fields.iter().enumerate() {
            rhat[(2 * j, 2 * j + 1)] = b;
            rhat[(2 * j + 1, 2 * j)] = -b;
        }
        Self::new(rhat, q)
    }

    pub fn dim(&self) -> usize {
        self.rhat.nrows()
    }

    pub fn field(&self) -> &DMatrix<f64> {
        &self.rhat
    }

    pub fn potential(&self) -> &CMat {
        &self.q
    }

    /// The frequencies `B_j ≥ 0` of the pairs `±iB_j`, one per pair.
    pub fn frequencies(&self) -> Vec<f64> {
        let gram = self.rhat.transpose() * &self.rhat;
        let mut ev: Vec<f64> = SymmetricEigen::new(gram).eigenvalues.iter().map(|x| x.max(0.0).sqrt()).collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        // Each pair ±iB_j contributes B_j twice to the singular values.
        ev.into_iter().step_by(2).take(self.dim() / 2).collect()
    }
}

/// `x / sinh x`, even in `x`.
pub(crate) fn x_over_sinh(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-4 {
        1.0 - x * x / 6.0
    } else if x > 700.0 {
        2.0 * x * (-x).exp()
    } else {
        x / x.sinh()
    }
}

/// `(4πt)^{−m/2} tr e^{−tQ} Π_j tB_j / sinh(tB_j)`.
pub fn nilpotent_trace_density(fs: &ConstantFieldStrength, t: f64) -> Result<f64> {
    require_positive("t", t)?;
    let m = fs.dim() as f64;
    let det: f64 = fs.frequencies().iter().map(|&b| x_over_sinh(t * b)).product();
    let fiber = trace_exp_neg(&(&fs.q * crate::linalg::c(t)));
    Ok((4.0 * std::f64::consts::PI * t).powf(-m / 2.0) * fiber * det)
}
