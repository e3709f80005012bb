//! Potential and connection-curvature data of a Laplace-type operator.

use crate::error::{validation, Result};
use crate::linalg::{commutator, is_hermitian, max_abs, CMat};
use crate::tensorcalc::symtensor::SymTensor;
use crate::tensorcalc::taylor::TaylorSeries;

/// Jets of the endomorphism `Q` and a covariantly constant curvature `ℛ_{μν}`.
#[derive(Debug, Clone)]
pub struct PotentialJet {
    q: TaylorSeries,
    curvature: Option<Vec<CMat>>,
    constant: bool,
}

impl PotentialJet {
    /// Constant potential; jets beyond order 0 vanish.
    pub fn constant(m: usize, q: CMat, cutoff: usize) -> Result<Self> {
        let d = q.nrows();
        let mut components = vec![SymTensor::scalar(m, q)];
        components.extend((1..=cutoff).map(|n| SymTensor::zeros(m, d, 0, n)));
        Self::new(TaylorSeries::new(components)?)
    }

    pub fn new(q: TaylorSeries) -> Result<Self> {
        let q0 = q.components()[0].get(0, 0);
        if !crate::linalg::is_finite(q0) || !is_hermitian(q0, 1e-12) {
            return validation("Q at the base point must be a finite Hermitian endomorphism");
        }
        let constant = q.components()[1..].iter().all(|t| t.max_abs() == 0.0);
        Ok(Self { q, curvature: None, constant })
    }

    /// Attaches a constant curvature `ℛ_{μν}` given row-major as `m × m` blocks.
    pub fn with_curvature(mut self, blocks: Vec<CMat>) -> Result<Self> {
        let (m, d) = (self.q.dim(), self.q.fiber());
        if blocks.len() != m * m || blocks.iter().any(|b| b.shape() != (d, d)) {
            return validation(format!("curvature needs {m}x{m} blocks of size {d}x{d}"));
        }
        for mu in 0..m {
            for nu in 0..m {
                let b = &blocks[mu * m + nu];
                if max_abs(&(b + &blocks[nu * m + mu])) > 1e-12 {
                    return validation(format!("curvature not antisymmetric in ({mu}, {nu})"));
                }
                if max_abs(&(b + b.adjoint())) > 1e-12 {
                    return validation(format!("curvature block ({mu}, {nu}) is not anti-Hermitian"));
                }
            }
        }
        for a in &blocks {
            for b in &blocks {
                if max_abs(&commutator(a, b)) > 1e-12 {
                    return validation("curvature blocks must commute for a covariantly constant connection");
                }
            }
        }
        self.curvature = Some(blocks);
        Ok(self)
    }

    pub fn series(&self) -> &TaylorSeries {
        &self.q
    }
    pub fn curvature(&self) -> Option<&[CMat]> {
        self.curvature.as_deref()
    }
    pub fn cutoff(&self) -> usize {
        self.q.cutoff()
    }
    pub fn dim(&self) -> usize {
        self.q.dim()
    }
    pub fn fiber(&self) -> usize {
        self.q.fiber()
    }
    /// True when `Q` has no nonzero jets beyond order 0.
    pub fn is_constant(&self) -> bool {
        self.constant
    }
}
