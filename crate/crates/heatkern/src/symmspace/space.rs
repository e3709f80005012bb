//! Algebraic data of compact symmetric spaces.

use nalgebra::{DMatrix, DVector};

use crate::error::{require_positive, validation, Error, Result};

/// Supported model spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetricFixture {
    S2,
    S3,
}

/// Curvature data `R_{abcd} = β_{ik} E^i_{ab} E^k_{cd}` and the derived Lie-algebra structure.
///
/// Indices `a, b, …` run over `0..m` (tangent) and `i, k, …` over `0..p` (holonomy).
/// In the combined index `A` the holonomy directions follow the tangent ones.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSpaceData {
    m: usize,
    p: usize,
    e: Vec<DMatrix<f64>>,
    beta: DMatrix<f64>,
    d_gen: Vec<DMatrix<f64>>,
    f_gen: Vec<DMatrix<f64>>,
    c_gen: Vec<DMatrix<f64>>,
    gamma: DMatrix<f64>,
    scalar_curvature: f64,
    r_group: f64,
    r_holonomy: f64,
}

fn levi_civita(i: usize, a: usize, b: usize) -> f64 {
    match (i, a, b) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

pub fn build_symmetric_space(fixture: SymmetricFixture, radius: f64) -> Result<SymmetricSpaceData> {
    require_positive("radius", radius)?;
    let inv_a2 = 1.0 / (radius * radius);
    match fixture {
        SymmetricFixture::S2 => {
            let e = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
            SymmetricSpaceData::new(vec![e], DMatrix::from_element(1, 1, inv_a2))
        }
        SymmetricFixture::S3 => {
            let e = (0..3).map(|i| DMatrix::from_fn(3, 3, |a, b| levi_civita(i, a, b))).collect();
            SymmetricSpaceData::new(e, DMatrix::identity(3, 3) * inv_a2)
        }
    }
}

impl SymmetricSpaceData {
    /// Derives `D_i`, `F^j_{ik}`, `C_A`, `γ_AB`, `R`, `R_G` and `R_H` from `E` and `β`.
    ///
    /// Fails with a structure error when the `D_i` are linearly dependent or do
    /// not close under commutation.
    pub fn new(e: Vec<DMatrix<f64>>, beta: DMatrix<f64>) -> Result<Self> {
        let p = e.len();
        if p == 0 {
            return validation("at least one holonomy generator is required");
        }
        let m = e[0].nrows();
        if m < 2 || e.iter().any(|x| x.nrows() != m || x.ncols() != m) {
            return validation("generators E^i must be square matrices of a common size m >= 2");
        }
        if e.iter().any(|x| (x + x.transpose()).amax() > 1e-12) {
            return validation("generators E^i must be antisymmetric");
        }
        if beta.nrows() != p || beta.ncols() != p || (&beta - beta.transpose()).amax() > 1e-12 {
            return validation("β must be a symmetric p×p matrix");
        }
        let beta_inv =
            beta.clone().cholesky().ok_or_else(|| Error::Validation("β must be positive definite".into()))?.inverse();

        let d_gen: Vec<DMatrix<f64>> =
            (0..p).map(|i| (0..p).fold(DMatrix::zeros(m, m), |acc, k| acc - &e[k] * beta[(i, k)])).collect();

        // F from the Gram system ⟨D_j, D_l⟩ F^j_{ik} = ⟨D_l, [D_i, D_k]⟩.
        let gram = DMatrix::from_fn(p, p, |j, l| d_gen[j].dot(&d_gen[l]));
        let gram_lu = gram.clone().lu();
        if gram.determinant().abs() < 1e-14 * gram.amax().powi(p as i32) {
            return Err(Error::Structure("holonomy generators D_i are linearly dependent".into()));
        }
        let mut f_gen = vec![DMatrix::zeros(p, p); p];
        for i in 0..p {
            for k in 0..p {
                let br = &d_gen[i] * &d_gen[k] - &d_gen[k] * &d_gen[i];
                let rhs = DVector::from_fn(p, |l, _| d_gen[l].dot(&br));
                let sol = gram_lu.solve(&rhs).ok_or_else(|| Error::Numeric("Gram solve failed".into()))?;
                let recon = (0..p).fold(DMatrix::zeros(m, m), |acc, j| acc + &d_gen[j] * sol[j]);
                if (&recon - &br).amax() > 1e-12 * br.amax().max(1.0) {
                    return Err(Error::Structure("holonomy generators do not close under commutation".into()));
                }
                for j in 0..p {
                    f_gen[i][(j, k)] = sol[j];
                }
            }
        }

        let n = m + p;
        let mut cst = vec![DMatrix::<f64>::zeros(n, n); n];
        for i in 0..p {
            for a in 0..m {
                for b in 0..m {
                    cst[m + i][(a, b)] = e[i][(a, b)];
                    cst[a][(m + i, b)] = d_gen[i][(a, b)];
                    cst[a][(b, m + i)] = -d_gen[i][(a, b)];
                }
            }
            for k in 0..p {
                for l in 0..p {
                    cst[m + i][(m + k, m + l)] = f_gen[k][(i, l)];
                }
            }
        }
        // (C_A)^B_C = C^B_{AC}
        let c_gen: Vec<DMatrix<f64>> = (0..n).map(|a| DMatrix::from_fn(n, n, |b, c| cst[b][(a, c)])).collect();

        let mut gamma = DMatrix::zeros(n, n);
        gamma.view_mut((0, 0), (m, m)).fill_with_identity();
        gamma.view_mut((m, m), (p, p)).copy_from(&beta);
        let mut gamma_inv = DMatrix::zeros(n, n);
        gamma_inv.view_mut((0, 0), (m, m)).fill_with_identity();
        gamma_inv.view_mut((m, m), (p, p)).copy_from(&beta_inv);

        let mut scalar_curvature = 0.0;
        for i in 0..p {
            for k in 0..p {
                scalar_curvature += beta[(i, k)] * e[i].dot(&e[k]);
            }
        }
        let mut r_group = 0.0;
        for a in 0..n {
            for b in 0..n {
                if gamma_inv[(a, b)] != 0.0 {
                    r_group -= 0.25 * gamma_inv[(a, b)] * (&c_gen[a] * &c_gen[b]).trace();
                }
            }
        }
        let mut r_holonomy = 0.0;
        for i in 0..p {
            for k in 0..p {
                r_holonomy -= 0.25 * beta_inv[(i, k)] * (&f_gen[i] * &f_gen[k]).trace();
            }
        }

        Ok(Self { m, p, e, beta, d_gen, f_gen, c_gen, gamma, scalar_curvature, r_group, r_holonomy })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn holonomy_dim(&self) -> usize {
        self.p
    }

    pub fn e(&self) -> &[DMatrix<f64>] {
        &self.e
    }

    pub fn beta(&self) -> &DMatrix<f64> {
        &self.beta
    }

    /// `(D_i)^a_b`.
    pub fn d_generators(&self) -> &[DMatrix<f64>] {
        &self.d_gen
    }

    /// `(F_i)^j_k = F^j_{ik}`.
    pub fn f_generators(&self) -> &[DMatrix<f64>] {
        &self.f_gen
    }

    /// `(C_A)^B_C = C^B_{AC}`.
    pub fn c_generators(&self) -> &[DMatrix<f64>] {
        &self.c_gen
    }

    pub fn structure_constant(&self, a: usize, b: usize, c: usize) -> f64 {
        self.c_gen[b][(a, c)]
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn scalar_curvature(&self) -> f64 {
        self.scalar_curvature
    }

    pub fn group_curvature(&self) -> f64 {
        self.r_group
    }

    pub fn holonomy_curvature(&self) -> f64 {
        self.r_holonomy
    }

    /// `R_{abcd} = β_{ik} E^i_{ab} E^k_{cd}`.
    pub fn riemann(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let mut s = 0.0;
        for i in 0..self.p {
            for k in 0..self.p {
                s += self.beta[(i, k)] * self.e[i][(a, b)] * self.e[k][(c, d)];
            }
        }
        s
    }

    /// `max |[C_A, C_B] − C^C_{AB} C_C|`.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.m + self.p;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let lhs = &self.c_gen[a] * &self.c_gen[b] - &self.c_gen[b] * &self.c_gen[a];
                let rhs =
                    (0..n).fold(DMatrix::zeros(n, n), |acc, c| acc + &self.c_gen[c] * self.structure_constant(c, a, b));
                worst = worst.max((lhs - rhs).amax());
            }
        }
        worst
    }

    /// `max |[D_i, D_k] − F^j_{ik} D_j|`.
    pub fn holonomy_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.p {
            for k in 0..self.p {
                let lhs = &self.d_gen[i] * &self.d_gen[k] - &self.d_gen[k] * &self.d_gen[i];
                let rhs = (0..self.p)
                    .fold(DMatrix::zeros(self.m, self.m), |acc, j| acc + &self.d_gen[j] * self.f_gen[i][(j, k)]);
                worst = worst.max((lhs - rhs).amax());
            }
        }
        worst
    }
}
