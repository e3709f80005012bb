use heatkern::linalg::{c, CMat};
use heatkern::spectra::{fit_expansion, geometric_grid, landau_direct_sum, landau_trace_density, sphere_trace};
use heatkern::symmspace::{
    build_symmetric_space, nilpotent_trace_density, theta_quadrature, theta_series, theta_t_max, ConstantFieldStrength,
    SymmetricFixture, SymmetricSpaceData, MAX_THETA_ORDER,
};
use heatkern::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn scalar(q: f64) -> CMat {
    CMat::from_element(1, 1, c(q))
}

fn kron(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

#[test]
fn flat_nilpotent_density_is_free() {
    for m in [2, 4, 6] {
        let fs = ConstantFieldStrength::new(DMatrix::zeros(m, m), scalar(0.0)).unwrap();
        for t in [1e-3, 0.5, 4.0] {
            let expect = (4.0 * PI * t).powf(-(m as f64) / 2.0);
            let v = nilpotent_trace_density(&fs, t).unwrap();
            assert!((v - expect).abs() < 1e-14 * expect);
        }
    }
}

#[test]
fn planar_field_matches_landau_levels() {
    for b in [0.1, 1.0, 7.5] {
        let fs = ConstantFieldStrength::blocks(&[b], scalar(0.0)).unwrap();
        for step in 1..=60 {
            let t = 3.0 / b * step as f64 / 60.0;
            let v = nilpotent_trace_density(&fs, t).unwrap();
            let det = (4.0 * PI * t).recip() * (t * b) / (t * b).sinh();
            let closed = landau_trace_density(b, t).unwrap();
            let direct = landau_direct_sum(b, t).unwrap();
            assert!((v - det).abs() < 1e-13 * det);
            assert!((v - closed).abs() < 1e-10 * closed, "B={b} t={t}");
            assert!((v - direct).abs() < 1e-10 * direct, "B={b} t={t}: {v} vs {direct}");
        }
    }
}

#[test]
fn four_dimensional_field_factorizes() {
    let (b1, b2) = (0.8, 2.3);
    let q = CMat::from_row_slice(2, 2, &[c(0.5), Complex64::new(0.1, 0.2), Complex64::new(0.1, -0.2), c(-0.3)]);
    let fs = ConstantFieldStrength::blocks(&[b1, b2], q.clone()).unwrap();
    let (ev, _) = heatkern::linalg::hermitian_eigen(&q);
    for t in [0.05, 0.3, 1.0] {
        let tr_q: f64 = ev.iter().map(|l| (-t * l).exp()).sum();
        let expect = landau_direct_sum(b1, t).unwrap() * landau_direct_sum(b2, t).unwrap() * tr_q;
        let v = nilpotent_trace_density(&fs, t).unwrap();
        assert!((v - expect).abs() < 1e-10 * expect, "t={t}");
    }
}

#[test]
fn rotated_field_has_same_density() {
    let b = 1.7;
    let th: f64 = 0.4;
    let rot = DMatrix::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
    let mut rhat4 = DMatrix::zeros(4, 4);
    rhat4[(0, 2)] = b;
    rhat4[(2, 0)] = -b;
    let mut orth = DMatrix::identity(4, 4);
    orth.view_mut((1, 1), (2, 2)).copy_from(&rot);
    let turned = &orth * &rhat4 * orth.transpose();
    let a = ConstantFieldStrength::new(rhat4, scalar(0.0)).unwrap();
    let bfs = ConstantFieldStrength::new(turned, scalar(0.0)).unwrap();
    for t in [0.1, 1.0] {
        let (x, y) = (nilpotent_trace_density(&a, t).unwrap(), nilpotent_trace_density(&bfs, t).unwrap());
        assert!((x - y).abs() < 1e-12 * x);
    }
}

#[test]
fn field_strength_validation() {
    let sym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    assert!(matches!(ConstantFieldStrength::new(sym, scalar(0.0)), Err(Error::Validation(_))));
    let skew_q = CMat::from_element(1, 1, Complex64::new(0.0, 1.0));
    assert!(ConstantFieldStrength::blocks(&[1.0], skew_q).is_err());
    let fs = ConstantFieldStrength::blocks(&[1.0], scalar(0.0)).unwrap();
    assert!(matches!(nilpotent_trace_density(&fs, 0.0), Err(Error::Validation(_))));
    assert!(nilpotent_trace_density(&fs, -1.0).is_err());
}

#[test]
fn sphere_fixtures_have_expected_curvatures() {
    let s2 = build_symmetric_space(SymmetricFixture::S2, 1.0).unwrap();
    assert_eq!((s2.dim(), s2.holonomy_dim()), (2, 1));
    assert!(s2.f_generators()[0].amax() == 0.0);
    assert!((s2.scalar_curvature() - 2.0).abs() < 1e-14);
    assert!(s2.holonomy_curvature().abs() < 1e-14);
    assert_eq!(s2.jacobi_residual(), 0.0);

    let s3 = build_symmetric_space(SymmetricFixture::S3, 1.0).unwrap();
    assert_eq!((s3.dim(), s3.holonomy_dim()), (3, 3));
    assert!((s3.scalar_curvature() - 6.0).abs() < 1e-13);

    // R_H = −¼ β^{ik} F^j_{il} F^l_{kj} from the bracket table, recomputed here.
    let mut rh = 0.0;
    let binv = s3.beta().clone().try_inverse().unwrap();
    let f = |j: usize, i: usize, k: usize| s3.f_generators()[i][(j, k)];
    for i in 0..3 {
        for k in 0..3 {
            for j in 0..3 {
                for l in 0..3 {
                    rh -= 0.25 * binv[(i, k)] * f(j, i, l) * f(l, k, j);
                }
            }
        }
    }
    assert!((s3.holonomy_curvature() - rh).abs() < 1e-13);
    assert!((rh - 1.5).abs() < 1e-12);
}

#[test]
fn riemann_tensor_reproduces_round_sphere() {
    for (fixture, m) in [(SymmetricFixture::S2, 2), (SymmetricFixture::S3, 3)] {
        for a in [0.5, 1.0, 2.0] {
            let s = build_symmetric_space(fixture, a).unwrap();
            let k = 1.0 / (a * a);
            let mut ricci_trace = 0.0;
            for i in 0..m {
                for j in 0..m {
                    for p in 0..m {
                        for q in 0..m {
                            let expect = k * (kron(i, p) * kron(j, q) - kron(i, q) * kron(j, p));
                            assert!((s.riemann(i, j, p, q) - expect).abs() < 1e-14);
                        }
                    }
                    ricci_trace += s.riemann(i, j, i, j);
                }
            }
            assert!((s.scalar_curvature() - ricci_trace).abs() < 1e-12);
            assert!((s.scalar_curvature() - (m * (m - 1)) as f64 * k).abs() < 1e-12);
        }
    }
}

/// Brute-force `[C_A, C_B] = C^C_{AB} C_C` and `[D_i, D_k] = F^j_{ik} D_j`.
fn bracket_residuals(s: &SymmetricSpaceData) -> (f64, f64) {
    let n = s.dim() + s.holonomy_dim();
    let cg = s.c_generators();
    let mut jac: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for r in 0..n {
                for col in 0..n {
                    let mut lhs = 0.0;
                    for e in 0..n {
                        lhs += cg[a][(r, e)] * cg[b][(e, col)] - cg[b][(r, e)] * cg[a][(e, col)];
                    }
                    let rhs: f64 = (0..n).map(|cc| s.structure_constant(cc, a, b) * cg[cc][(r, col)]).sum();
                    jac = jac.max((lhs - rhs).abs());
                }
            }
        }
    }
    let dg = s.d_generators();
    let p = s.holonomy_dim();
    let mut hol: f64 = 0.0;
    for i in 0..p {
        for k in 0..p {
            let lhs = &dg[i] * &dg[k] - &dg[k] * &dg[i];
            let mut rhs = DMatrix::zeros(s.dim(), s.dim());
            for j in 0..p {
                rhs += &dg[j] * s.f_generators()[i][(j, k)];
            }
            hol = hol.max((lhs - rhs).amax());
        }
    }
    (jac, hol)
}

#[test]
fn jacobi_and_holonomy_brackets_close() {
    for fixture in [SymmetricFixture::S2, SymmetricFixture::S3] {
        for a in [0.3, 1.0, 4.0] {
            let s = build_symmetric_space(fixture, a).unwrap();
            let (jac, hol) = bracket_residuals(&s);
            assert!(jac < 1e-12 && hol < 1e-12, "{fixture:?} a={a}: {jac} {hol}");
            assert!(s.jacobi_residual() < 1e-12 && s.holonomy_residual() < 1e-12);
            // D_i = −β_{ik} E^k.
            for i in 0..s.holonomy_dim() {
                let mut expect = DMatrix::zeros(s.dim(), s.dim());
                for k in 0..s.holonomy_dim() {
                    expect -= &s.e()[k] * s.beta()[(i, k)];
                }
                assert!((&s.d_generators()[i] - expect).amax() < 1e-14);
            }
        }
    }
}

#[test]
fn symmetric_space_rejects_bad_input() {
    assert!(build_symmetric_space(SymmetricFixture::S2, 0.0).is_err());
    assert!(build_symmetric_space(SymmetricFixture::S3, -1.0).is_err());
    let e = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    assert!(SymmetricSpaceData::new(vec![e], DMatrix::identity(1, 1)).is_err());
    let e = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    assert!(SymmetricSpaceData::new(vec![e.clone(), e], DMatrix::identity(2, 2)).is_err());
    assert!(SymmetricSpaceData::new(Vec::new(), DMatrix::identity(0, 0)).is_err());
}

#[test]
fn theta_series_closed_values() {
    let s2 = build_symmetric_space(SymmetricFixture::S2, 1.0).unwrap();
    let cs = theta_series(&s2, &scalar(0.0), 4).unwrap();
    let expect = [1.0, 1.0 / 3.0, 1.0 / 15.0, 4.0 / 315.0, 1.0 / 315.0];
    for (k, (x, y)) in cs.iter().zip(expect).enumerate() {
        assert!((x - y).abs() < 1e-12, "S2 c_{k}: {x} vs {y}");
    }
    // On the unit S³ the scalar kernel diagonal is (4πt)^{−3/2} e^{t} up to exponentially small terms.
    let s3 = build_symmetric_space(SymmetricFixture::S3, 1.0).unwrap();
    let cs = theta_series(&s3, &scalar(0.0), MAX_THETA_ORDER).unwrap();
    let mut fact = 1.0;
    for (k, x) in cs.iter().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        assert!((x - 1.0 / fact).abs() < 1e-12, "S3 c_{k}");
    }
    assert!(matches!(theta_series(&s3, &scalar(0.0), MAX_THETA_ORDER + 1), Err(Error::Validation(_))));
}

#[test]
fn theta_series_traces_fiber_potential() {
    let s2 = build_symmetric_space(SymmetricFixture::S2, 1.0).unwrap();
    let q = CMat::from_row_slice(2, 2, &[c(0.2), c(0.0), c(0.0), c(1.1)]);
    let both = theta_series(&s2, &q, 3).unwrap();
    let a = theta_series(&s2, &scalar(0.2), 3).unwrap();
    let b = theta_series(&s2, &scalar(1.1), 3).unwrap();
    for k in 0..=3 {
        assert!((both[k] - a[k] - b[k]).abs() < 1e-13);
    }
    assert!((a[1] - (1.0 / 3.0 - 0.2)).abs() < 1e-13);
}

fn s2_fit(t_lo: f64, t_hi: f64) -> Vec<f64> {
    let grid = geometric_grid(t_lo, t_hi, 60).unwrap();
    let samples: Vec<(f64, f64)> = grid.iter().map(|&t| (t, sphere_trace(2, 1.0, t).unwrap())).collect();
    let exps: Vec<f64> = (-1..=6).map(|e| e as f64).collect();
    fit_expansion(&samples, 2, &exps).unwrap().coefficients
}

fn s3_fit(t_lo: f64, t_hi: f64) -> Vec<f64> {
    let grid = geometric_grid(t_lo, t_hi, 60).unwrap();
    let norm = (4.0 * PI).powf(-1.5) * 2.0 * PI * PI;
    let samples: Vec<(f64, f64)> = grid.iter().map(|&t| (t, sphere_trace(3, 1.0, t).unwrap() / norm)).collect();
    let exps: Vec<f64> = (0..=9).map(|e| e as f64 - 1.5).collect();
    fit_expansion(&samples, 3, &exps).unwrap().coefficients
}

#[test]
fn theta_series_matches_spectral_fits_through_c3() {
    let s2 = build_symmetric_space(SymmetricFixture::S2, 1.0).unwrap();
    let series = theta_series(&s2, &scalar(0.0), 3).unwrap();
    let fit = s2_fit(1e-2, 0.5);
    for k in 0..=3 {
        assert!((series[k] - fit[k]).abs() < 1e-4, "S2 c_{k}: {} vs {}", series[k], fit[k]);
    }
    assert!((fit[2] - 1.0 / 15.0).abs() < 1e-4);

    let s3 = build_symmetric_space(SymmetricFixture::S3, 1.0).unwrap();
    let series = theta_series(&s3, &scalar(0.0), 3).unwrap();
    let fit = s3_fit(1e-2, 0.3);
    for k in 0..=3 {
        assert!((series[k] - fit[k]).abs() < 1e-4, "S3 c_{k}: {} vs {}", series[k], fit[k]);
    }
}

#[test]
fn quadrature_matches_exact_trace_and_series() {
    let s2 = build_symmetric_space(SymmetricFixture::S2, 1.0).unwrap();
    let t: f64 = 0.01;
    let quad = theta_quadrature(&s2, &scalar(0.0), t).unwrap();
    let exact = sphere_trace(2, 1.0, t).unwrap() / (4.0 * PI);
    assert!((quad - exact).abs() < 1e-5 * exact, "{quad} vs {exact}");
    let cs = theta_series(&s2, &scalar(0.0), 4).unwrap();
    let partial: f64 = cs.iter().enumerate().map(|(k, ck)| ck * t.powi(k as i32)).sum::<f64>() / (4.0 * PI * t);
    assert!((quad - partial).abs() < 1e-6 * partial);

    let s3 = build_symmetric_space(SymmetricFixture::S3, 1.0).unwrap();
    let quad = theta_quadrature(&s3, &scalar(0.0), t).unwrap();
    let exact = sphere_trace(3, 1.0, t).unwrap() / (2.0 * PI * PI);
    assert!((quad - exact).abs() < 1e-5 * exact, "{quad} vs {exact}");
}

#[test]
fn quadrature_guards_the_pole() {
    let s2 = build_symmetric_space(SymmetricFixture::S2, 1.0).unwrap();
    let t_max = theta_t_max(&s2).unwrap();
    assert!(t_max > 0.01 && t_max.is_finite());
    match theta_quadrature(&s2, &scalar(0.0), 1.5 * t_max) {
        Err(Error::Domain(msg)) => assert!(msg.contains("pole")),
        other => panic!("expected domain error, got {other:?}"),
    }
    assert!(theta_quadrature(&s2, &scalar(0.0), 0.0).is_err());
    // Larger spheres have proportionally larger safe windows.
    let big = build_symmetric_space(SymmetricFixture::S2, 2.0).unwrap();
    assert!((theta_t_max(&big).unwrap() / t_max - 4.0).abs() < 1e-10);
}

/// `det (sinh(X/2)/(X/2))` by power series of the matrix function.
fn det_sinhc(x: &DMatrix<f64>) -> f64 {
    let n = x.nrows();
    let half = x * 0.5;
    let x2 = &half * &half;
    let mut term = DMatrix::identity(n, n);
    let mut acc = DMatrix::identity(n, n);
    for k in 1..30 {
        term = &term * &x2 / ((2 * k) * (2 * k + 1)) as f64;
        acc += &term;
    }
    acc.determinant()
}

#[test]
fn integrand_is_even_in_omega() {
    let s2 = build_symmetric_space(SymmetricFixture::S2, 1.0).unwrap();
    let s3 = build_symmetric_space(SymmetricFixture::S3, 1.0).unwrap();
    let sample = [[0.3, -1.2, 0.7], [2.0, 0.1, -0.4], [-0.9, 0.9, 1.5]];
    for s in [&s2, &s3] {
        for w in sample {
            let build = |sgn: f64, gens: &[DMatrix<f64>]| {
                gens.iter()
                    .zip(w)
                    .fold(DMatrix::zeros(gens[0].nrows(), gens[0].ncols()), |acc, (g, wi)| acc + g * (sgn * wi))
            };
            let value = |sgn: f64| {
                let d = build(sgn, s.d_generators());
                let f = build(sgn, s.f_generators());
                det_sinhc(&f).sqrt() / det_sinhc(&d).sqrt()
            };
            let (plus, minus) = (value(1.0), value(-1.0));
            assert!((plus - minus).abs() < 1e-14 * plus.abs(), "{plus} vs {minus}");
            if s.holonomy_dim() == 1 {
                assert!((plus - 1.0).abs() > 1e-3);
            }
        }
    }
}

#[test]
fn quadrature_has_only_integer_powers() {
    // A t^{1/2} correction would show up at relative size ~1e−2 here.
    let s2 = build_symmetric_space(SymmetricFixture::S2, 1.0).unwrap();
    let cs = theta_series(&s2, &scalar(0.0), MAX_THETA_ORDER).unwrap();
    for t in geometric_grid(1e-3, 1e-2, 6).unwrap() {
        let quad = 4.0 * PI * t * theta_quadrature(&s2, &scalar(0.0), t).unwrap();
        let series: f64 = cs.iter().enumerate().map(|(k, ck)| ck * t.powi(k as i32)).sum();
        assert!((quad - series).abs() < 1e-8 * series, "t={t}: {quad} vs {series}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn landau_equality_on_the_window(b in 0.05f64..20.0, tb in 1e-4f64..3.0) {
        let t = tb / b;
        let fs = ConstantFieldStrength::blocks(&[b], scalar(0.0)).unwrap();
        let v = nilpotent_trace_density(&fs, t).unwrap();
        let direct = landau_direct_sum(b, t).unwrap();
        prop_assert!((v - direct).abs() < 1e-10 * direct);
    }

    #[test]
    fn nilpotent_potential_factor(b in 0.0f64..5.0, q in -3.0f64..3.0, t in 0.01f64..2.0) {
        let with = ConstantFieldStrength::blocks(&[b], scalar(q)).unwrap();
        let without = ConstantFieldStrength::blocks(&[b], scalar(0.0)).unwrap();
        let ratio = nilpotent_trace_density(&with, t).unwrap() / nilpotent_trace_density(&without, t).unwrap();
        prop_assert!((ratio - (-t * q).exp()).abs() < 1e-12 * (-t * q).exp());
    }

    #[test]
    fn theta_series_scales_with_radius(a in 0.3f64..3.0) {
        let unit = theta_series(&build_symmetric_space(SymmetricFixture::S2, 1.0).unwrap(), &scalar(0.0), 4).unwrap();
        let s = theta_series(&build_symmetric_space(SymmetricFixture::S2, a).unwrap(), &scalar(0.0), 4).unwrap();
        for k in 0..=4 {
            let expect = unit[k] * a.powi(-2 * k as i32);
            prop_assert!((s[k] - expect).abs() < 1e-11 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn constant_potential_shifts_exponentially(q in -2.0f64..2.0) {
        let s3 = build_symmetric_space(SymmetricFixture::S3, 1.0).unwrap();
        let cs = theta_series(&s3, &scalar(q), 5).unwrap();
        // c_k for e^{t(1−q)}.
        let mut fact = 1.0;
        for (k, x) in cs.iter().enumerate() {
            if k > 0 { fact *= k as f64; }
            let expect = (1.0 - q).powi(k as i32) / fact;
            prop_assert!((x - expect).abs() < 1e-11);
        }
    }
}
