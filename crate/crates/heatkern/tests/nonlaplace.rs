use heatkern::hmds::{solve, trace_expansion};
use heatkern::linalg::{c, max_abs, trace, CMat};
use heatkern::nonlaplace::{
    a0_coefficient, a2_potential_part, eigenstructure, h_endomorphism, sample_directions, torus_oracle, u0_trace,
    x_tensor, y_tensor, LeadingSymbol, SymbolSpectrum, MIN_DIRECTIONS,
};
use heatkern::tensorcalc::{build_model_geometry, GeometryKind, PotentialJet};
use heatkern::Error;
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn spectrum(sym: &LeadingSymbol) -> SymbolSpectrum {
    eigenstructure(sym, &sample_directions(sym.dim(), 64, 7)).unwrap()
}

/// `A(ξ) = (|ξ|² I + ξ⊗ξ) ⊕ 3|ξ|² I₂`, three slopes on a rank-4 bundle over ℝ².
fn three_slope_symbol() -> LeadingSymbol {
    let inner = LeadingSymbol::one_form(2, 1.0).unwrap();
    let blocks = (0..4)
        .map(|k| {
            let (mu, nu) = (k / 2, k % 2);
            let mut b = CMat::zeros(4, 4);
            b.view_mut((0, 0), (2, 2)).copy_from(inner.block(mu, nu));
            if mu == nu {
                b[(2, 2)] = c(3.0);
                b[(3, 3)] = c(3.0);
            }
            b
        })
        .collect();
    LeadingSymbol::new(2, blocks).unwrap()
}

fn fixtures() -> Vec<(LeadingSymbol, &'static str)> {
    vec![
        (LeadingSymbol::laplace(2, 1).unwrap(), "laplace m=2"),
        (LeadingSymbol::laplace(3, 2).unwrap(), "laplace m=3 d=2"),
        (LeadingSymbol::one_form(2, 1.0).unwrap(), "one-form c=1"),
        (LeadingSymbol::one_form(3, 0.5).unwrap(), "one-form m=3 c=0.5"),
        (LeadingSymbol::one_form(3, -0.7).unwrap(), "one-form m=3 c=-0.7"),
        (three_slope_symbol(), "three slopes"),
    ]
}

#[test]
fn laplace_symbol_has_one_slope() {
    for m in 1..=3 {
        for d in 1..=3 {
            let spec = spectrum(&LeadingSymbol::laplace(m, d).unwrap());
            assert_eq!(spec.slopes().len(), 1);
            assert!((spec.slopes()[0] - 1.0).abs() < 1e-14);
            assert_eq!(spec.multiplicities(), &[d]);
            let p = spec.projectors(&vec![0.3; m]).unwrap();
            assert!(max_abs(&(&p[0] - CMat::identity(d, d))) < 1e-12);
        }
    }
}

#[test]
fn one_form_symbol_slopes() {
    for m in 2..=4 {
        for cpl in [-0.5, 0.5, 1.0, 3.0] {
            let spec = spectrum(&LeadingSymbol::one_form(m, cpl).unwrap());
            let mut expect = vec![(1.0, m - 1), (1.0 + cpl, 1)];
            expect.sort_by(|a, b| a.0.total_cmp(&b.0));
            let got: Vec<(f64, usize)> =
                spec.slopes().iter().copied().zip(spec.multiplicities().iter().copied()).collect();
            assert_eq!(got.len(), 2);
            for (g, e) in got.iter().zip(&expect) {
                assert!((g.0 - e.0).abs() < 1e-12 && g.1 == e.1, "m={m} c={cpl}: {got:?}");
            }
            assert!(spec.spread() < 1e-10);
        }
    }
}

#[test]
fn degenerate_or_negative_symbols_fail_ellipticity() {
    for cpl in [-1.0, -1.5, -4.0] {
        let sym = LeadingSymbol::one_form(2, cpl).unwrap();
        let err = eigenstructure(&sym, &sample_directions(2, 30, 1)).unwrap_err();
        assert!(matches!(err, Error::Ellipticity(_)), "c={cpl}: {err:?}");
    }
}

#[test]
fn direction_dependent_symbol_is_rejected() {
    let d0 = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(2.0)]));
    let d1 = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(2.0), c(1.0)]));
    let sym = LeadingSymbol::new(2, vec![d0, CMat::zeros(2, 2), CMat::zeros(2, 2), d1]).unwrap();
    let err = eigenstructure(&sym, &sample_directions(2, 40, 3)).unwrap_err();
    assert!(matches!(err, Error::Structure(_)), "{err:?}");
}

#[test]
fn eigenstructure_input_checks() {
    let sym = LeadingSymbol::laplace(2, 1).unwrap();
    let few = sample_directions(2, MIN_DIRECTIONS - 1, 1);
    assert!(matches!(eigenstructure(&sym, &few), Err(Error::Validation(_))));
    let mut bad = sample_directions(2, MIN_DIRECTIONS, 1);
    bad[3] = vec![0.0, 0.0];
    assert!(eigenstructure(&sym, &bad).is_err());
    let non_herm = CMat::from_row_slice(1, 1, &[Complex64::new(1.0, 1.0)]);
    assert!(LeadingSymbol::new(1, vec![non_herm]).is_err());
    let asym = vec![CMat::identity(1, 1), CMat::identity(1, 1) * c(0.5), CMat::zeros(1, 1), CMat::identity(1, 1)];
    assert!(LeadingSymbol::new(2, asym).is_err());
}

#[test]
fn projector_algebra_on_every_fixture() {
    for (sym, name) in fixtures() {
        let spec = spectrum(&sym);
        let d = sym.fiber();
        for xi in sample_directions(sym.dim(), 50, 99) {
            let ps = spec.projectors(&xi).unwrap();
            let mut total = CMat::zeros(d, d);
            let mut recon = CMat::zeros(d, d);
            for (i, p) in ps.iter().enumerate() {
                assert!(max_abs(&(p * p - p)) < 1e-10, "{name}: idempotence");
                assert!((trace(p).re - spec.multiplicities()[i] as f64).abs() < 1e-10, "{name}: trace");
                for (j, q) in ps.iter().enumerate() {
                    if i != j {
                        assert!(max_abs(&(p * q)) < 1e-10, "{name}: orthogonality");
                    }
                }
                total += p;
                recon += p * c(spec.slopes()[i]);
            }
            assert!(max_abs(&(total - CMat::identity(d, d))) < 1e-10, "{name}: completeness");
            // Reconstruction at a non-unit covector.
            let scaled: Vec<f64> = xi.iter().map(|x| 2.5 * x).collect();
            assert!(max_abs(&(sym.symbol(&scaled) - recon * c(6.25))) < 1e-10, "{name}: reconstruction");
            let neg: Vec<f64> = xi.iter().map(|x| -x).collect();
            for (p, q) in ps.iter().zip(spec.projectors(&neg).unwrap()) {
                assert!(max_abs(&(p - q)) < 1e-10, "{name}: evenness");
            }
        }
    }
}

#[test]
fn a0_examples() {
    for m in 1..=3 {
        for d in 1..=2 {
            let spec = spectrum(&LeadingSymbol::laplace(m, d).unwrap());
            let expect = (4.0 * PI).powf(-(m as f64) / 2.0) * d as f64 * 2.0;
            assert!((a0_coefficient(&spec, m, 2.0) - expect).abs() < 1e-14);
        }
    }
    let spec = spectrum(&LeadingSymbol::one_form(2, 1.0).unwrap());
    assert!((a0_coefficient(&spec, 2, 1.0) - 3.0 / (8.0 * PI)).abs() < 1e-14);
}

#[test]
fn u0_trace_examples() {
    let spec = spectrum(&LeadingSymbol::laplace(3, 2).unwrap());
    assert!((u0_trace(&spec, 3, 0.2).unwrap() - 2.0 * (0.8 * PI).powf(-1.5)).abs() < 1e-13);
    let spec = spectrum(&LeadingSymbol::one_form(2, 1.0).unwrap());
    let expect = 1.0 / (4.0 * PI * 2.0) + 1.0 / (4.0 * PI);
    assert!((u0_trace(&spec, 2, 1.0).unwrap() - expect).abs() < 1e-15);
    assert!(matches!(u0_trace(&spec, 2, 0.0), Err(Error::Validation(_))));
}

#[test]
fn h_endomorphism_examples() {
    for m in 1..=3 {
        let sym = LeadingSymbol::laplace(m, 2).unwrap();
        let h = h_endomorphism(&sym, &spectrum(&sym)).unwrap();
        let expect = CMat::identity(2, 2) * c(-(4.0 * PI).powf(-(m as f64) / 2.0));
        assert!(max_abs(&(h - expect)) < 1e-12);
    }
    let sym = LeadingSymbol::one_form(2, 1.0).unwrap();
    let h = h_endomorphism(&sym, &spectrum(&sym)).unwrap();
    let half = CMat::identity(2, 2) * c(0.5);
    let expect = -(&half * c(0.5) + &half) * c(1.0 / (4.0 * PI));
    assert!(max_abs(&(h - expect)) < 1e-12);

    // m = 3: the direction average of ξ̂⊗ξ̂ is I/3.
    let sym = LeadingSymbol::one_form(3, 0.5).unwrap();
    let h = h_endomorphism(&sym, &spectrum(&sym)).unwrap();
    let third = CMat::identity(3, 3) * c(1.0 / 3.0);
    let expect = -(&third * c(1.5f64.powf(-1.5)) + &third * c(2.0)) * c((4.0 * PI).powf(-1.5));
    assert!(max_abs(&(h - expect)) < 1e-12);

    let other = LeadingSymbol::laplace(2, 2).unwrap();
    assert!(h_endomorphism(&other, &spectrum(&sym)).is_err());
}

#[test]
fn h_is_hermitian_on_fixtures() {
    for (sym, name) in fixtures() {
        let h = h_endomorphism(&sym, &spectrum(&sym)).unwrap();
        assert!(max_abs(&(&h - h.adjoint())) < 1e-12, "{name}");
        // tr H = −(4π)^{−m/2} Σ d_i μ_i^{−m/2} = −A₀/vol.
        let spec = spectrum(&sym);
        assert!((trace(&h).re + a0_coefficient(&spec, sym.dim(), 1.0)).abs() < 1e-12, "{name}");
    }
}

#[test]
fn a2_potential_examples() {
    let sym = LeadingSymbol::one_form(2, 1.0).unwrap();
    let h = h_endomorphism(&sym, &spectrum(&sym)).unwrap();
    assert_eq!(a2_potential_part(&h, &CMat::zeros(2, 2), 3.0).unwrap(), 0.0);
    assert!((a2_potential_part(&h, &CMat::identity(2, 2), 3.0).unwrap() - 3.0 * trace(&h).re).abs() < 1e-15);
    assert!(a2_potential_part(&h, &CMat::zeros(3, 3), 1.0).is_err());
}

#[test]
fn laplace_potential_channel_agrees_with_recursion() {
    let q = CMat::from_row_slice(2, 2, &[c(0.4), Complex64::new(0.2, 0.3), Complex64::new(0.2, -0.3), c(-1.1)]);
    let periods = vec![1.5, 2.0];
    let sym = LeadingSymbol::laplace(2, 2).unwrap();
    let h = h_endomorphism(&sym, &spectrum(&sym)).unwrap();
    let a2 = a2_potential_part(&h, &q, 3.0).unwrap();
    let geom = build_model_geometry(GeometryKind::Torus { periods }, 2, 4).unwrap();
    let (_, coeffs) = solve(&geom, &PotentialJet::constant(2, q.clone(), 4).unwrap(), 1, 0).unwrap();
    let exp = trace_expansion(&geom, &coeffs).unwrap();
    assert!((a2 - exp.coefficient(0)).abs() < 1e-14);
    assert!((a2 + 3.0 * trace(&q).re / (4.0 * PI)).abs() < 1e-14);
}

#[test]
fn torus_oracle_reproduces_classical_theta() {
    let spec = spectrum(&LeadingSymbol::laplace(1, 1).unwrap());
    for t in [0.01, 0.3, 2.0] {
        let theta: f64 = 1.0 + 2.0 * (1..2000).map(|n| (-t * (n * n) as f64).exp()).sum::<f64>();
        let v = torus_oracle(&spec, &CMat::zeros(1, 1), &[2.0 * PI], t, None).unwrap();
        assert!((v - theta).abs() < 1e-10 * theta.max(1.0), "t={t}: {v} vs {theta}");
    }
}

#[test]
fn torus_oracle_large_t_sees_zero_mode() {
    let spec = spectrum(&LeadingSymbol::laplace(1, 2).unwrap());
    let q = CMat::from_row_slice(2, 2, &[c(0.1), c(0.0), c(0.0), c(0.5)]);
    let t = 40.0;
    let v = torus_oracle(&spec, &q, &[2.0 * PI], t, None).unwrap();
    let zero_mode = (-t * 0.1f64).exp() + (-t * 0.5f64).exp();
    assert!((v - zero_mode).abs() < 1e-12 * zero_mode);
}

#[test]
fn torus_oracle_short_time_limit() {
    let spec = spectrum(&LeadingSymbol::one_form(2, 1.0).unwrap());
    let t = 1e-3;
    let v = t * torus_oracle(&spec, &CMat::zeros(2, 2), &[1.0, 1.0], t, None).unwrap();
    assert!((v - 3.0 / (8.0 * PI)).abs() < 1e-3 * 3.0 / (8.0 * PI));
}

#[test]
fn torus_oracle_converges_at_first_order() {
    // With Q = qI the first correction is the potential channel, linear in t.
    let spec = spectrum(&LeadingSymbol::one_form(2, 1.0).unwrap());
    let q = CMat::identity(2, 2) * c(0.8);
    let a0 = a0_coefficient(&spec, 2, 1.0);
    let err = |t: f64| (t * torus_oracle(&spec, &q, &[1.0, 1.0], t, None).unwrap() - a0).abs();
    let (e1, e2, e3) = (err(4e-3), err(2e-3), err(1e-3));
    for ratio in [e1 / e2, e2 / e3] {
        assert!((ratio - 2.0).abs() < 0.02, "ratio {ratio}");
    }
}

#[test]
fn torus_oracle_potential_channel_matches_h() {
    let sym = LeadingSymbol::one_form(2, 1.0).unwrap();
    let spec = spectrum(&sym);
    let q = CMat::from_row_slice(2, 2, &[c(0.3), Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0), c(-0.2)]);
    let h = h_endomorphism(&sym, &spec).unwrap();
    let predicted = a2_potential_part(&h, &q, 1.0).unwrap();
    let a0 = a0_coefficient(&spec, 2, 1.0);
    let slope = |t: f64| (t * torus_oracle(&spec, &q, &[1.0, 1.0], t, None).unwrap() - a0) / t;
    // Richardson step removes the O(t) remainder.
    let (s1, s2) = (slope(2e-3), slope(1e-3));
    let extrapolated = 2.0 * s2 - s1;
    assert!((extrapolated - predicted).abs() < 1e-3 * predicted.abs(), "{extrapolated} vs {predicted}");
}

#[test]
fn torus_oracle_checks_cutoff_and_budget() {
    let spec = spectrum(&LeadingSymbol::laplace(2, 1).unwrap());
    let q = CMat::zeros(1, 1);
    assert!(matches!(torus_oracle(&spec, &q, &[1.0, 1.0], 0.01, Some(1)), Err(Error::Validation(_))));
    assert!(torus_oracle(&spec, &q, &[1.0, 1.0], 0.01, Some(40)).is_ok());
    assert!(matches!(torus_oracle(&spec, &q, &[1.0, 1.0], 1e-7, None), Err(Error::Resource(_))));
    assert!(torus_oracle(&spec, &q, &[1.0], 0.1, None).is_err());
    assert!(torus_oracle(&spec, &q, &[1.0, 1.0], 0.0, None).is_err());
}

#[test]
fn x_and_y_tensors() {
    let m = 2;
    let sym = LeadingSymbol::one_form(m, 0.7).unwrap();
    let flat = x_tensor(&sym, |_, _, _, _| 0.0);
    assert!(flat.iter().all(|b| max_abs(b) == 0.0));

    // Unit sphere: R^a_{bcd} = δ_ac δ_bd − δ_ad δ_bc.
    let kd = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let riem = |a: usize, b: usize, cc: usize, d: usize| kd(a, cc) * kd(b, d) - kd(a, d) * kd(b, cc);
    let x = x_tensor(&sym, riem);
    let idx = |mu: usize, nu: usize, al: usize, be: usize| ((mu * m + nu) * m + al) * m + be;
    for mu in 0..m {
        for nu in 0..m {
            for al in 0..m {
                for be in 0..m {
                    let v = &x[idx(mu, nu, al, be)];
                    assert!(max_abs(&(v - &x[idx(nu, mu, al, be)])) < 1e-15);
                    assert!(max_abs(&(v - &x[idx(mu, nu, be, al)])) < 1e-15);
                }
            }
        }
    }
    // Laplace symbol: X^{μν}_{αβ} = −⅓ R^{(μ}_{(α}{}^{ν)}_{β)}, here −⅓(δ^{μν}δ_{αβ} − δ^{(μ}_α δ^{ν)}_β).
    let lap = LeadingSymbol::laplace(m, 1).unwrap();
    let xl = x_tensor(&lap, riem);
    for mu in 0..m {
        for nu in 0..m {
            for al in 0..m {
                for be in 0..m {
                    let sym_delta = 0.5 * (kd(mu, al) * kd(nu, be) + kd(mu, be) * kd(nu, al));
                    let expect = -(kd(mu, nu) * kd(al, be) - sym_delta) / 3.0;
                    assert!((xl[idx(mu, nu, al, be)][(0, 0)].re - expect).abs() < 1e-15);
                }
            }
        }
    }

    let ricci = DVector::from_vec(vec![1.0, 0.0, 0.0, 1.0]);
    let zero = vec![CMat::zeros(1, 1); 4];
    let y = y_tensor(&lap, &ricci, &zero).unwrap();
    for mu in 0..m {
        for al in 0..m {
            assert!((y[mu * m + al][(0, 0)].re - 2.0 / 3.0 * kd(mu, al)).abs() < 1e-15);
        }
    }
    let f = CMat::from_element(1, 1, Complex64::new(0.0, 0.5));
    let curv = vec![CMat::zeros(1, 1), f.clone(), -f.clone(), CMat::zeros(1, 1)];
    let y = y_tensor(&lap, &DVector::zeros(4), &curv).unwrap();
    assert!((y[1][(0, 0)] - Complex64::new(0.0, 0.5)).norm() < 1e-15);
    assert!(y_tensor(&lap, &DVector::zeros(3), &curv).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn one_form_projectors_close(cpl in -0.9f64..5.0, m in 2usize..=4, seed in 0u64..1000) {
        let sym = LeadingSymbol::one_form(m, cpl).unwrap();
        let spec = eigenstructure(&sym, &sample_directions(m, 24, seed)).unwrap();
        prop_assume!(cpl.abs() > 1e-6);
        for xi in sample_directions(m, 5, seed + 1) {
            let ps = spec.projectors(&xi).unwrap();
            let mut total = CMat::zeros(m, m);
            for p in &ps {
                prop_assert!(max_abs(&(p * p - p)) < 1e-10);
                total += p;
            }
            prop_assert!(max_abs(&(total - CMat::identity(m, m))) < 1e-10);
        }
    }

    #[test]
    fn u0_scales_homogeneously(t in 1e-4f64..10.0, s in 0.1f64..10.0, cpl in -0.5f64..2.0) {
        let spec = spectrum(&LeadingSymbol::one_form(3, cpl).unwrap());
        let a = u0_trace(&spec, 3, t).unwrap();
        let b = u0_trace(&spec, 3, s * t).unwrap();
        prop_assert!((b - a * s.powf(-1.5)).abs() < 1e-12 * a);
    }
}
