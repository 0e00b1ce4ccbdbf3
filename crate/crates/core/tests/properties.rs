use std::sync::Arc;

use fockforge_core::algebra::{apply_generator, parse_generator, GeneratorSpec};
use fockforge_core::fock::{inner_product, FockBasis, StateVector};
use fockforge_core::specfun::MeasureSpec;
use fockforge_core::states::{glauber_cs, multimode_cat, phi_cat, CatParams, PhiSign};
use fockforge_core::verify::{
    measure_uniqueness_probe, resolve_identity, QuadratureGrid, ResolutionFamily, Target,
};
use fockforge_core::C64;
use proptest::prelude::*;

fn c64() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im))
}

fn random_state(basis: &Arc<FockBasis>, amps: &[C64]) -> StateVector {
    StateVector::from_ordinals(basis, amps.iter().copied().enumerate().take(basis.len()))
}

fn alpha(modes: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(c64(), modes)
}

fn generator(modes: usize) -> impl Strategy<Value = GeneratorSpec> {
    let m = 1..=modes;
    let pair = (m.clone(), m.clone());
    let leaf = prop_oneof![
        Just(GeneratorSpec::Identity),
        m.clone().prop_map(GeneratorSpec::Annihilate),
        m.prop_map(GeneratorSpec::Create),
        pair.clone().prop_map(|(i, j)| GeneratorSpec::E(i, j)),
        pair.clone().prop_map(|(i, j)| GeneratorSpec::Edag(i, j)),
        pair.prop_map(|(i, j)| GeneratorSpec::H(i, j)),
    ];
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            (c64(), inner.clone()).prop_map(|(c, g)| GeneratorSpec::scale(c, g)),
            prop::collection::vec(inner.clone(), 0..3).prop_map(GeneratorSpec::Sum),
            prop::collection::vec(inner, 1..3).prop_map(GeneratorSpec::Product),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_non_negative_and_matches_self_overlap(amps in prop::collection::vec(c64(), 1..30)) {
        let b = FockBasis::new(2, 5).unwrap();
        let v = random_state(&b, &amps);
        let ip = inner_product(&v, &v).unwrap();
        prop_assert!(ip.re >= 0.0);
        prop_assert!(ip.im.abs() <= 1e-15 * (1.0 + ip.re));
        prop_assert!((ip.re - v.norm_sqr()).abs() <= 1e-13 * (1.0 + ip.re));
    }

    #[test]
    fn inner_product_is_hermitian(
        a in prop::collection::vec(c64(), 1..30),
        b in prop::collection::vec(c64(), 1..30),
    ) {
        let basis = FockBasis::new(2, 5).unwrap();
        let (u, v) = (random_state(&basis, &a), random_state(&basis, &b));
        let uv = inner_product(&u, &v).unwrap();
        let vu = inner_product(&v, &u).unwrap();
        prop_assert!((uv - vu.conj()).norm() <= 1e-14);
    }

    #[test]
    fn adjoint_is_adjoint_on_interior(
        g in generator(2),
        a in prop::collection::vec(c64(), 1..10),
        b in prop::collection::vec(c64(), 1..10),
    ) {
        // States supported on n_tot <= 2 so no raising leaves the cutoff.
        let basis = FockBasis::new(2, 12).unwrap();
        let u = random_state(&basis, &a[..a.len().min(6)]);
        let v = random_state(&basis, &b[..b.len().min(6)]);
        let gv = apply_generator(&g, &v).unwrap();
        let gu = apply_generator(&g.adjoint(), &u).unwrap();
        prop_assume!(gv.truncation_loss() == 0.0 && gu.truncation_loss() == 0.0);
        let lhs = inner_product(&u, &gv).unwrap();
        let rhs = inner_product(&gu, &v).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn display_parses_back(g in generator(3)) {
        let text = g.to_string();
        prop_assert_eq!(parse_generator(&text).unwrap(), g);
    }

    #[test]
    fn parity_flip_swaps_cat_components(al in alpha(2)) {
        // |alpha> -> |-alpha> maps even to even and odd to minus odd.
        let b = FockBasis::new(2, 30).unwrap();
        let neg: Vec<C64> = al.iter().map(|x| -x).collect();
        for (params, sign) in [(CatParams::even(&al), 1.0), (CatParams::odd(&al), -1.0)] {
            let u = multimode_cat(&b, &al, params, 1e-10).unwrap();
            let v = multimode_cat(&b, &neg, params, 1e-10).unwrap();
            let d = v.axpy(C64::new(-sign, 0.0), &u).unwrap();
            prop_assert!(d.norm() <= 1e-13);
        }
    }

    #[test]
    fn phi_cat_sign_is_phi_reflection(al in alpha(2), phi in -3.0f64..3.0) {
        let b = FockBasis::new(2, 30).unwrap();
        let u = phi_cat(&b, &al, phi, PhiSign::Plus, 1e-10).unwrap();
        let v = phi_cat(&b, &al, -phi, PhiSign::Minus, 1e-10).unwrap();
        prop_assert!(u.sub(&v).unwrap().norm() <= 1e-14);
    }

    #[test]
    fn glauber_overlap_matches_closed_form(a in alpha(2), b in alpha(2)) {
        let basis = FockBasis::new(2, 40).unwrap();
        let u = glauber_cs(&basis, &a, 1e-12).unwrap();
        let v = glauber_cs(&basis, &b, 1e-12).unwrap();
        let s: C64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
        let na: f64 = a.iter().map(|x| x.norm_sqr()).sum();
        let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
        let want = (s - C64::new((na + nb) / 2.0, 0.0)).exp();
        prop_assert!((inner_product(&u, &v).unwrap() - want).norm() <= 1e-11);
    }

    #[test]
    fn uniqueness_ratio_is_linear(factor in 0.1f64..10.0) {
        let base = MeasureSpec::GaussianGlauber { modes: 1 };
        let scaled = MeasureSpec::Scaled { factor, inner: Box::new(base.clone()) };
        let degrees: Vec<Vec<u32>> = (0..4).map(|n| vec![n]).collect();
        let r = measure_uniqueness_probe(&scaled, &base, &degrees, 4).unwrap();
        for row in &r.rows {
            prop_assert!((row.ratio - factor).abs() <= 1e-12 * factor);
        }
        prop_assert!(r.ratio_spread <= 1e-12 * factor);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn parser_never_panics(src in "[a-zA-Z_0-9(),+*. i-]{0,40}") {
        if let Ok(g) = parse_generator(&src) {
            prop_assert_eq!(parse_generator(&g.to_string()).unwrap(), g);
        }
    }

    #[test]
    fn parser_handles_token_soup(toks in prop::collection::vec(prop_oneof![
        Just("E"), Just("Edag"), Just("H"), Just("a"), Just("adag"), Just("Scale"), Just("Sum"),
        Just("Product"), Just("K3"), Just("L"), Just("BgKm"), Just("("), Just(")"), Just(","),
        Just("+"), Just("-"), Just("*"), Just("1"), Just("2"), Just("0"), Just("1e999"), Just("2i"),
    ], 0..30)) {
        let src = toks.concat();
        if let Ok(g) = parse_generator(&src) {
            prop_assert_eq!(parse_generator(&g.to_string()).unwrap(), g);
        }
    }

    #[test]
    fn state_json_never_panics(src in "[{}\\[\\]\":,0-9a-z.-]{0,80}") {
        let _ = StateVector::from_json(&src);
    }
}

#[test]
fn gram_is_positive_semidefinite() {
    let grid = QuadratureGrid::default();
    for (modes, max_total) in [(1usize, 10u32), (2, 4)] {
        let b = FockBasis::new(modes, 16).unwrap();
        let probe: Vec<usize> = b.interior(max_total).collect();
        for family in [
            ResolutionFamily::Glauber,
            ResolutionFamily::PhiCat { phi: 0.9, sign: PhiSign::Minus },
        ] {
            let r = resolve_identity(
                &family,
                &MeasureSpec::GaussianGlauber { modes },
                &b,
                &probe,
                &grid,
                Target::Identity,
            )
            .unwrap();
            assert!(r.min_eigenvalue >= -1e-12, "{family:?}: {}", r.min_eigenvalue);
            assert!(r.hermiticity_deviation <= 1e-13);
        }
    }
}
