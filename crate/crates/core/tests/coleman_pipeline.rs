use coleman_core::coleman::*;
use coleman_core::interpolation::change_basis;
use coleman_core::mellin::Outcome;
use coleman_core::phi_module::FilteredPhiModule;
use coleman_core::{Error, Padic3, Padic5, PadicField, PrecisionProfile, Scalar, XSeries};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn light() -> PrecisionProfile {
    PrecisionProfile::new(15, 80, 16).unwrap()
}

fn cross<S: Scalar>(a: &[S], b: &[S]) -> S {
    a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone()
}

/// The `X = 0` line for the trivial character, from the closed-form relation
/// `(1 + p^{k−2} − a_p)·G(0) = p^{k−2}(p − 1)·F(0)`.
fn expected_w0<S: Scalar>(k: i64, ap: i64) -> Vec<S> {
    let p = S::PRIME as i64;
    let pk2 = p.pow((k - 2) as u32);
    vec![S::from_i64(1 + pk2 - ap), S::from_i64(pk2 * (p - 1))]
}

fn module<S: PadicField>(k: i64, ap: i64) -> FilteredPhiModule<S> {
    FilteredPhiModule::<S>::modular_formal(k, ap).unwrap()
}

#[test]
fn w0_matches_closed_form_relation() {
    fn run<S: PadicField>(k: i64, ap: i64) {
        let d = image_conditions_module(&module::<S>(k, ap), 0, &light()).unwrap();
        let w = &d.conditions[0].v[0];
        assert!(
            cross(w, &expected_w0::<S>(k, ap)).valuation().is_none(),
            "p = {}, k = {k}, a_p = {ap}",
            S::PRIME
        );
        let (c2, c1) = module::<S>(k, ap).derive_relation(0).unwrap();
        let l = &d.log_matrix;
        let m0 = l.value_at_chi_power(0).unwrap();
        let image = m0.transpose().mul_vec(w);
        // (F, G)·M(0) = (−L_2, L_1) satisfies c_2 L_2 = c_1 L_1.
        let rel = c2 * (-image[0]) - c1 * image[1];
        assert!(rel.valuation().is_none());
    }
    run::<Padic3>(2, 0);
    run::<Padic5>(2, 0);
    run::<Padic3>(4, 0);
    run::<Padic3>(2, 3);
    run::<Padic5>(2, 5);
}

#[test]
fn weight_two_classification() {
    let d = image_conditions::<Padic3>(2, 0, 0, &light()).unwrap();
    assert!(d.i1.is_empty() && d.i2.is_empty());
    assert_eq!(d.i3, vec![0]);
    assert_eq!(d.r[0].1, Padic3::from_i64(1));
    let d = image_conditions::<Padic3>(2, 3, 0, &light()).unwrap();
    assert_eq!(d.r[0].1, Padic3::from_i64(-1) / Padic3::from_i64(2));
    let d = image_conditions_module(&module::<Padic5>(2, 5), 0, &light()).unwrap();
    assert_eq!(d.r[0].1, Padic5::from_i64(-3) / Padic5::from_i64(4));
}

#[test]
fn weil_bound_rejects_five_two_five() {
    assert!(matches!(
        image_conditions::<Padic5>(2, 5, 0, &light()),
        Err(Error::InvalidForm(_))
    ));
}

#[test]
fn rho_weight_two() {
    let rho = rho_weight2::<Padic3>(0, &light()).unwrap();
    assert_eq!(rho.as_gh(), (Padic3::from_i64(2), Padic3::from_i64(-2)));
    let rho = rho_weight2::<Padic5>(0, &light()).unwrap();
    assert_eq!(rho.as_gh(), (Padic5::from_i64(2), Padic5::from_i64(-4)));
    let rho = rho_weight2::<Padic3>(3, &light()).unwrap();
    assert_eq!(rho.as_gh(), (Padic3::from_i64(-1), Padic3::from_i64(-2)));
    assert!(rho
        .apply(&Padic3::from_i64(1), &Padic3::from_i64(-2))
        .valuation()
        .is_none());
}

#[test]
fn generators_divide_x_k() {
    for k in [2, 3, 4] {
        for eta in 0..2 {
            let d = image_conditions::<Padic3>(k, 0, eta, &light()).unwrap();
            let mut all: Vec<usize> = d.i1.iter().chain(&d.i2).chain(&d.i3).copied().collect();
            all.sort();
            assert_eq!(all, (0..=(k - 2) as usize).collect::<Vec<_>>());
            let g = classify_and_generators(&d).unwrap();
            assert!(g.divides_x_k);
            assert_eq!(g.first.generator, d.x1);
            assert_eq!(g.second.generator, d.x2);
        }
    }
}

#[test]
fn change_of_basis_empties_i1_and_i2() {
    for (k, eta) in [(3, 1), (4, 0), (4, 1)] {
        let m = module::<Padic3>(k, 0);
        let d = image_conditions_module(&m, eta, &light()).unwrap();
        let rs: Vec<Padic3> = d.r.iter().map(|(_, r)| *r).collect();
        let (b, rp) = change_basis(&rs).unwrap();
        let e1 = *b.get(1, 0);
        let e2 = *b.get(0, 1);
        let d2 = rebase(&m, &d, b).unwrap();
        assert!(d2.i1.is_empty() && d2.i2.is_empty(), "k = {k}, η = {eta}");
        for (i, r) in &d2.r {
            let expected = if d.i1.contains(i) {
                e1
            } else if d.i2.contains(i) {
                Padic3::from_i64(1) / e2
            } else {
                rp[d.r.iter().position(|(j, _)| j == i).unwrap()]
            };
            assert!((*r - expected).valuation().is_none_or(|v| v >= d2.precision - 3));
        }
    }
}

#[test]
fn members_pass_and_perturbations_fail() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let d = image_conditions::<Padic3>(4, 0, 0, &light()).unwrap();
    let g = classify_and_generators(&d).unwrap();
    for _ in 0..5 {
        let coeffs: Vec<XSeries<Padic3>> = (0..2)
            .map(|_| coleman_core::interpolation::random_poly(&mut rng, 3))
            .collect();
        let v = g.module.combine(&coeffs);
        let report = check_membership(&v[0], &v[1], &d).unwrap();
        assert!(report.member());
        let bumped = &v[0] + &XSeries::constant(Padic3::from_i64(1));
        assert!(!check_membership(&bumped, &v[1], &d).unwrap().member());
    }
}

#[test]
fn log_matrix_image_lies_in_v() {
    let d = image_conditions::<Padic3>(2, 0, 0, &light()).unwrap();
    let g = classify_and_generators(&d).unwrap();
    let v = g.module.combine(&[
        XSeries::constant(Padic3::from_i64(1)),
        XSeries::constant(Padic3::from_i64(0)),
    ]);
    let (a, b) = apply_log_matrix(&v[0], &v[1], &d.log_matrix);
    let at0 = (a.coeffs()[0], b.coeffs()[0]);
    let m = module::<Padic3>(2, 0);
    let vline = &m.v_subspace(0, d.eta).unwrap()[0];
    let defect = at0.0 * vline[1] - at0.1 * vline[0];
    assert!(defect.valuation().is_none());
}

#[test]
fn det_factorization_holds() {
    for k in [2, 3, 4] {
        let d = image_conditions::<Padic3>(k, 0, 0, &light()).unwrap();
        assert_eq!(det_factorization_check(&d).unwrap(), Outcome::Pass, "k = {k}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]
    #[test]
    fn classification_invariants(k in 2i64..5, eta in 0u64..2) {
        let d = image_conditions::<Padic3>(k, 0, eta, &light()).unwrap();
        prop_assert!(d.i1.iter().all(|i| !d.i2.contains(i)));
        let xs: Vec<Padic3> = d.conditions.iter().map(|c| c.x).collect();
        for (a, x) in xs.iter().enumerate() {
            prop_assert!(x.valuation().is_none_or(|v| v >= 1));
            prop_assert!(xs[a + 1..].iter().all(|y| (*x - *y).valuation().is_some()));
        }
        prop_assert!(classify_and_generators(&d).unwrap().divides_x_k);
    }
}
