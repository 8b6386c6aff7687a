use coleman_core::mellin::{frak_n, phi, psi, t_series, u_power, Outcome};
use coleman_core::wach::*;
use coleman_core::{Error, Exact3, Matrix, Padic3, Padic5, PadicField, PiSeries, PrecisionProfile, Scalar, XSeries};
use proptest::prelude::*;

fn profile() -> PrecisionProfile {
    PrecisionProfile::new(20, 200, 32).unwrap()
}

fn light() -> PrecisionProfile {
    PrecisionProfile::new(15, 80, 16).unwrap()
}

fn builtins() -> Vec<WachKind> {
    vec![
        WachKind::Twist(0),
        WachKind::Twist(1),
        WachKind::Twist(2),
        WachKind::Twist(3),
        WachKind::Ap0 { k: 2 },
        WachKind::Ap0 { k: 4 },
        WachKind::Weight2 { ap: 3 },
    ]
}

#[test]
fn twist_one_embedding_is_t_over_pi() {
    let w = WachModuleData::<Padic3>::assemble(WachKind::Twist(1)).unwrap();
    let e = embedding_matrix(&w, 30).unwrap();
    let t_over_pi = t_series::<Padic3>(31).pi_power_divide(1).unwrap().truncate(30);
    let prec = e.get(0, 0).agreement(&t_over_pi, 30).expect("E = t/π");
    assert!(prec >= 20, "precision {prec}");
    assert_eq!(e.at_zero(), Matrix::identity(1));
}

#[test]
fn embedding_residual_vanishes() {
    for k in [2, 4] {
        let w = WachModuleData::<Padic3>::assemble(WachKind::Ap0 { k }).unwrap();
        let e = embedding_matrix(&w, 40).unwrap();
        assert_eq!(e.at_zero(), Matrix::identity(2));
        assert_eq!(embedding_residual(&w, &e, 40), None);
    }
}

#[test]
fn embedding_matches_exact_rationals() {
    // the recursion has rational coefficients, so exact arithmetic is an oracle
    let deg = 12;
    let we = WachModuleData::<Exact3>::assemble(WachKind::Weight2 { ap: 3 }).unwrap();
    let ee = embedding_matrix(&we, deg).unwrap();
    assert_eq!(embedding_residual(&we, &ee, deg), None);
    let wp = WachModuleData::<Padic3>::assemble(WachKind::Weight2 { ap: 3 }).unwrap();
    let ep = embedding_matrix(&wp, deg).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            for n in 0..=deg {
                let exact = ee.get(i, j).coeff(n).unwrap().to_bigrational();
                let approx = ep.get(i, j).coeff(n).unwrap();
                let diff = Padic3::from_bigrational(&exact) - approx;
                assert!(diff.valuation().is_none(), "E[{i}{j}] degree {n}");
                assert!(diff.abs_prec() >= 25);
            }
        }
    }
}

#[test]
fn sylvester_and_telescoping_agree() {
    for kind in [
        WachKind::Twist(2),
        WachKind::Ap0 { k: 2 },
        WachKind::Ap0 { k: 4 },
        WachKind::Weight2 { ap: 3 },
    ] {
        let w = WachModuleData::<Padic3>::assemble(kind.clone()).unwrap();
        let a = embedding_matrix(&w, 30).unwrap();
        let b = embedding_matrix_telescoping(&w, 30, 400).unwrap();
        for i in 0..w.dim() {
            for j in 0..w.dim() {
                let prec = a
                    .get(i, j)
                    .agreement(b.get(i, j), 30)
                    .unwrap_or_else(|| panic!("{kind:?} [{i}{j}]"));
                assert!(prec >= 15, "{kind:?} [{i}{j}] precision {prec}");
            }
        }
    }
}

#[test]
fn resonant_data_is_reported() {
    // Ã = diag(1, p): the eigenvalue ratio p resonates at π-degree 1
    let kind = WachKind::Custom {
        p_tilde: vec![vec![vec![1], vec![0]], vec![vec![0], vec![3]]],
        shift: 0,
        weights: vec![0, 0],
    };
    let w = WachModuleData::<Padic3>::assemble(kind).unwrap();
    assert!(matches!(embedding_matrix(&w, 10), Err(Error::Resonance(1))));
}

#[test]
fn invalid_data_is_rejected() {
    let singular = WachKind::Custom {
        p_tilde: vec![vec![vec![0, 1], vec![0]], vec![vec![0], vec![1]]],
        shift: 0,
        weights: vec![0, 0],
    };
    assert!(matches!(
        WachModuleData::<Padic3>::assemble(singular),
        Err(Error::InvalidWachData(_))
    ));
    // weights claim more than det P̃ carries
    let budget = WachKind::Custom {
        p_tilde: vec![vec![vec![1]]],
        shift: 2,
        weights: vec![1],
    };
    assert!(matches!(
        build_wach::<Padic3>(budget, &profile()),
        Err(Error::InvalidWachData(_))
    ));
    assert!(matches!(
        WachModuleData::<Padic3>::assemble(WachKind::Twist(-1)),
        Err(Error::InvalidWachData(_))
    ));
    assert!(matches!(
        WachModuleData::<Padic3>::assemble(WachKind::Weight2 { ap: 1 }),
        Err(Error::OrdinaryUnsupported)
    ));
}

#[test]
fn builtins_validate_and_recover_weights() {
    for kind in builtins() {
        let w = build_wach::<Padic3>(kind.clone(), &profile()).unwrap();
        let h = hodge_filtration(&w, &profile()).unwrap();
        assert_eq!(h.weights, w.base.jumps, "{kind:?}");
    }
    let w = build_wach::<Padic3>(WachKind::Ap0 { k: 4 }, &profile()).unwrap();
    assert_eq!(hodge_filtration(&w, &profile()).unwrap().weights, vec![0, 3]);
    let w = build_wach::<Padic3>(WachKind::Twist(2), &profile()).unwrap();
    assert_eq!(hodge_filtration(&w, &profile()).unwrap().weights, vec![2]);
    let w = build_wach::<Padic3>(WachKind::Weight2 { ap: 0 }, &profile()).unwrap();
    assert_eq!((w.base.n_i(0), w.base.n_i(1)), (1, 2));
    let w5 = build_wach::<Padic5>(WachKind::Weight2 { ap: 5 }, &profile()).unwrap();
    assert_eq!(hodge_filtration(&w5, &profile()).unwrap().weights, vec![0, 1]);
}

#[test]
fn log_matrix_at_zero_is_frobenius_transpose() {
    let w = build_wach::<Padic3>(WachKind::Ap0 { k: 2 }, &profile()).unwrap();
    let l = log_matrix(&w, &profile()).unwrap();
    assert!(l.checks.m0_is_a_transpose);
    assert_eq!(l.m.at_zero(), w.a_v().transpose());
    let rescaled = l.m.at_zero().scale(&Padic3::from_i64(3));
    assert_eq!(rescaled, Matrix::from_i64s(&[&[0, 3], &[-1, 0]]));
    assert!(l.checks.roundtrip_precision.is_some_and(|p| p >= 10));
}

#[test]
fn log_matrix_entries_are_psi_zero() {
    let w = build_wach::<Padic3>(WachKind::Weight2 { ap: 3 }, &profile()).unwrap();
    let l = log_matrix(&w, &profile()).unwrap();
    assert!(l.checks.gamma1_component);
    for row in &l.mellin_side.entries {
        for g in row {
            assert!(psi(g).coeffs().iter().all(|c| c.valuation().is_none()));
        }
    }
}

#[test]
fn twist_log_matrix_is_an_associate_of_frak_n() {
    for r in 1..=3i64 {
        let w = build_wach::<Padic3>(WachKind::Twist(r), &profile()).unwrap();
        let l = log_matrix(&w, &profile()).unwrap();
        // the Mellin side is (1+π)(t/φ(π))^r = (1+π)·p^{−r}·φ(t/π)^r
        let deg = l.mellin_side.get(0, 0).high();
        let t_over_pi = t_series::<Padic3>(deg + 1).pi_power_divide(1).unwrap().truncate(deg);
        let phi_r = phi(&t_over_pi, deg)
            .pow(r as usize)
            .scale(&Padic3::from_i64(3).pow_i(-r));
        let expect = (&PiSeries::from_i64s(&[1, 1]) * &phi_r).truncate(deg);
        assert!(l.mellin_side.get(0, 0).agreement(&expect, deg).is_some());
        let report = divisor_check(&l).unwrap();
        assert_eq!(report.outcome(), Outcome::Pass, "r={r}: {}", report.summary());
        let n_r = frak_n::<Padic3>(r as usize, 32).unwrap();
        for i in 0..r {
            let x = u_power::<Padic3>(i) - Padic3::from_i64(1);
            assert!(n_r.eval(&x).unwrap().valuation().is_some());
            assert!(l.m.get(0, 0).eval(&x).unwrap().valuation().is_some());
        }
    }
}

#[test]
fn divisor_check_passes_for_modular_data() {
    let cases3 = [
        WachKind::Ap0 { k: 2 },
        WachKind::Ap0 { k: 4 },
        WachKind::Weight2 { ap: 3 },
    ];
    for kind in cases3 {
        let w = build_wach::<Padic3>(kind.clone(), &profile()).unwrap();
        let r = divisor_check(&log_matrix(&w, &profile()).unwrap()).unwrap();
        assert_eq!(r.outcome(), Outcome::Pass, "{kind:?}: {}", r.summary());
    }
    let w = build_wach::<Padic5>(WachKind::Ap0 { k: 2 }, &profile()).unwrap();
    let r = divisor_check(&log_matrix(&w, &profile()).unwrap()).unwrap();
    assert_eq!(r.outcome(), Outcome::Pass, "{}", r.summary());
}

#[test]
fn wrong_divisor_fails_growth_heuristic() {
    let w = build_wach::<Padic3>(WachKind::Twist(1), &profile()).unwrap();
    let l = log_matrix(&w, &profile()).unwrap();
    let det = l.m.det();
    // dividing by one 𝔫 too many leaves 1/δ_1, which has poles in the disc
    let wrong = frak_n_product::<Padic3>(&[2], 32).unwrap();
    let q = (&det * &wrong.invert(32).unwrap()).truncate(32);
    assert_eq!(coleman_core::mellin::bounded_growth(&q, 1), Outcome::Fail);
}

fn value_ratio<S: PadicField>(m: &XSeries<S>, n: &XSeries<S>, s: i64) -> S {
    let x = u_power::<S>(s) - S::one();
    m.eval(&x).unwrap() / n.eval(&x).unwrap()
}

#[test]
fn twist_value_ratios_have_constant_valuation() {
    let w = build_wach::<Padic3>(WachKind::Twist(1), &profile()).unwrap();
    let l = log_matrix(&w, &profile()).unwrap();
    let n1 = frak_n::<Padic3>(1, 32).unwrap();
    for s in 1..=6 {
        assert_eq!(value_ratio(l.m.get(0, 0), &n1, s).valuation(), Some(-1));
    }
}

#[test]
fn naive_lift_with_nonzero_ap_is_rejected() {
    // [[0, −1], [q², a_p]] is not a Wach module for k = 3, a_p = 3
    let q2: Vec<i64> = q_power::<Exact3>(2)
        .coeffs()
        .iter()
        .map(|c| c.to_bigrational().to_integer().try_into().unwrap())
        .collect();
    let kind = WachKind::Custom {
        p_tilde: vec![vec![vec![0], vec![-1]], vec![q2, vec![3]]],
        shift: 2,
        weights: vec![0, 2],
    };
    assert!(matches!(
        build_wach::<Padic3>(kind, &profile()),
        Err(Error::InvalidWachData(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn modular_invariants_hold(k in 2i64..=5, m in -1i64..=1) {
        let kind = if k == 2 { WachKind::Weight2 { ap: 3 * m } } else { WachKind::Ap0 { k } };
        let w = build_wach::<Padic3>(kind, &light()).unwrap();
        let e = embedding_matrix(&w, 24).unwrap();
        prop_assert_eq!(embedding_residual(&w, &e, 24), None);
        let l = log_matrix(&w, &light()).unwrap();
        prop_assert!(l.checks.m0_is_a_transpose);
        prop_assert_eq!(hodge_filtration(&w, &light()).unwrap().weights, vec![0, k - 1]);
    }

    #[test]
    fn twist_invariants_hold(r in 0i64..=4) {
        let w = build_wach::<Padic3>(WachKind::Twist(r), &light()).unwrap();
        let l = log_matrix(&w, &light()).unwrap();
        prop_assert_eq!(l.m.at_zero(), w.a_v().transpose());
        prop_assert_eq!(divisor_check(&l).unwrap().outcome(), Outcome::Pass);
    }
}

#[test]
fn closed_form_frak_n_values_match_series() {
    for k in 1..=3u32 {
        let n = frak_n::<Padic3>(k as usize, 60).unwrap();
        for i in 0..5u32 {
            let x = u_power::<Padic3>(i as i64) - Padic3::from_i64(1);
            let by_series = n.eval(&x).unwrap();
            let closed = frak_n_value::<Padic3>(k, i);
            let diff = by_series - closed;
            assert!(diff.valuation().is_none() && diff.abs_prec() >= 10, "k={k} i={i}");
        }
    }
}
