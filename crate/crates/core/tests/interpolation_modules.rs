use coleman_core::interpolation::*;
use coleman_core::{Error, Exact3, Exact5, Matrix, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type E = Exact3;

fn e(n: i64) -> E {
    E::from_i64(n)
}

fn poly(cs: &[i64]) -> Poly<E> {
    Poly::from_i64s(cs)
}

#[test]
fn single_condition_basis() {
    let c = Condition {
        x: e(3),
        v: vec![vec![e(1), e(0)]],
    };
    let s = InterpolationModule::build(2, vec![c]).unwrap();
    assert_eq!(s.basis[0][0], poly(&[1]));
    assert_eq!(s.basis[0][1], poly(&[0]));
    assert_eq!(s.basis[1][0], poly(&[0, 0]));
    assert_eq!(s.basis[1][1], poly(&[-3, 1]));
    assert_eq!(s.det(), poly(&[-3, 1]));
}

#[test]
fn two_lines_give_product_determinant() {
    let conds = vec![
        Condition {
            x: e(3),
            v: vec![vec![e(1), e(2)]],
        },
        Condition {
            x: e(6),
            v: vec![vec![e(1), e(-1)]],
        },
    ];
    let s = InterpolationModule::build(2, conds).unwrap();
    let unit = s.det_unit().unwrap();
    assert!(unit.valuation().is_some());
    let expect = s.expected_det().scale(&unit);
    assert!(s.det().agreement(&expect, 4).is_some());
    assert_eq!(s.expected_det(), poly(&[18, -9, 1]));
}

#[test]
fn invalid_points_are_rejected() {
    let unit_point = vec![Condition { x: e(1), v: vec![] }];
    assert!(matches!(
        InterpolationModule::build(2, unit_point),
        Err(Error::Domain(_))
    ));
    let dup = vec![
        Condition { x: e(3), v: vec![] },
        Condition {
            x: e(3),
            v: vec![vec![e(1), e(0)]],
        },
    ];
    assert!(matches!(
        InterpolationModule::build(2, dup),
        Err(Error::DuplicatePoint(1))
    ));
}

#[test]
fn randomized_modules_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let d = rng.gen_range(2..=3);
        let count = rng.gen_range(0..=3);
        let s = InterpolationModule::<E>::build(d, random_conditions(&mut rng, d, count)).unwrap();
        s.det_unit().unwrap();
        for row in &s.basis {
            assert!(s.satisfies(row).unwrap());
        }
        for _ in 0..20 {
            // half members built from the basis, half arbitrary tuples
            let f: Vec<Poly<E>> = if rng.gen_bool(0.5) {
                let c: Vec<Poly<E>> = (0..d).map(|_| random_poly(&mut rng, 2)).collect();
                s.combine(&c)
            } else {
                (0..d).map(|_| random_poly(&mut rng, 4)).collect()
            };
            assert_eq!(s.satisfies(&f).unwrap(), s.contains(&f).unwrap());
        }
    }
}

#[test]
fn projection_images() {
    let conds = vec![
        Condition {
            x: e(3),
            v: vec![vec![e(0), e(1)]],
        },
        Condition {
            x: e(-3),
            v: vec![vec![e(2), e(1)]],
        },
    ];
    let s = InterpolationModule::build(2, conds).unwrap();
    let img = s.projection_image(0).unwrap();
    assert_eq!(img.j, vec![0]);
    assert_eq!(img.generator, poly(&[-3, 1]));
    assert!(s.satisfies(&img.witness).unwrap());
    assert!(s.contains(&img.witness).unwrap());
    let img1 = s.projection_image(1).unwrap();
    assert!(img1.j.is_empty());
    assert_eq!(img1.generator, poly(&[1]));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let c: Vec<Poly<E>> = (0..2).map(|_| random_poly(&mut rng, 3)).collect();
        let first = &s.combine(&c)[0];
        assert!(first.div_linear(&e(3)).is_ok());
    }
}

#[test]
fn change_of_basis() {
    let (a, rp) = change_basis::<E>(&[]).unwrap();
    assert_eq!(a, Matrix::from_i64s(&[&[1, 3], &[3, 1]]));
    assert!(rp.is_empty());
    let (_, rp) = change_basis(&[e(1)]).unwrap();
    assert_eq!(rp, vec![e(1)]);
    // r = −p forbids e_1 = p; r = −1/p forbids e_2 = p
    for r in [e(-3), E::from_ratio(-1, 3)] {
        let (a, rp) = change_basis(&[r]).unwrap();
        assert_eq!(a.get(0, 1), &e(9));
        assert!(rp[0].valuation().is_some());
    }
    let (a, _) = change_basis::<Exact5>(&[Exact5::from_i64(2)]).unwrap();
    assert_eq!(a.det().valuation(), Some(0));
}
