mod common;

use common::c;
use proptest::prelude::*;
use starframe::identities::{
    accelerated_from_parts, accelerated_partial_sum, check_cube_trick, check_simple_split,
    check_square_trick, check_symmetric_split, check_triframe_identity, random_contraction,
    resolvent, spectral_radius, ContractionPair, PartResolvents, ProductCounter,
};
use starframe::Mat;

/// Direct inverse of `I - M` through a plain LU solve, no shared helper.
fn direct_inverse(m: &Mat) -> Mat {
    let d = m.nrows();
    (Mat::identity(d, d) - m).lu().try_inverse().unwrap()
}

fn mat2(a: [f64; 4]) -> Mat {
    Mat::from_row_slice(
        2,
        2,
        &[c(a[0], 0.0), c(a[1], 0.0), c(a[2], 0.0), c(a[3], 0.0)],
    )
}

#[test]
fn seeded_pairs_are_reproducible() {
    let a = random_contraction(7, 4, 2, 0.5).unwrap();
    let b = random_contraction(7, 4, 2, 0.5).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, random_contraction(8, 4, 2, 0.5).unwrap());
}

#[test]
fn target_radius_is_hit() {
    for seed in 0..20 {
        let p = random_contraction(seed, 4, 2, 0.5).unwrap();
        let rho = spectral_radius(&p.sum());
        assert!((0.4999..=0.5001).contains(&rho), "seed {seed}: {rho}");
    }
    let s = random_contraction(3, 1, 2, 0.5).unwrap();
    assert!((s.sum()[(0, 0)].norm() - 0.5).abs() <= 1e-12);
}

#[test]
fn nilpotent_pair_against_hand_inverse() {
    let pair =
        ContractionPair::new(vec![mat2([0.0, 0.3, 0.0, 0.0]), mat2([0.0, 0.0, 0.2, 0.0])]).unwrap();
    let oracle = mat2([1.0, 0.3, 0.2, 1.0]) / c(0.94, 0.0);
    assert!((resolvent(&pair.sum()).unwrap() - &oracle).norm() <= 1e-15);
    assert!(check_simple_split(&pair).unwrap() <= 1e-15);
    assert!(check_symmetric_split(&pair).unwrap() <= 1e-15);
}

#[test]
fn vanishing_parts_give_zero_residual() {
    let p = random_contraction(11, 3, 2, 0.6).unwrap();
    let z = Mat::zeros(3, 3);
    let only0 = ContractionPair::new(vec![p.m0().clone(), z.clone()]).unwrap();
    let only1 = ContractionPair::new(vec![z.clone(), p.m1().clone()]).unwrap();
    assert!(check_simple_split(&only0).unwrap() <= 1e-15);
    assert!(check_symmetric_split(&only1).unwrap() <= 1e-15);
    let solo = ContractionPair::new(vec![p.m0().clone(), z.clone(), z]).unwrap();
    assert!(check_triframe_identity(&solo).unwrap() <= 1e-15);
}

#[test]
fn dim8_pairs_at_high_radius() {
    for seed in 0..100 {
        let p = random_contraction(1000 + seed, 8, 2, 0.9).unwrap();
        let r = direct_inverse(&p.sum());
        let rhs =
            resolvent(p.m1()).unwrap() * direct_inverse(&(p.m0() * resolvent(p.m1()).unwrap()));
        assert!((&r - rhs).norm() / r.norm() <= 1e-12);
        assert!(check_simple_split(&p).unwrap() <= 1e-12, "seed {seed}");
    }
}

#[test]
fn dim6_triples_at_high_radius() {
    for seed in 0..100 {
        let p = random_contraction(2000 + seed, 6, 3, 0.9).unwrap();
        assert!(check_triframe_identity(&p).unwrap() <= 1e-11, "seed {seed}");
    }
}

#[test]
fn symmetric_split_is_role_blind() {
    for seed in 0..20 {
        let p = random_contraction(seed, 4, 2, 0.9).unwrap();
        let a = check_symmetric_split(&p).unwrap();
        let b = check_symmetric_split(&p.permuted(&[1, 0])).unwrap();
        assert!((a - b).abs() <= 1e-12);
    }
}

#[test]
fn third_part_zero_matches_two_part_formula() {
    let p = random_contraction(5, 4, 2, 0.7).unwrap();
    let z = Mat::zeros(4, 4);
    let t = ContractionPair::new(vec![p.m0().clone(), p.m1().clone(), z]).unwrap();
    let r = direct_inverse(&p.sum());
    let rhs = starframe::identities::triframe_rhs(&t).unwrap();
    assert!((r - rhs).norm() <= 1e-13);
}

#[test]
fn polynomial_tricks_trivial_cases() {
    let zero = Mat::zeros(3, 3);
    for m in 0..3 {
        let sq = check_square_trick(&zero, m).unwrap();
        assert_eq!((sq.identity_residual, sq.polynomial_residual), (0.0, 0.0));
    }
    let p = random_contraction(9, 4, 2, 0.8).unwrap();
    assert!(check_square_trick(&p.sum(), 0).unwrap().polynomial_residual <= 1e-15);
    assert!(check_cube_trick(&p.sum(), 0).unwrap().polynomial_residual <= 1e-15);
}

#[test]
fn acceleration_uses_m_plus_one_products() {
    let p = random_contraction(4, 4, 2, 0.5).unwrap();
    let parts = PartResolvents::new(&p).unwrap();
    for m in 0..10 {
        let counter = ProductCounter::default();
        accelerated_from_parts(&parts, m, &counter);
        assert_eq!(counter.count(), m + 1, "m = {m}");
    }
}

#[test]
fn acceleration_converges_to_resolvent() {
    let p = random_contraction(21, 4, 2, 0.5).unwrap();
    let r = direct_inverse(&p.sum());
    let acc = accelerated_partial_sum(&p, 40).unwrap();
    assert!((acc - &r).norm() / r.norm() <= 1e-12);
    let z = Mat::zeros(4, 4);
    let only0 = ContractionPair::new(vec![p.m0().clone(), z]).unwrap();
    let exact = direct_inverse(only0.m0());
    assert!((accelerated_partial_sum(&only0, 0).unwrap() - exact).norm() <= 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identities_hold_for_any_seed(seed in any::<u64>(), dim in 1usize..7, rho in 0.05f64..0.95) {
        let p = random_contraction(seed, dim, 3, rho).unwrap();
        let two = ContractionPair::new(p.parts[..2].to_vec()).unwrap();
        if two.rho < 0.97 {
            prop_assert!(check_simple_split(&two).unwrap() <= 1e-11);
            prop_assert!(check_symmetric_split(&two).unwrap() <= 1e-11);
        }
        prop_assert!(check_triframe_identity(&p).unwrap() <= 1e-11);
    }

    #[test]
    fn spectral_radius_is_homogeneous(seed in any::<u64>(), dim in 1usize..6, s in 0.1f64..4.0) {
        let p = random_contraction(seed, dim, 2, 0.6).unwrap();
        let m = p.sum();
        let rho = spectral_radius(&(&m * c(s, 0.0)));
        prop_assert!((rho - s * spectral_radius(&m)).abs() <= 1e-9 * s);
    }
}
