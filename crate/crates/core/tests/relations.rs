use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use siegel_theta::isotropy::maximal_isotropic_groups;
use siegel_theta::linalg::{rat, GramForm, IntMatrix, RatMatrix};
use siegel_theta::quadform::{enumerate_classes, ClassConstraints};
use siegel_theta::relations::{
    check_transformation, expand_to_nullwerte, mumford_relation, nullwert_product_to_level_four, random_point,
    reduce_via_gram_root, sample_instance, theta_inclusion, MumfordInstance, SampleLimits,
};
use siegel_theta::theta::{theta_general, theta_sv, Characteristic, SiegelPoint, ThetaConfig};

fn example() -> GramForm {
    GramForm::from_rows(&[&[2, 0, 1, 1], &[0, 2, 1, -1], &[1, 1, 2, 0], &[1, -1, 0, 2]]).unwrap()
}

fn witness() -> IntMatrix {
    IntMatrix::from_rows(&[&[13, 8], &[8, 5]])
}

#[test]
fn seeded_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = ThetaConfig::default();
    let start = Instant::now();
    let mut nontrivial = 0;
    for k in 0..50 {
        let (inst, tau) = sample_instance(&mut rng, &SampleLimits::default()).unwrap();
        let res = mumford_relation(&inst, &tau, &cfg).unwrap();
        let bound = res.lhs.bound + res.rhs.bound;
        assert!(bound <= 1e-8, "instance {k}: bound {bound}");
        assert!(res.residual <= bound, "instance {k}: residual {} > {bound} for {inst:?}", res.residual);
        if res.k1 * res.k2 > 1 {
            nontrivial += 1;
        }
    }
    eprintln!("50 instances in {:?}, {nontrivial} with nontrivial cosets", start.elapsed());
    assert!(nontrivial >= 25);
}

#[test]
fn identity_transform_is_tight() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = ThetaConfig::with_eps(1e-12);
    for _ in 0..5 {
        let (inst, tau) = sample_instance(&mut rng, &SampleLimits::default()).unwrap();
        let r = inst.t().rows();
        let same = MumfordInstance::new(inst.t().clone(), RatMatrix::identity(r), inst.p().clone(), inst.q().clone()).unwrap();
        let res = mumford_relation(&same, &tau, &cfg).unwrap();
        assert_eq!((res.k1, res.k2), (1, 1));
        assert!(res.residual <= 1e-12);
    }
}

#[test]
fn nonzero_p_gives_nontrivial_phases() {
    // S = E/4 read backwards: T = E/4, A = 2E; K₂ has 2^{rg} elements
    let inst = MumfordInstance::new(
        RatMatrix::identity(2).scale(&rat(1, 4)),
        RatMatrix::identity(2).scale(&rat(2, 1)),
        RatMatrix::from_fractions(2, 1, &[(1, 1), (0, 1)]).unwrap(),
        RatMatrix::from_fractions(2, 1, &[(1, 4), (0, 1)]).unwrap(),
    )
    .unwrap();
    let tau = SiegelPoint::from_parts(1, &[0.1], &[0.8]).unwrap();
    let res = mumford_relation(&inst, &tau, &ThetaConfig::default()).unwrap();
    assert_eq!(res.k2, 4);
    assert!(res.residual <= res.lhs.bound + res.rhs.bound);
}

#[test]
fn level_four_unit_series_as_nullwert_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = ThetaConfig::default();
    for v in [
        IntMatrix::from_rows(&[&[0], &[0]]),
        IntMatrix::from_rows(&[&[1], &[2]]),
        IntMatrix::from_rows(&[&[3], &[1], &[0]]),
        IntMatrix::from_rows(&[&[1, 0], &[2, 3]]),
    ] {
        let tau = random_point(&mut rng, v.cols(), 0.4).unwrap();
        let lc = expand_to_nullwerte(&v).unwrap();
        assert_eq!(lc.len(), 1 << (v.rows() * v.cols()));
        let lhs = theta_sv(&GramForm::identity(v.rows()), 4, &v, &tau, &cfg).unwrap();
        let rhs = lc.simplify().evaluate(&tau, &cfg).unwrap();
        assert!((lhs.value - rhs.value).norm() <= lhs.bound + rhs.bound + 1e-12);
    }
}

#[test]
fn nullwert_products_as_level_four_series() {
    let cfg = ThetaConfig::default();
    let tau = SiegelPoint::from_parts(1, &[0.2], &[0.7]).unwrap();
    let h = |x: i64| rat(x, 2);
    for chars in [
        vec![(vec![h(0)], vec![h(0)]); 4],
        vec![(vec![h(0)], vec![h(1)]), (vec![h(1)], vec![h(0)])],
        vec![(vec![h(1)], vec![h(0)]), (vec![h(0)], vec![h(0)]), (vec![h(0)], vec![h(1)])],
    ] {
        let lc = nullwert_product_to_level_four(&chars).unwrap();
        let expected = siegel_theta::theta::nullwert_product(&chars, &tau, &cfg).unwrap();
        let got = lc.evaluate(&tau, &cfg).unwrap();
        assert!((got.value - expected.value).norm() <= got.bound + expected.bound + 1e-12);
    }
}

#[test]
fn gram_root_reduction_of_the_example() {
    let a1 = IntMatrix::from_rows(&[&[0, 1, 0, 0], &[0, 1, 1, -1], &[1, 0, 0, 0], &[1, 0, 1, 1]]);
    let v1 = IntMatrix::from_rows(&[&[0, 0, 0, 1], &[0, 0, 1, 0], &[0, 1, 0, 0], &[2, 1, 0, 0]]);
    let cfg = ThetaConfig::default();
    let tau = SiegelPoint::from_parts(1, &[0.3], &[0.9]).unwrap();
    for j in 0..4 {
        let v = v1.select_columns([j]);
        let lc = reduce_via_gram_root(&example(), &v, &a1).unwrap().simplify();
        let lhs = theta_sv(&example(), 4, &v, &tau, &cfg).unwrap();
        let rhs = lc.evaluate(&tau, &cfg).unwrap();
        assert!((lhs.value - rhs.value).norm() <= lhs.bound + rhs.bound + 1e-12, "column {j}");
    }
    // a root that does not transport V is refused
    let a3 = IntMatrix::from_rows(&[&[0, 0, 0, 1], &[0, 0, 1, 0], &[1, 1, 1, 0], &[1, -1, 0, 1]]);
    assert!(reduce_via_gram_root(&example(), &v1, &a3).is_err());
}

#[test]
fn inclusion_into_the_quotient_form() {
    let cfg = ThetaConfig::default();
    let tau = SiegelPoint::from_parts(1, &[-0.1], &[0.8]).unwrap();
    for l in maximal_isotropic_groups(&example(), 4).unwrap() {
        let inc = theta_inclusion(&example(), 4, &l).unwrap();
        for (v, lc) in &inc.images {
            let lhs = theta_sv(&example(), 4, v, &tau, &cfg).unwrap();
            let rhs = lc.evaluate(&tau, &cfg).unwrap();
            assert!((lhs.value - rhs.value).norm() <= lhs.bound + rhs.bound + 1e-12);
        }
    }
}

#[test]
fn general_theta_is_periodic_in_the_first_characteristic() {
    let s = RatMatrix::from_fractions(2, 2, &[(3, 2), (1, 4), (1, 4), (1, 1)]).unwrap();
    let a = RatMatrix::from_fractions(2, 1, &[(1, 3), (-1, 4)]).unwrap();
    let b = RatMatrix::from_fractions(2, 1, &[(1, 2), (1, 4)]).unwrap();
    let shifted = &a + &RatMatrix::from_fractions(2, 1, &[(1, 1), (-2, 1)]).unwrap();
    let tau = SiegelPoint::from_parts(1, &[0.25], &[0.6]).unwrap();
    let cfg = ThetaConfig::default();
    let x = theta_general(&s, &Characteristic::new(a, b.clone()).unwrap(), &tau, &cfg).unwrap();
    let y = theta_general(&s, &Characteristic::new(shifted, b).unwrap(), &tau, &cfg).unwrap();
    assert!((x.value - y.value).norm() <= 1e-10);
}

fn relaxed() -> ThetaConfig {
    ThetaConfig { min_imag: 0.005, ..ThetaConfig::with_eps(1e-9) }
}

#[test]
fn multiplier_is_minus_one_for_determinant_two() {
    let s = GramForm::from_rows(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 2]]).unwrap();
    let tau = SiegelPoint::scalar_imaginary(1, 1.0).unwrap();
    let start = Instant::now();
    let res = check_transformation(&s, &witness(), &tau, &relaxed()).unwrap();
    eprintln!("transformation check at i in {:?}", start.elapsed());
    assert_eq!(res.epsilon, -1);
    assert!((res.ratio - Complex64::new(-1.0, 0.0)).norm() <= 1e-6);
    assert!(res.residual <= 1e-6);
}

#[test]
fn multiplier_is_trivial_for_square_determinants() {
    let tau = SiegelPoint::from_parts(1, &[-0.625], &[0.15]).unwrap();
    let start = Instant::now();
    for s in enumerate_classes(&ClassConstraints::new(4, 4, true)).unwrap() {
        let res = check_transformation(&s, &witness(), &tau, &relaxed()).unwrap();
        assert_eq!(res.epsilon, 1);
        assert!((res.ratio - Complex64::new(1.0, 0.0)).norm() <= 1e-6, "S = {:?}: ratio {}", s.matrix(), res.ratio);
    }
    eprintln!("16 classes in {:?}", start.elapsed());
}
