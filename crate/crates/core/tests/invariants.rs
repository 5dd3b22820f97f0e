use std::collections::BTreeSet;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use siegel_theta::dims::dim_4_8;
use siegel_theta::isotropy::{is_isotropic, maximal_isotropic_groups, quotient_kernel, IsotropicGroup};
use siegel_theta::linalg::{adjugate_inverse, elementary_divisors, hnf, GramForm, IntMatrix, RatMatrix};
use siegel_theta::quadform::{enumerate_classes, enumerate_vectors, find_gram_roots, isometric, ClassConstraints};
use siegel_theta::relations::{cosets, epsilon_s};

fn int_matrix(rows: usize, cols: usize, lo: i64, hi: i64) -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec(lo..=hi, rows * cols).prop_map(move |d| IntMatrix::from_i64(rows, cols, &d).unwrap())
}

/// Product of random elementary column operations.
fn unimodular(n: usize) -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec((0..n, 0..n, -2i64..=2, any::<bool>()), 0..8).prop_map(move |ops| {
        let mut u = IntMatrix::identity(n);
        for (i, j, c, negate) in ops {
            let mut e = IntMatrix::identity(n);
            if i != j {
                e[(i, j)] = BigInt::from(c);
            } else if negate {
                e[(i, i)] = -BigInt::one();
            }
            u = &u * &e;
        }
        u
    })
}

/// `B'B + E`, always positive definite.
fn positive_form(n: usize) -> impl Strategy<Value = GramForm> {
    int_matrix(n, n, -1, 1).prop_map(move |b| {
        let s = &IntMatrix::identity(n).quad_sub(&b).unwrap() + &IntMatrix::identity(n);
        GramForm::new(s).unwrap()
    })
}

fn level_two_classes() -> &'static [GramForm] {
    static CLASSES: OnceLock<Vec<GramForm>> = OnceLock::new();
    CLASSES.get_or_init(|| enumerate_classes(&ClassConstraints::new(4, 2, false)).unwrap())
}

fn example_form() -> GramForm {
    GramForm::from_rows(&[&[2, 0, 1, 1], &[0, 2, 1, -1], &[1, 1, 2, 0], &[1, -1, 0, 2]]).unwrap()
}

fn example_groups() -> &'static [IsotropicGroup] {
    static GROUPS: OnceLock<Vec<IsotropicGroup>> = OnceLock::new();
    GROUPS.get_or_init(|| maximal_isotropic_groups(&example_form(), 4).unwrap())
}

fn frac(x: &BigRational) -> BigRational {
    x - x.floor()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn snf_divisors_form_a_chain(m in int_matrix(3, 4, -6, 6)) {
        let d = elementary_divisors(&m);
        for w in d.windows(2) {
            prop_assert!(!w[0].is_negative());
            if w[0].is_zero() {
                prop_assert!(w[1].is_zero());
            } else {
                prop_assert!(w[1].is_multiple_of(&w[0]));
            }
        }
    }

    #[test]
    fn hnf_is_idempotent(m in int_matrix(3, 4, -6, 6)) {
        let (h, u) = hnf(&m);
        prop_assert_eq!(&m * &u, h.clone());
        prop_assert_eq!(hnf(&h).0, h);
    }

    #[test]
    fn snf_ignores_unimodular_factors(m in int_matrix(3, 3, -5, 5), u in unimodular(3)) {
        let um = &u.transpose() * &m;
        prop_assert_eq!(elementary_divisors(&um), elementary_divisors(&m));
    }

    #[test]
    fn adjugate_inverse_inverts(m in int_matrix(3, 3, -4, 4)) {
        prop_assume!(!m.det().is_zero());
        let (inv, det) = adjugate_inverse(&m).unwrap();
        prop_assert_eq!(det, m.det());
        prop_assert_eq!(&inv * &m.to_rational(), RatMatrix::identity(3));
    }

    #[test]
    fn quad_sub_composes(a in int_matrix(3, 3, -3, 3), b in int_matrix(3, 3, -3, 3), c in int_matrix(3, 2, -3, 3)) {
        let a = &a + &a.transpose();
        let bc = &b * &c;
        prop_assert_eq!(a.quad_sub(&bc).unwrap(), a.quad_sub(&b).unwrap().quad_sub(&c).unwrap());
        let det = a.quad_sub(&b).unwrap().det();
        prop_assert_eq!(det, a.det() * b.det() * b.det());
    }

    #[test]
    fn enumerate_vectors_matches_box_scan(s in positive_form(3), m in 1u64..=8) {
        let lambda = s.min_eigen_lower_bound();
        let radius = (BigRational::from_integer(BigInt::from(m)) / lambda).to_f64().unwrap().sqrt().ceil() as i64;
        let mut expected = Vec::new();
        for x in -radius..=radius {
            for y in -radius..=radius {
                for z in -radius..=radius {
                    let v = vec![x, y, z];
                    if s.value(&v) == BigInt::from(m) {
                        expected.push(v);
                    }
                }
            }
        }
        expected.sort();
        prop_assert_eq!(enumerate_vectors(&s, m).unwrap(), expected);
    }

    #[test]
    fn isometry_is_an_equivalence(s in positive_form(3), u1 in unimodular(3), u2 in unimodular(3), u3 in unimodular(3)) {
        let s1 = GramForm::new(s.matrix().quad_sub(&u1).unwrap()).unwrap();
        let s2 = GramForm::new(s.matrix().quad_sub(&u2).unwrap()).unwrap();
        let s3 = GramForm::new(s.matrix().quad_sub(&u3).unwrap()).unwrap();
        let refl = isometric(&s1, &s1).unwrap().unwrap();
        prop_assert_eq!(&s1.matrix().quad_sub(&refl).unwrap(), s1.matrix());
        let w12 = isometric(&s1, &s2).unwrap().unwrap();
        prop_assert_eq!(&s1.matrix().quad_sub(&w12).unwrap(), s2.matrix());
        // the inverse witness goes the other way
        let back = w12.to_rational().inverse().unwrap().to_integral().unwrap();
        prop_assert_eq!(&s2.matrix().quad_sub(&back).unwrap(), s1.matrix());
        prop_assert!(isometric(&s2, &s1).unwrap().is_some());
        let w23 = isometric(&s2, &s3).unwrap().unwrap();
        prop_assert_eq!(&s1.matrix().quad_sub(&(&w12 * &w23)).unwrap(), s3.matrix());
    }

    #[test]
    fn gram_roots_have_square_determinant(a in int_matrix(4, 4, -1, 1)) {
        let det = a.det().abs();
        prop_assume!(!det.is_zero());
        let s = GramForm::new(IntMatrix::identity(4).quad_sub(&a).unwrap()).unwrap();
        let q = det.to_u64().unwrap();
        let roots = find_gram_roots(&s, &IntMatrix::zeros(4, 1), q, true).unwrap();
        prop_assert!(!roots.is_empty());
        for d in &roots {
            let r = d.root().det();
            prop_assert_eq!(&(&r * &r), s.det());
        }
    }

    #[test]
    fn conjugated_representatives_map_back_once(which in 0usize..6, u in unimodular(4)) {
        let reps = level_two_classes();
        let s = GramForm::new(reps[which].matrix().quad_sub(&u).unwrap()).unwrap();
        let hits: Vec<usize> = (0..reps.len()).filter(|&i| isometric(&reps[i], &s).unwrap().is_some()).collect();
        prop_assert_eq!(hits, vec![which]);
    }

    #[test]
    fn isotropy_depends_only_on_the_class(v in int_matrix(4, 1, 0, 7), x in int_matrix(4, 1, -2, 2), y in int_matrix(4, 1, -2, 2)) {
        let s = example_form();
        let shifted = &(&v + &x.scale(&BigInt::from(4))) + &(s.matrix() * &y);
        prop_assert_eq!(is_isotropic(&s, 4, &v).unwrap(), is_isotropic(&s, 4, &shifted).unwrap());
    }

    #[test]
    fn isotropic_groups_are_closed(which in 0usize..28, k in prop::collection::vec(-3i64..=3, 4)) {
        let groups = example_groups();
        let gens = groups[which % groups.len()].generators();
        let k = IntMatrix::from_i64(gens.cols(), 1, &k[..gens.cols()]).unwrap();
        prop_assert!(is_isotropic(&example_form(), 4, &(gens * &k)).unwrap());
    }

    #[test]
    fn cosets_match_brute_force(entries in prop::collection::vec((-4i64..=4, 1i64..=4), 4), g in 1usize..=2) {
        let m = RatMatrix::from_fractions(2, 2, &entries).unwrap();
        prop_assume!(!m.det().is_zero());
        let den = m.denominator().to_i64().unwrap();
        let mut classes = BTreeSet::new();
        for k0 in 0..den {
            for k1 in 0..den {
                let k = IntMatrix::from_i64(2, 1, &[k0, k1]).unwrap().to_rational();
                let mk = &m * &k;
                classes.insert((frac(&mk[(0, 0)]), frac(&mk[(1, 0)])));
            }
        }
        let reps = cosets(&m, g).unwrap();
        prop_assert_eq!(reps.len(), classes.len().pow(g as u32));
        let reduced: BTreeSet<Vec<BigRational>> = reps.iter().map(|x| x.data().iter().map(frac).collect()).collect();
        prop_assert_eq!(reduced.len(), reps.len());
    }

    #[test]
    fn epsilon_is_multiplicative(k in prop::sample::select(vec![1i64, 2, 4]), word1 in prop::collection::vec(0usize..4, 1..4), word2 in prop::collection::vec(0usize..4, 1..4)) {
        let gens = [
            IntMatrix::from_rows(&[&[13, 8], &[8, 5]]),
            IntMatrix::from_rows(&[&[5, -8], &[-8, 13]]),
            IntMatrix::from_rows(&[&[1, 0], &[8, 1]]),
            IntMatrix::from_rows(&[&[1, 8], &[0, 1]]),
        ];
        let product = |w: &[usize]| w.iter().fold(IntMatrix::identity(2), |acc, &i| &acc * &gens[i]);
        let (m1, m2) = (product(&word1), product(&word2));
        // level 4: 4S⁻¹ integral
        let s = GramForm::new(IntMatrix::diagonal(&[1, 1, 1, k].map(BigInt::from))).unwrap();
        let lhs = epsilon_s(&s, &(&m1 * &m2)).unwrap();
        prop_assert_eq!(lhs, epsilon_s(&s, &m1).unwrap() * epsilon_s(&s, &m2).unwrap());
    }
}

#[test]
fn quotient_kernels_are_integral_at_both_levels() {
    let s = example_form();
    for l in example_groups() {
        let (_, s_tilde) = quotient_kernel(&s, 4, l).unwrap();
        assert!(s_tilde.scaled_inverse_is_integral(&BigInt::from(4)));
    }
}

#[test]
fn maximal_groups_absorb_compatible_vectors() {
    let s = example_form();
    for l in example_groups() {
        for code in 0..256i64 {
            let x: Vec<i64> = (0..4).map(|i| (code >> (2 * i)) & 3).collect();
            let joined = l.generators().hstack(&IntMatrix::from_i64(4, 1, &x).unwrap()).unwrap();
            if is_isotropic(&s, 4, &joined).unwrap() {
                assert!(l.contains(&x.iter().map(|&v| BigInt::from(v)).collect::<Vec<_>>()), "{x:?}");
            }
        }
    }
}

#[test]
fn class_determinants_divide_the_level_power() {
    for (c, square) in [(2u64, false), (4, true)] {
        let c4 = BigInt::from(c).pow(4);
        for s in enumerate_classes(&ClassConstraints::new(4, c, square)).unwrap() {
            assert!(c4.is_multiple_of(s.det()));
        }
    }
}

#[test]
fn level_two_numerator_is_divisible_by_three() {
    for g in 1..=64u32 {
        let n: BigInt = ((BigInt::one() << g) + 1) * ((BigInt::one() << (g - 1)) + 1);
        assert!(n.is_multiple_of(&BigInt::from(3)), "g = {g}");
    }
}

#[test]
fn level_four_eight_correction_is_nonnegative() {
    for g in 1..=64u32 {
        let r = dim_4_8(g).unwrap();
        assert!(r.paths_agree());
        let n: BigInt = (BigInt::one() << (g - 1)) * ((BigInt::one() << g) + 1) + 3;
        let binom = &n * (&n - 1) * (&n - 2) * (&n - 3) / 24;
        assert!(r.value <= binom, "g = {g}");
    }
}
