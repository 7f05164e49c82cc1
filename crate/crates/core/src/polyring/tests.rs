use num_complex::Complex64;
use proptest::prelude::*;

use super::*;

fn p(s: &str) -> MixedPoly {
    parse_poly(s).unwrap()
}

fn c(re: i64, im: i64) -> ComplexRational {
    ComplexRational::from_ints(re, im)
}

#[test]
fn algebra_examples() {
    assert_eq!(p("abs2(z1)").add(&p("abs2(z1)")), p("2*abs2(z1)"));
    let prod = p("abs2(z1)").mul(&p("abs2(z2)"));
    assert_eq!(prod.num_terms(), 1);
    assert_eq!(prod.coeff(&Monomial::new(1, 1, 1, 1)), ComplexRational::one());
    let neg = p("abs2(z1)").scale(&rat_int(-1));
    assert_eq!(neg, p("-abs2(z1)"));
    assert!(neg.is_real());
}

#[test]
fn evaluation_examples() {
    assert_eq!(p("abs2(z1)^2").evaluate_real_exact(&c(3, 0), &c(0, 0)), Some(rat_int(81)));
    assert_eq!(p("abs2(z1*z2)").evaluate_real_exact(&c(1, 1), &c(2, 0)), Some(rat_int(8)));
    let g = p("abs2(z1)^4 + (15/7)*abs2(z1)*Re(z1^6)");
    assert_eq!(g.evaluate_real_exact(&c(1, 0), &c(0, 0)), Some(rat(22, 7)));
    let f = g.evaluate([Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    assert!((f - 22.0 / 7.0).abs() < 1e-14);
}

#[test]
fn homogeneity_examples() {
    assert_eq!(p("abs2(z1)^2 + abs2(z2)^2").weight(&rat_int(4), &rat_int(4)), Some(rat_int(1)));
    let e1 = p("abs2(z1)^4 + (15/7)*abs2(z1)*Re(z1^6) + abs2(z2)^5");
    let w = e1.infer_weights().unwrap();
    assert_eq!((w.m1, w.m2, w.r), (rat_int(8), rat_int(10), rat_int(1)));
    assert_eq!(p("abs2(z1)*abs2(z2) + abs2(z2)^3").weight(&rat_int(4), &rat_int(4)), None);
    let w = p("abs2(z1)*abs2(z2) + abs2(z2)^3").infer_weights().unwrap();
    assert_eq!((w.m1, w.m2), (rat_int(3), rat_int(6)));
}

#[test]
fn wirtinger_examples() {
    use DerivKind::*;
    use Var::*;
    assert_eq!(p("abs2(z1)").wirtinger(Z1, Holomorphic), p("conj(z1)"));
    assert_eq!(
        p("abs2(z1)^2").wirtinger(Z1, Holomorphic).wirtinger(Z1, Antiholomorphic),
        p("4*abs2(z1)")
    );
    assert_eq!(
        p("abs2(z1*z2)").wirtinger(Z1, Holomorphic).wirtinger(Z2, Antiholomorphic),
        p("conj(z1)*z2")
    );
}

#[test]
fn pluriharmonic_examples() {
    assert_eq!(p("abs2(z1)^2 + Re(z1^2*z2^2)").pluriharmonic_part(), p("Re(z1^2*z2^2)"));
    assert!(p("abs2(z1*z2)").pluriharmonic_part().is_zero());
    assert!(p("abs2(z1)^4 + (15/7)*abs2(z1)*Re(z1^6)").pluriharmonic_part().is_zero());
}

#[test]
fn canonical_text() {
    let g = p("abs2(z1)^4 + (15/7)*abs2(z1)*Re(z1^6)");
    assert_eq!(g.to_string(), "15/14*z1*conj(z1)^7 + z1^4*conj(z1)^4 + 15/14*z1^7*conj(z1)");
    assert_eq!(MixedPoly::zero().to_string(), "0");
    assert_eq!(p("-3 + abs2(z2)").to_string(), "-3 + z2*conj(z2)");
}

fn arb_coeff() -> impl Strategy<Value = ComplexRational> {
    (-20i64..20, 1i64..9, -20i64..20, 1i64..9)
        .prop_map(|(a, b, c, d)| ComplexRational::new(rat(a, b), rat(c, d)))
}

fn arb_mono(max: u32) -> impl Strategy<Value = Monomial> {
    (0..=max, 0..=max, 0..=max, 0..=max).prop_map(|(a, b, m, n)| Monomial::new(a, b, m, n))
}

/// Real polynomial built by symmetrizing random terms.
fn arb_real_poly() -> impl Strategy<Value = MixedPoly> {
    prop::collection::vec((arb_mono(3), arb_coeff()), 0..6).prop_map(|ts| {
        let half = MixedPoly::from_terms(ts);
        half.add(&half.conj())
    })
}

fn arb_point() -> impl Strategy<Value = [Complex64; 2]> {
    (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0)
        .prop_map(|(a, b, c, d)| [Complex64::new(a, b), Complex64::new(c, d)])
}

fn arb_gauss() -> impl Strategy<Value = ComplexRational> {
    (-6i64..6, 1i64..5, -6i64..6, 1i64..5)
        .prop_map(|(a, b, c, d)| ComplexRational::new(rat(a, b), rat(c, d)))
}

proptest! {
    #[test]
    fn real_polys_evaluate_real(q in arb_real_poly(), z in arb_point()) {
        prop_assert!(q.is_real());
        let v = q.evaluate_complex(z);
        prop_assert!(v.im.abs() <= 1e-12 * (1.0 + v.re.abs()) * (1.0 + q.coeff_l1()));
    }

    #[test]
    fn algebra_preserves_reality(a in arb_real_poly(), b in arb_real_poly(), s in -5i64..5) {
        prop_assert!(a.add(&b).is_real());
        prop_assert!(a.sub(&b).is_real());
        prop_assert!(a.mul(&b).is_real());
        prop_assert!(a.scale(&rat_int(s)).is_real());
    }

    #[test]
    fn substitutions_preserve_reality(a in arb_real_poly(), k in arb_gauss()) {
        prop_assert!(shear(&a, &k).is_real());
        prop_assert!(swap(&a).is_real());
        prop_assert!(power(&a, 2, 3).is_real());
    }

    #[test]
    fn format_round_trip(a in prop::collection::vec((arb_mono(3), arb_coeff()), 0..6)) {
        let q = MixedPoly::from_terms(a);
        let s = q.to_string();
        prop_assert_eq!(parse_poly(&s).unwrap(), q);
    }

    #[test]
    fn power_matches_point_map(a in arb_real_poly(), z1 in arb_gauss(), z2 in arb_gauss(), s1 in 1u32..4, s2 in 1u32..4) {
        let lhs = power(&a, s1, s2).evaluate_exact(&z1, &z2);
        let rhs = a.evaluate_exact(&z1.pow(s1), &z2.pow(s2));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn weighted_scaling(t in 0.1f64..3.0, z in arb_point()) {
        let q = p("abs2(z1)*abs2(z2) + abs2(z2)^3 + Re(z1^2*conj(z2)^2)");
        let (m1, m2) = (3.0, 6.0);
        let r = q.weight(&rat_int(3), &rat_int(6)).unwrap();
        prop_assert_eq!(r.clone(), rat_int(1));
        let scaled = [z[0] * t.powf(1.0 / m1), z[1] * t.powf(1.0 / m2)];
        let lhs = q.evaluate(scaled);
        let rhs = t * q.evaluate(z);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()) * q.coeff_l1());
    }
}
