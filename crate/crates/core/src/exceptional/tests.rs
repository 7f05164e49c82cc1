use super::*;
use crate::polyring::parse_poly;

fn p(s: &str) -> MixedPoly {
    parse_poly(s).unwrap()
}

fn finite(set: &ExceptionalSet) -> Vec<Complex64> {
    set.lines.iter().filter(|l| !l.at_infinity).map(|l| l.center).collect()
}

#[test]
fn normalization_examples() {
    let (c, _) = normalize_coordinates(&p("abs2(z1)^2 + abs2(z1)*abs2(z2)")).unwrap();
    assert!(c.is_zero());
    let (c, q) = normalize_coordinates(&p("abs2(z1*z2)")).unwrap();
    assert_eq!(c, ComplexRational::one());
    assert!(!restriction_is_harmonic(&restrict_infinity(&q)));
    assert_eq!(normalize_coordinates(&p("Re(z1^4)")), Err(ExceptionalError::Pluriharmonic));
}

#[test]
fn difference_of_squares_has_two_lines() {
    let set = harmonic_lines(&p("abs2(z1^2 - z2^2)"), 1e-8).unwrap();
    assert!(!set.has_infinity());
    let mut zs = finite(&set);
    zs.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    assert_eq!(zs.len(), 2);
    assert!((zs[0] - Complex64::new(-1.0, 0.0)).norm() <= 1e-8);
    assert!((zs[1] - Complex64::new(1.0, 0.0)).norm() <= 1e-8);
    for l in &set.lines {
        assert!(l.width() <= 1e-8);
        assert!(l.exact.is_some());
        assert!(verify_line(&p("abs2(z1^2 - z2^2)"), l));
    }
}

#[test]
fn product_has_both_axes() {
    let set = harmonic_lines(&p("abs2(z1*z2)"), 1e-8).unwrap();
    assert!(set.has_infinity());
    assert_eq!(finite(&set), vec![Complex64::new(0.0, 0.0)]);
}

#[test]
fn sum_of_fourth_powers_has_none() {
    let set = harmonic_lines(&p("abs2(z1)^2 + abs2(z2)^2"), 1e-8).unwrap();
    assert!(set.is_empty());
    assert!(set.complete);
}

#[test]
fn irrational_line_gets_numeric_enclosure() {
    // harmonic along z1 = sqrt(2) z2 and z1 = -sqrt(2) z2
    let q = p("abs2(z1^2 - 2*z2^2)");
    let set = harmonic_lines(&q, 1e-9).unwrap();
    let zs = finite(&set);
    assert_eq!(zs.len(), 2);
    for l in &set.lines {
        assert!(l.exact.is_none());
        assert!(l.width() <= 1e-9, "width {}", l.width());
        assert!((l.center.norm() - 2f64.sqrt()).abs() <= 1e-9);
        assert!(verify_line(&q, l));
    }
}

#[test]
fn non_psh_input_is_rejected() {
    // restriction to z2 = 0 is -|z1|^4
    let err = harmonic_lines(&p("-abs2(z1)^2 + abs2(z2)^2"), 1e-6).unwrap_err();
    assert!(matches!(err, ExceptionalError::NotPlurisubharmonic { .. }));
}

#[test]
fn kohn_nirenberg_in_first_variable() {
    let set = harmonic_lines(&p("abs2(z1)^4 + (15/7)*abs2(z1)*Re(z1^6)"), 1e-8).unwrap();
    assert_eq!(set.lines.len(), 1);
    assert_eq!(set.lines[0].exact, Some(ComplexRational::zero()));
}

#[test]
fn weighted_example_has_only_the_axis() {
    let q = p("abs2(z1)*abs2(z2) + abs2(z2)^3");
    let set = harmonic_curves(&q, 3, 6, 1e-8).unwrap();
    assert_eq!(set.sigma, (2, 1));
    assert_eq!(set.lines.len(), 1);
    assert!(set.lines[0].at_infinity);
}

#[test]
fn weighted_with_equal_weights_matches_lines() {
    let q = p("abs2(z1^2 - z2^2)");
    let a = harmonic_curves(&q, 4, 4, 1e-8).unwrap();
    let b = harmonic_lines(&q, 1e-8).unwrap();
    assert_eq!(a, b);
}

#[test]
fn example_two_core_has_both_axes() {
    let q = p("abs2(z1*z2)^4 + (15/7)*abs2(z1*z2)*Re(z1^6*z2^6)");
    let set = harmonic_curves(&q, 16, 16, 1e-8).unwrap();
    assert!(set.has_infinity());
    assert_eq!(finite(&set), vec![Complex64::new(0.0, 0.0)]);
}

#[test]
fn weighted_orbits_collapse() {
    // the |z2|^8 term spoils harmonicity along z1 = z2^2
    let q = p("abs2(z1 - z2^2)^2 + abs2(z2)^4");
    assert!(harmonic_curves(&q, 4, 8, 1e-8).unwrap().is_empty());
    // pullback by (z1^2, z2) is harmonic on z1 = ±z2, a single orbit
    let r = p("abs2(z1 - z2^2)^2");
    let set = harmonic_curves(&r, 4, 8, 1e-8).unwrap();
    assert_eq!(set.sigma, (2, 1));
    let fin: Vec<_> = set.lines.iter().filter(|l| !l.at_infinity).collect();
    assert_eq!(fin.len(), 1);
    assert_eq!(fin[0].exact, Some(ComplexRational::one()));
    assert_eq!(set.pullback_lines.iter().filter(|l| !l.at_infinity).count(), 2);
}

#[test]
fn tolerance_reduction_keeps_count() {
    let q = p("abs2(z1^2 - 2*z2^2)");
    let a = harmonic_lines(&q, 1e-6).unwrap();
    let b = harmonic_lines(&q, 1e-7).unwrap();
    assert_eq!(a.lines.len(), b.lines.len());
    for (x, y) in a.lines.iter().zip(&b.lines) {
        assert!((x.center - y.center).norm() <= x.radius + y.radius);
    }
}
