use super::*;
use crate::certify::{certify_psd, random_sphere_points, CertifyOptions, Region, Target};
use crate::exceptional::harmonic_lines;
use crate::polyring::parse_poly;
use crate::structure::{GridSpec, WedgeCap};
use proptest::prelude::*;

fn p(s: &str) -> MixedPoly {
    parse_poly(s).unwrap()
}

const G: &str = "abs2(z1)^4 + (15/7)*abs2(z1)*Re(z1^6)";
const P31: &str = "abs2(z1)^2 + abs2(z1)*abs2(z2)";

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn close(a: &HermitianForm2, b: &HermitianForm2, tol: f64) -> bool {
    let d = a.add(&b.scale(-1.0));
    d.norm() <= tol * (1.0 + a.norm())
}

#[test]
fn smooth_step_is_a_step() {
    assert_eq!(smooth_step(-1.0), 0.0);
    assert_eq!(smooth_step(0.0), 0.0);
    assert_eq!(smooth_step(1.0), 1.0);
    assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
    let cut = SmoothProfile::RadialCutoff { inner: 0.25, outer: 1.0 };
    assert_eq!(cut.value(0.1), 1.0);
    assert_eq!(cut.value(1.5), 0.0);
    let xs: Vec<f64> = (0..100).map(|i| 0.25 + 0.75 * i as f64 / 99.0).collect();
    assert!(xs.windows(2).all(|w| cut.value(w[0]) >= cut.value(w[1])));
}

#[test]
fn fourier_derivatives_match_differences() {
    let h = SmoothProfile::Fourier { a0: 0.3, cos: vec![0.1, -0.05], sin: vec![0.02, 0.07] };
    let e = 1e-4;
    for x in [0.0, 0.7, 2.0, 5.5] {
        let (v, d1, d2) = h.eval(x);
        let (vp, vm) = (h.value(x + e), h.value(x - e));
        assert!((d1 - (vp - vm) / (2.0 * e)).abs() < 1e-7);
        assert!((d2 - (vp - 2.0 * v + vm) / (e * e)).abs() < 1e-5);
    }
}

#[test]
fn profile_for_disc() {
    // Δ(|ξ|² − δ|ξ|²/2) = 4 − 2δ ≥ 2δ: h ≡ 1/2 gives C = 2
    let (h, cval, cert) = subharmonic_profile(&p("abs2(z1)"), 2).unwrap();
    assert!(cval >= 2.0 - 1e-9, "C = {cval}");
    assert!(cert.h_min > 0.0 && cert.h_max <= 1.0);
    assert!(h.value(0.3) > 0.0);
}

#[test]
fn profile_for_kohn_nirenberg() {
    // h ≡ 1/32 is feasible with C = 2
    let (h, cval, cert) = subharmonic_profile(&p(G), 8).unwrap();
    assert!(cval >= 2.0, "C = {cval}");
    assert!(cert.design_c >= cval);
    for k in 0..7200 {
        let th = 2.0 * std::f64::consts::PI * k as f64 / 7200.0;
        let (v, _, v2) = h.eval(th);
        assert!(64.0 * v + v2 + cval <= 64.0 + 60.0 * (6.0 * th).cos() + 1e-9);
        assert!(v > 0.0 && v <= 1.0);
    }
    assert!((profile::mean_laplacian(&p(G), 4) - 64.0).abs() < 1e-12);
}

#[test]
fn harmonic_profile_is_rejected() {
    assert_eq!(subharmonic_profile(&p("Re(z1^2)"), 2).unwrap_err(), BumpError::HarmonicProfile);
}

#[test]
fn cone_bump_single_line() {
    let q = p(P31);
    let exc = harmonic_lines(&q, 1e-8).unwrap();
    let cb = cone_bump(&q, &exc.lines[0], 0.5).unwrap();
    // μ[F]/r² = 2 + O(r²) on F = [[4r²+1, 1], [1, 1]]
    assert!(cb.c1 > 0.9 * 1.4 && cb.c1 < 0.9 * 2.0 + 1e-9, "c1 = {}", cb.c1);
    assert_eq!(cb.sigma, 0.25);
    let small = cb.ratios.last().unwrap().1;
    assert!((small - 2.0).abs() < 1e-6);
    // oracle: p − s|z1|⁴ is psh iff s ≤ 1, and H = (c1/8)|z1|⁴
    let s = cb.c1 / 8.0;
    assert!(s * cb.bump.delta0 <= 1.0);
    let z = [c(0.3, 0.1), c(0.7, -0.2)];
    assert!((cb.bump.value(z) - s * z[0].norm_sqr().powi(2)).abs() < 1e-15);

    let doubled = cone_bump(&p("2*abs2(z1)^2 + 2*abs2(z1)*abs2(z2)"), &exc.lines[0], 0.5).unwrap();
    assert!((doubled.c1 - 2.0 * cb.c1).abs() < 1e-9 * cb.c1);
}

#[test]
fn cone_bump_needs_strictness() {
    let q = p("abs2(z1*z2)");
    let exc = harmonic_lines(&q, 1e-8).unwrap();
    let line = exc.lines.iter().find(|l| !l.at_infinity).unwrap();
    assert!(matches!(cone_bump(&q, line, 0.5), Err(BumpError::NotStrict { .. })));
    let line = crate::exceptional::LineEnclosure::exact(crate::polyring::ComplexRational::one());
    assert_eq!(cone_bump(&p(P31), &line, 0.5).unwrap_err(), BumpError::NotVanishing);
}

#[test]
fn cone_bump_at_infinity_and_sheared() {
    let q = p("abs2(z1)^2*abs2(z2) + abs2(z2)^3");
    let exc = harmonic_lines(&q, 1e-8).unwrap();
    assert!(exc.lines.len() == 1 && exc.lines[0].at_infinity);
    let cb = cone_bump(&q, &exc.lines[0], 0.5).unwrap();
    // F = [[1 + 9r⁴, 2], [2, 4]]: μ/r⁴ → 36/5
    assert!((cb.ratios.last().unwrap().1 - 7.2).abs() < 1e-6);
    let z = [c(0.9, 0.1), c(0.2, 0.3)];
    let expect = cb.c1 / 18.0 * z[1].norm_sqr().powi(3);
    assert!((cb.bump.value(z) - expect).abs() < 1e-14);

    let q = p("abs2(z1 - z2)^2 + abs2(z1 - z2)*abs2(z2)");
    let exc = harmonic_lines(&q, 1e-8).unwrap();
    let cb = cone_bump(&q, &exc.lines[0], 0.5).unwrap();
    assert!(cb.c1 > 1.0);
    assert_eq!(cb.bump.value([c(1.0, 0.0), c(1.0, 0.0)]), 0.0);
}

#[test]
fn closed_form_levi_matches_differences() {
    let q = p(P31);
    let exc = harmonic_lines(&q, 1e-8).unwrap();
    let cone = cone_bump(&q, &exc.lines[0], 0.5).unwrap().bump.compile();
    let lv = levelset_bump(&p("z1*z2"), 4, &subharmonic_profile(&p(G), 8).unwrap().0).compile();
    let poly = BumpFunction::polynomial(p("abs2(z1)^2*abs2(z2) + Re(z1^2*conj(z2))")).compile();
    for z in random_sphere_points(50, 3) {
        for b in [&cone, &lv, &poly] {
            assert!(close(&b.levi(z), &b.levi_fd(z), 1e-6), "{:?} vs {:?}", b.levi(z), b.levi_fd(z));
        }
    }
}

#[test]
fn levelset_examples() {
    let half = SmoothProfile::constant(0.5);
    let h = levelset_bump(&p("z1*z2"), 1, &half);
    let z = [c(0.4, 0.2), c(-0.3, 0.8)];
    assert!((h.value(z) - 0.5 * (z[0] * z[1]).norm_sqr()).abs() < 1e-15);
    assert_eq!(h.value([c(0.0, 0.0), c(2.0, 1.0)]), 0.0);
    let cert = certify_psd(
        &Target::bumped(&p("abs2(z1*z2)"), &h, 1.0),
        &Region::FullSphere,
        0.0,
        &CertifyOptions::with_grid(GridSpec::cube(16)),
    );
    assert!(cert.is_certified());

    let (prof, _, _) = subharmonic_profile(&p(G), 8).unwrap();
    let h = levelset_bump(&p("z1*z2"), 4, &prof);
    assert_eq!(h.value([c(1.0, 0.0), c(0.0, 0.0)]), 0.0);
    assert!((h.value([c(1.0, 0.0), c(1.0, 0.0)]) - prof.value(0.0)).abs() < 1e-15);
}

#[test]
fn wedge_bump_full_sphere() {
    let q = p("abs2(z1)^2 + abs2(z2)^2");
    let w = wedge_bump(&q, &WedgeSpec::full((1, 1)), 2).unwrap();
    let BumpKind::Wedge { amplitude, shape, .. } = &w.kind else { panic!() };
    // p − a·p is psh exactly for a ≤ 1
    assert!((amplitude - 1.0).abs() <= 1.0 / 64.0, "amplitude {amplitude}");
    assert!(matches!(shape, WedgeShape::SelfSimilar { .. }));

    let q = p("(abs2(z1) + abs2(z2))^2");
    let w = wedge_bump(&q, &WedgeSpec::full((1, 1)), 2).unwrap();
    let BumpKind::Wedge { amplitude, .. } = &w.kind else { panic!() };
    assert!(*amplitude > 0.0);
}

#[test]
fn wedge_over_exceptional_line_is_rejected() {
    let cap = WedgeCap { zeta: Some(c(0.0, 0.0)), half_width: 0.2 };
    let wedge = WedgeSpec { m1: 1, m2: 1, sigma: (1, 1), caps: vec![cap] };
    assert_eq!(wedge_bump(&p("abs2(z1*z2)"), &wedge, 2).unwrap_err(), BumpError::WedgeMeetsLine);
}

#[test]
fn patched_single_line() {
    let q = p(P31);
    let exc = harmonic_lines(&q, 1e-8).unwrap();
    let cb = cone_bump(&q, &exc.lines[0], 0.5).unwrap();
    let opts = BumpOptions::default();
    let h = patch_bumps(&q, &[cb.clone()], None, &exc, &opts).unwrap();
    assert!(h.delta0 >= 0.5, "delta0 = {}", h.delta0);
    // the top-up is needed: the cone part vanishes outside its cut-off
    let BumpKind::Patched { amplitude, .. } = &h.kind else { panic!() };
    assert!(*amplitude > 0.0);
    // global max of δ·(coefficient of |z1|⁴ near the line) stays below 1
    assert!(h.delta0 * cb.c1 / 8.0 <= 1.0);
    let a = audit(&h, &exc, 20_000, 5, 0.0, 1e-3);
    assert_eq!(a.negatives, 0);
    assert!(a.c_lower > 0.0);
}

#[test]
fn patched_without_lines_is_positive() {
    let q = p("abs2(z1)^2 + abs2(z2)^2");
    let exc = harmonic_lines(&q, 1e-8).unwrap();
    assert!(exc.is_empty());
    let opts = BumpOptions::default();
    let w = wedge_bump_with(&q, &WedgeSpec::full((1, 1)), 2, &exc, &opts).unwrap();
    let h = patch_bumps(&q, &[], Some(&w), &exc, &opts).unwrap();
    let c = h.compile();
    assert!(random_sphere_points(5000, 9).into_iter().all(|z| c.value(z) > 0.0));
}

fn moved(cb: &ConeBump, zeta: Complex64, sigma: f64) -> ConeBump {
    let mut cb = cb.clone();
    cb.sigma = sigma;
    if let BumpKind::Cone { cone, .. } = &mut cb.bump.kind {
        cone.zeta = Some(zeta);
    }
    cb
}

#[test]
fn overlapping_cones_shrink_or_fail() {
    let q = p(P31);
    let exc = harmonic_lines(&q, 1e-8).unwrap();
    let cb = cone_bump(&q, &exc.lines[0], 0.5).unwrap();
    // lines z1 = 0 and z1 = z2 are π/4 apart
    let pair = [moved(&cb, c(0.0, 0.0), 0.5), moved(&cb, c(1.0, 0.0), 0.5)];
    let radii = build::cutoff_radii(&pair, None).unwrap();
    assert!(radii.iter().all(|r| *r <= 0.25));
    assert!(2.0 * (radii[0] + radii[1]) <= std::f64::consts::FRAC_PI_4);
    assert!(radii[0] < 0.25 || radii[1] < 0.25);
    let close_pair = [moved(&cb, c(1.0, 0.0), 0.5), moved(&cb, c(1.0 + 1e-5, 0.0), 0.5)];
    assert!(matches!(build::cutoff_radii(&close_pair, None), Err(BumpError::Overlap { .. })));
}

#[test]
fn descent_identity_and_equivariance() {
    let q = p("abs2(z1)^2*abs2(z2) + abs2(z2)^3");
    let exc = harmonic_lines(&q, 1e-8).unwrap();
    let cb = cone_bump(&q, &exc.lines[0], 0.5).unwrap();
    let g = symmetrize_and_descend(&cb.bump, (2, 1)).unwrap();
    assert_eq!(g.homogeneity(), Homogeneity::Weighted { m1: 3, m2: 6 });
    let cg = g.compile();
    let (inner, sigma) = cg.descended_parts().unwrap();
    for z in random_sphere_points(200, 11) {
        let sym = inner.symmetrized(z, sigma);
        let psi = [z[0] * z[0], z[1]];
        assert!((cg.value(psi) - sym).abs() <= 1e-12 * (1.0 + sym));
        let rz = [-z[0], z[1]];
        assert!((inner.symmetrized(rz, sigma) - sym).abs() <= 1e-12 * (1.0 + sym));
    }
    assert_eq!(symmetrize_and_descend(&cb.bump, (1, 1)).unwrap(), cb.bump);
}

#[test]
fn negative_bump_is_not_descended() {
    let h = BumpFunction::polynomial(p("-abs2(z1)"));
    assert!(matches!(symmetrize_and_descend(&h, (2, 1)), Err(BumpError::Negative { .. })));
}

#[test]
fn bumps_serialize_round_trip() {
    let (prof, _, _) = subharmonic_profile(&p(G), 8).unwrap();
    let h = levelset_bump(&p("z1*z2"), 4, &prof);
    let d = symmetrize_and_descend(&h, (2, 1)).unwrap();
    for b in [h, d] {
        let s = serde_json::to_string(&b).unwrap();
        let back: BumpFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn bumps_are_homogeneous(
        a in -1.0f64..1.0, b in -1.0f64..1.0, cc in -1.0f64..1.0, d in -1.0f64..1.0, t in 0.2f64..5.0,
    ) {
        let z = [c(a, b), c(cc, d)];
        prop_assume!(z[0].norm() + z[1].norm() > 0.1);
        let q = p(P31);
        let exc = harmonic_lines(&q, 1e-8).unwrap();
        let cone = cone_bump(&q, &exc.lines[0], 0.5).unwrap().bump;
        let wedge = BumpFunction {
            kind: BumpKind::Wedge {
                wedge: WedgeSpec {
                    m1: 1, m2: 1, sigma: (1, 1),
                    caps: vec![WedgeCap { zeta: Some(c(0.5, 0.5)), half_width: 0.4 }],
                },
                amplitude: 0.7,
                k: 2,
                shape: WedgeShape::Tilted { kappa: 0.5, collar: 0.3 },
            },
            delta0: 1.0,
        };
        let patched = BumpFunction {
            kind: BumpKind::Patched {
                parts: vec![PatchPart { bump: cone.clone(), cutoff: Some(Cutoff::around(Some(c(0.0, 0.0)), 0.1)) }],
                amplitude: 0.01,
                k: 2,
            },
            delta0: 0.5,
        };
        for h in [cone, wedge, patched] {
            let v = h.value(z);
            let vt = h.value([z[0] * t, z[1] * t]);
            prop_assert!(v >= 0.0);
            prop_assert!((vt - t.powi(4) * v).abs() <= 1e-10 * (1.0 + vt.abs()));
        }
    }
}

