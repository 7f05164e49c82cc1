use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    cap_direction, BumpError, BumpFunction, BumpKind, ConeSpec, Cutoff, Homogeneity, PatchPart,
    SmoothProfile, WedgeShape,
};
use crate::certify::{
    certify_psd, max_delta, random_sphere_points, CertifyOptions, Region, Target,
};
use crate::exceptional::{fs_angle, harmonic_lines, ExceptionalSet, LineEnclosure};
use crate::levi::complex_hessian;
use crate::polyring::{rat_from_f64, shear, swap, ComplexRational, MixedPoly};
use crate::structure::{sphere_point, GridSpec, WedgeSpec};

#[derive(Debug, Clone)]
pub struct BumpOptions {
    /// Cone aperture `ε`; bumps are estimated on `σ = ε / 2`.
    pub eps: f64,
    /// Grid used inside searches and bisections (no refinement).
    pub search: CertifyOptions,
    /// Grid of the final certificate.
    pub certify: CertifyOptions,
}

impl Default for BumpOptions {
    fn default() -> Self {
        let certify = CertifyOptions::default();
        let search = CertifyOptions { grid: GridSpec::cube(24), ..certify.clone() }.fixed();
        Self { eps: 0.5, search, certify }
    }
}

/// Result of [`cone_bump`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeBump {
    pub bump: BumpFunction,
    pub c1: f64,
    pub sigma: f64,
    /// `(r, min μ/r^{2(k−1)})` along the radial sweep.
    pub ratios: Vec<(f64, f64)>,
}

const RADIAL_STEPS: usize = 41;
const TORUS: usize = 24;
const STABLE_SPREAD: f64 = 1.1;
/// Share of the sampled minimum kept as `c1`.
const C1_FRACTION: f64 = 0.9;

fn even_degree(p: &MixedPoly) -> Result<u32, BumpError> {
    p.homogeneous_degree().filter(|d| *d >= 2 && d % 2 == 0).ok_or(BumpError::NotHomogeneous)
}

/// Cone bump `(c1 / 2k²)|z1 − ζ z2|^{2k}` around a line on which `p`
/// vanishes.
///
/// `c1` is a fraction of the sampled minimum of `μ[F(r; θ)] / r^{2(k−1)}`,
/// `F = D⁻¹ 𝔥 D⁻¹`, `D = diag(1, r)`, over `r ∈ [10⁻⁴σ, σ]` in coordinates
/// where the line is `{w1 = 0}`.
pub fn cone_bump(p: &MixedPoly, line: &LineEnclosure, eps: f64) -> Result<ConeBump, BumpError> {
    let k = even_degree(p)? / 2;
    let (q, zeta) = if line.at_infinity {
        (swap(p), None)
    } else {
        let c = line.exact.clone().unwrap_or_else(|| {
            ComplexRational::new(rat_from_f64(line.center.re, 48), rat_from_f64(line.center.im, 48))
        });
        let z = c.to_c64();
        (shear(p, &c), Some(z))
    };
    let on_line =
        MixedPoly::from_terms(q.terms().filter(|(m, _)| m.a == 0 && m.b == 0).map(|(m, c)| (*m, c.clone())));
    let vanishes = if line.at_infinity || line.exact.is_some() {
        on_line.is_zero()
    } else {
        on_line.coeff_l1() <= 1e-8 * q.coeff_l1()
    };
    if !vanishes {
        return Err(BumpError::NotVanishing);
    }
    let field = complex_hessian(&q);
    let levi = field.compile();
    let det = field.h11.mul(&field.h22).sub(&field.h12.mul(&field.h12.conj())).compile();
    let mut sigma = eps / 2.0;
    let mut spread = f64::INFINITY;
    for _ in 0..4 {
        let mut ratios = Vec::with_capacity(RADIAL_STEPS);
        for i in 0..RADIAL_STEPS {
            let r = sigma * 10f64.powf(-4.0 * i as f64 / (RADIAL_STEPS - 1) as f64);
            let mut m = f64::INFINITY;
            for a in 0..TORUS {
                let theta1 = 2.0 * PI * a as f64 / TORUS as f64;
                for b in 0..TORUS {
                    let theta2 = 2.0 * PI * b as f64 / TORUS as f64;
                    let w = [Complex64::from_polar(r, theta1), Complex64::from_polar(1.0, theta2)];
                    let h = levi.at(w);
                    let (a, c, b) = (h.h11, h.h22 / (r * r), h.h12.norm() / r);
                    let top = 0.5 * (a + c) + (0.25 * (a - c) * (a - c) + b * b).sqrt();
                    let mu = det.eval_real(w) / (r * r) / top;
                    let ratio = mu / r.powi(2 * (k as i32 - 1));
                    if !(ratio > 1e-12 * top) {
                        return Err(BumpError::NotStrict { r, theta1, theta2, value: mu });
                    }
                    m = m.min(ratio);
                }
            }
            ratios.push((r, m));
        }
        let last = &ratios[RADIAL_STEPS - 11..];
        let hi = last.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
        let lo = last.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        spread = hi / lo;
        if spread <= STABLE_SPREAD {
            let c1 = C1_FRACTION * ratios.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
            let cone = ConeSpec { zeta, aperture: sigma };
            let bump = BumpFunction { kind: BumpKind::Cone { cone, c1, k }, delta0: 1.0 };
            return Ok(ConeBump { bump, c1, sigma, ratios });
        }
        sigma /= 2.0;
    }
    Err(BumpError::Unstable { spread })
}

fn line_direction(l: &LineEnclosure) -> [Complex64; 2] {
    if l.at_infinity {
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
    } else {
        [l.center, Complex64::new(1.0, 0.0)]
    }
}

/// Angular room between the wedge caps and the exceptional lines.
fn wedge_room(wedge: &WedgeSpec, exc: &ExceptionalSet) -> Result<f64, BumpError> {
    let mut room = f64::INFINITY;
    for l in &exc.pullback_lines {
        for c in &wedge.caps {
            let a = fs_angle(line_direction(l), cap_direction(c.zeta)).unwrap_or(0.0);
            let gap = a - c.half_width - l.radius;
            if gap <= 0.0 {
                return Err(BumpError::WedgeMeetsLine);
            }
            room = room.min(gap);
        }
    }
    Ok(room)
}

/// Wedge bump with the exceptional set computed from `p`.
pub fn wedge_bump(p: &MixedPoly, wedge: &WedgeSpec, k: u32) -> Result<BumpFunction, BumpError> {
    let exc = harmonic_lines(p, 1e-8)?;
    wedge_bump_with(p, wedge, k, &exc, &BumpOptions::default())
}

/// Surrogate wedge bump: searches a small family of shapes `H₀` and keeps
/// the largest certified amplitude `a` with `p − a·H₀` psd on the wedge
/// and its collar. Shapes giving strict positivity inside the wedge are
/// preferred.
pub fn wedge_bump_with(
    p: &MixedPoly,
    wedge: &WedgeSpec,
    k: u32,
    exc: &ExceptionalSet,
    opts: &BumpOptions,
) -> Result<BumpFunction, BumpError> {
    let room = wedge_room(wedge, exc)?;
    let widest = wedge.caps.iter().map(|c| c.half_width).fold(0.0, f64::max);
    let collar = (room / 2.0).min(widest).min(FRAC_PI_2 - widest).max(0.0);
    let mut collars = vec![collar];
    if collar > 0.0 {
        collars.push(collar / 2.0);
    }
    let mut shapes = Vec::new();
    for &c in &collars {
        for kappa in [0.0, 0.25, 0.5, 0.75, 0.95] {
            shapes.push(WedgeShape::Tilted { kappa, collar: c });
        }
        shapes.push(WedgeShape::SelfSimilar { p: p.clone(), collar: c });
    }
    let mut best: Option<(bool, f64, WedgeShape)> = None;
    let mut first_failure = None;
    for shape in shapes {
        let h0 = BumpFunction {
            kind: BumpKind::Wedge { wedge: wedge.clone(), amplitude: 1.0, k, shape: shape.clone() },
            delta0: 0.0,
        };
        let region = Region::Wedge { wedge: wedge.widened(shape.collar()) };
        let bracket = max_delta(p, &h0, &region, &opts.search);
        let a = bracket.delta_lo;
        if a <= 0.0 {
            if first_failure.is_none() {
                first_failure = certify_psd(&Target::bumped(p, &h0, 1.0 / 64.0), &region, 0.0, &opts.search).witness();
            }
            continue;
        }
        let inside = certify_psd(&Target::bumped(p, &h0, a / 2.0), &Region::Wedge { wedge: wedge.clone() }, 0.0, &opts.search);
        let strict = inside.min_sampled > 10.0 * inside.tol * inside.scale;
        let better = match &best {
            None => true,
            Some((s, b, _)) => (strict && !s) || (strict == *s && a > *b),
        };
        if better {
            best = Some((strict, a, shape));
        }
    }
    match best {
        Some((_, amplitude, shape)) => Ok(BumpFunction {
            kind: BumpKind::Wedge { wedge: wedge.clone(), amplitude, k, shape },
            delta0: 1.0,
        }),
        None => {
            let w = first_failure.unwrap_or(crate::certify::Witness {
                t: 0.0,
                theta1: 0.0,
                theta2: 0.0,
                min_eig: 0.0,
                reproduced: 0.0,
            });
            Err(BumpError::SurrogateInsufficient { t: w.t, theta1: w.theta1, theta2: w.theta2, min_eig: w.min_eig })
        }
    }
}

/// `H = |f|^{2ν} h(arg f)`; `p − δH` is psh for `δ ∈ (0, 1]` when `h`
/// comes from [`subharmonic_profile`](super::subharmonic_profile) of the
/// matching `U`.
pub fn levelset_bump(f: &MixedPoly, nu: u32, profile: &SmoothProfile) -> BumpFunction {
    BumpFunction { kind: BumpKind::Levelset { f: f.clone(), nu, profile: profile.clone() }, delta0: 1.0 }
}

const MIN_CUTOFF_RADIUS: f64 = 1e-3;
const FINAL_ALPHA_HALVINGS: usize = 8;
/// The first certified top-up amplitude is divided by this, so that
/// strictness survives off the lines.
const TOPUP_BACKOFF: f64 = 4.0;

/// Cut-off radii `σ̃_j = σ_j / 2`, halved until the doubled cones are
/// pairwise disjoint and clear of the wedge collar.
pub(super) fn cutoff_radii(cones: &[ConeBump], wedge: Option<&BumpFunction>) -> Result<Vec<f64>, BumpError> {
    let mut radii: Vec<f64> = cones.iter().map(|c| c.sigma / 2.0).collect();
    let dirs: Vec<[Complex64; 2]> = cones.iter().map(|c| cone_of(&c.bump).direction()).collect();
    let caps: Vec<([Complex64; 2], f64)> = match wedge.map(|w| &w.kind) {
        Some(BumpKind::Wedge { wedge, shape, .. }) => {
            wedge.caps.iter().map(|c| (cap_direction(c.zeta), c.half_width + shape.collar())).collect()
        }
        _ => Vec::new(),
    };
    loop {
        let mut clash = None;
        'scan: for i in 0..dirs.len() {
            for j in i + 1..dirs.len() {
                let a = fs_angle(dirs[i], dirs[j]).unwrap_or(0.0);
                if a < 2.0 * (radii[i] + radii[j]) {
                    clash = Some(if radii[i] >= radii[j] { i } else { j });
                    break 'scan;
                }
            }
            for (d, reach) in &caps {
                if fs_angle(dirs[i], *d).unwrap_or(0.0) < reach + 2.0 * radii[i] {
                    clash = Some(i);
                    break 'scan;
                }
            }
        }
        match clash {
            None => return Ok(radii),
            Some(i) => {
                radii[i] /= 2.0;
                if radii[i] < MIN_CUTOFF_RADIUS {
                    return Err(BumpError::Overlap { radius: radii[i] });
                }
            }
        }
    }
}

fn cone_of(b: &BumpFunction) -> ConeSpec {
    match &b.kind {
        BumpKind::Cone { cone, .. } => *cone,
        _ => unreachable!("cone parts are cone bumps"),
    }
}

fn certified(p: &MixedPoly, h: &BumpFunction, delta: f64, opts: &CertifyOptions) -> bool {
    certify_psd(&Target::bumped(p, h, delta), &Region::FullSphere, 0.0, opts).is_certified()
}

/// Global bump `H = Σ Ψ_j H_j + H_wedge + α ‖z‖^{2k} Π (1 − Ψ_j)`.
///
/// `δ₀` is the certified lower end of a bisection below
/// `min(1/2, parts' limits)`; the top-up is added only where the patched
/// bump vanishes off the lines, with `α` halved until certification
/// holds at `δ₀` and then divided by four.
pub fn patch_bumps(
    p: &MixedPoly,
    cones: &[ConeBump],
    wedge: Option<&BumpFunction>,
    exc: &ExceptionalSet,
    opts: &BumpOptions,
) -> Result<BumpFunction, BumpError> {
    let k = even_degree(p)? / 2;
    let radii = cutoff_radii(cones, wedge)?;
    let mut parts: Vec<PatchPart> = cones
        .iter()
        .zip(&radii)
        .map(|(c, &r)| PatchPart { bump: c.bump.clone(), cutoff: Some(Cutoff::around(cone_of(&c.bump).zeta, r)) })
        .collect();
    if let Some(w) = wedge {
        parts.push(PatchPart { bump: w.clone(), cutoff: None });
    }
    let cap = parts.iter().map(|p| p.bump.delta0).fold(0.5, f64::min);
    let mut h = BumpFunction { kind: BumpKind::Patched { parts, amplitude: 0.0, k }, delta0: 0.0 };

    let search = &opts.search;
    let mut delta = if certified(p, &h, cap, search) {
        cap
    } else {
        let (mut lo, mut hi) = (0.0, cap);
        while hi - lo > crate::certify::DELTA_RESOLUTION {
            let mid = 0.5 * (lo + hi);
            if certified(p, &h, mid, search) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    if delta <= 0.0 {
        let c = certify_psd(&Target::bumped(p, &h, crate::certify::DELTA_RESOLUTION), &Region::FullSphere, 0.0, search);
        return Err(BumpError::Certification(format!("patched bump fails at every delta: {:?}", c.verdict)));
    }

    let topup = needs_topup(&h, exc, k, search.grid);
    let mut alpha = 0.0;
    if topup {
        alpha = 1.0;
        let mut found = false;
        for _ in 0..48 {
            set_amplitude(&mut h, alpha);
            if certified(p, &h, delta, search) {
                found = true;
                break;
            }
            alpha /= 2.0;
        }
        if !found {
            return Err(BumpError::Certification("no admissible top-up amplitude".into()));
        }
        alpha /= TOPUP_BACKOFF;
    }

    let tries = if topup { FINAL_ALPHA_HALVINGS } else { 1 };
    for _ in 0..7 {
        let mut a = alpha;
        for _ in 0..tries {
            set_amplitude(&mut h, a);
            if certified(p, &h, delta, &opts.certify) {
                h.delta0 = delta;
                return Ok(h);
            }
            a /= 2.0;
        }
        delta /= 2.0;
    }
    let c = certify_psd(&Target::bumped(p, &h, delta), &Region::FullSphere, 0.0, &opts.certify);
    Err(BumpError::Certification(format!("final certificate: {:?}", c.verdict)))
}

fn set_amplitude(h: &mut BumpFunction, alpha: f64) {
    if let BumpKind::Patched { amplitude, .. } = &mut h.kind {
        *amplitude = alpha;
    }
}

/// Some grid point at least a cell away from the lines has `H ≈ 0`.
fn needs_topup(h: &BumpFunction, exc: &ExceptionalSet, k: u32, grid: GridSpec) -> bool {
    let c = h.compile();
    let cell = grid.cell_diameter();
    (0..grid.len()).any(|i| {
        let (t, a, b) = grid.angles(i);
        let z = sphere_point(t, a, b);
        let far = exc.angular_distance(z).map_or(true, |d| d > cell);
        far && c.value(z) <= 1e-12 * (cell / 2.0).powi(2 * k as i32)
    })
}

/// Rotation average over `R^{lm}` followed by descent through the
/// principal-root preimage; the identity when `σ = (1, 1)`.
pub fn symmetrize_and_descend(h: &BumpFunction, sigma: (u32, u32)) -> Result<BumpFunction, BumpError> {
    let c = h.compile();
    let min = random_sphere_points(2000, 7).into_iter().map(|z| c.value(z)).fold(f64::INFINITY, f64::min);
    if min < 0.0 {
        return Err(BumpError::Negative { value: min });
    }
    if sigma == (1, 1) {
        return Ok(h.clone());
    }
    Ok(BumpFunction { kind: BumpKind::Descended { inner: Box::new(h.clone()), sigma }, delta0: h.delta0 })
}

/// Sampled nonnegativity and zero-set check of a bump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpAudit {
    pub samples: usize,
    pub min_value: f64,
    pub negatives: usize,
    /// Samples with `H ≤ threshold`.
    pub near_zero: usize,
    /// Of those, samples farther than `radius` from the exceptional curves.
    pub far_zeros: usize,
    pub max_zero_distance: f64,
    /// `min H / dist^exponent` over the samples.
    pub c_lower: f64,
    pub exponent: u32,
    pub threshold: f64,
    pub radius: f64,
    pub passes: bool,
}

/// Evaluates the bump at `n` seeded random points of `S³`.
pub fn audit(h: &BumpFunction, exc: &ExceptionalSet, n: usize, seed: u64, threshold: f64, radius: f64) -> BumpAudit {
    let c = h.compile();
    let exponent = match (&h.kind, h.homogeneity()) {
        (BumpKind::Descended { inner, .. }, _) => match inner.homogeneity() {
            Homogeneity::Degree(d) => d,
            Homogeneity::Weighted { m1, .. } => m1,
        },
        (_, Homogeneity::Degree(d)) => d,
        (_, Homogeneity::Weighted { m1, .. }) => m1,
    };
    let mut a = BumpAudit {
        samples: n,
        min_value: f64::INFINITY,
        negatives: 0,
        near_zero: 0,
        far_zeros: 0,
        max_zero_distance: 0.0,
        c_lower: f64::INFINITY,
        exponent,
        threshold,
        radius,
        passes: false,
    };
    for z in random_sphere_points(n, seed) {
        let v = c.value(z);
        let d = if exc.is_empty() { FRAC_PI_2 } else { exc.angular_distance(z).unwrap_or(FRAC_PI_2) };
        a.min_value = a.min_value.min(v);
        if v < 0.0 {
            a.negatives += 1;
        }
        if v <= threshold {
            a.near_zero += 1;
            a.max_zero_distance = a.max_zero_distance.max(d);
            if d > radius {
                a.far_zeros += 1;
            }
        }
        if d > 0.0 {
            a.c_lower = a.c_lower.min(v / d.powi(exponent as i32));
        }
    }
    a.passes = a.negatives == 0 && a.far_zeros == 0;
    a
}
