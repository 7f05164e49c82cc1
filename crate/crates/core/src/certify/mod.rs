//! Sampling certificates for positivity of Levi forms on `S³`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bump::{BumpFunction, BumpKind, CompiledBump, ConeSpec};
use crate::exceptional::{ExceptionalSet, DEFAULT_BUDGET};
use crate::levi::{complex_hessian, CompiledLevi, HermitianForm2, LeviField};
use crate::polyring::{power, rat_from_f64, ComplexRational, MixedPoly, Rational};
use crate::structure::{sphere_point, GridSpec, WedgeSpec};

/// Tolerance (relative to the Levi scale) for closed-form Levi forms.
pub const ANALYTIC_TOL: f64 = 1e-10;
/// Tolerance for targets whose bump is differentiated numerically.
pub const FD_TOL: f64 = 1e-8;
/// Local Levi scales are floored at this fraction of the largest one.
pub const SCALE_FLOOR: f64 = 1e-9;
/// Returned by [`max_delta`] when no violation appears below it.
pub const MAX_DELTA: f64 = 1024.0;
/// Bisection width of [`max_delta`].
pub const DELTA_RESOLUTION: f64 = 1.0 / 64.0;
/// Seam sub-grids are this many times finer than the main grid.
const SEAM_FACTOR: usize = 8;

/// `PSHBUMP_BUDGET` if set and valid, else the default.
pub fn budget_from_env() -> usize {
    std::env::var("PSHBUMP_BUDGET").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_BUDGET)
}

pub fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Order-preserving parallel map over `0..n`.
pub fn par_map<T: Send, F: Fn(usize) -> T + Sync>(n: usize, threads: usize, f: F) -> Vec<T> {
    let threads = threads.clamp(1, n.max(1));
    if threads == 1 {
        return (0..n).map(f).collect();
    }
    let chunk = n.div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let f = &f;
                s.spawn(move || (t * chunk..((t + 1) * chunk).min(n)).map(f).collect::<Vec<T>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker thread panicked")).collect()
    })
}

/// Uniform random points on `S³`.
pub fn random_sphere_points(n: usize, seed: u64) -> Vec<[Complex64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            [Complex64::new(x[0] / r, x[1] / r), Complex64::new(x[2] / r, x[3] / r)]
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    FullSphere,
    Cone { cone: ConeSpec },
    Wedge { wedge: WedgeSpec },
    /// Chart ratio between `inner²` and `outer²`.
    Annulus { zeta: Option<Complex64>, inner: f64, outer: f64 },
}

impl Region {
    pub fn contains(&self, z: [Complex64; 2]) -> bool {
        match self {
            Region::FullSphere => true,
            Region::Cone { cone } => cone.contains(z),
            Region::Wedge { wedge } => wedge.contains(z),
            Region::Annulus { zeta, inner, outer } => {
                let s = ConeSpec { zeta: *zeta, aperture: *outer }.chart_ratio(z);
                s >= inner * inner && s <= outer * outer
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    Poly { p: MixedPoly },
    Bumped { p: MixedPoly, h: BumpFunction, delta: f64 },
}

impl Target {
    pub fn poly(p: &MixedPoly) -> Self {
        Target::Poly { p: p.clone() }
    }

    pub fn bumped(p: &MixedPoly, h: &BumpFunction, delta: f64) -> Self {
        Target::Bumped { p: p.clone(), h: h.clone(), delta }
    }
}

#[derive(Debug, Clone)]
pub struct CertifyOptions {
    pub grid: GridSpec,
    /// Overrides [`ANALYTIC_TOL`] / [`FD_TOL`].
    pub tol: Option<f64>,
    /// Largest main grid the refinement loop may reach.
    pub budget: usize,
    pub threads: usize,
    /// Radius of the sampled sphere.
    pub radius: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { grid: GridSpec::cube(64), tol: None, budget: budget_from_env(), threads: default_threads(), radius: 1.0 }
    }
}

impl CertifyOptions {
    pub fn with_grid(grid: GridSpec) -> Self {
        Self { grid, ..Self::default() }
    }

    /// Same options without refinement.
    pub fn fixed(&self) -> Self {
        Self { budget: self.grid.len(), ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub t: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub min_eig: f64,
    /// Minimum eigenvalue recomputed at the witness point.
    pub reproduced: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    Violated { witness: Witness },
    Inconclusive { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub region: Region,
    /// `(nt, nθ1, nθ2)` of the final main grid.
    pub grid: [usize; 3],
    pub seam_points: usize,
    pub lipschitz: f64,
    pub cell_diameter: f64,
    pub margin: f64,
    pub min_sampled: f64,
    /// Largest Levi norm seen; tolerances are relative to it.
    pub scale: f64,
    pub tol: f64,
    /// The Lipschitz bound is a proven bound for this target.
    pub lipschitz_proven: bool,
    /// `min_sampled − lipschitz · cell / 2 ≥ margin`.
    pub rigorous: bool,
    pub verdict: Verdict,
    pub evaluations: usize,
    pub refinements: u32,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }

    pub fn is_violated(&self) -> bool {
        matches!(self.verdict, Verdict::Violated { .. })
    }

    pub fn witness(&self) -> Option<Witness> {
        match self.verdict {
            Verdict::Violated { witness } => Some(witness),
            _ => None,
        }
    }
}

/// Term-wise bound on the angular derivatives of a Levi entry on the sphere.
fn entry_lipschitz(e: &MixedPoly) -> f64 {
    e.terms()
        .map(|(m, c)| {
            let d = m.degree() as f64;
            c.abs_l1() * d * (d + 2.0)
        })
        .sum()
}

fn field_lipschitz(l: &LeviField) -> f64 {
    entry_lipschitz(&l.h11) + entry_lipschitz(&l.h12) + entry_lipschitz(&l.h22)
}

/// Levi form of `p − δH` ready for sampling. Descended bumps are
/// certified through the pullback `p(z1^σ1, z2^σ2) − δ H_sym`.
struct LeviEval {
    p: CompiledLevi,
    bump: Option<(CompiledBump, f64)>,
    sym: Option<(u32, u32)>,
    analytic: bool,
    lipschitz: f64,
    proven: bool,
}

impl LeviEval {
    fn new(target: &Target) -> Self {
        match target {
            Target::Poly { p } => {
                let l = complex_hessian(p);
                Self { lipschitz: field_lipschitz(&l), p: l.compile(), bump: None, sym: None, analytic: true, proven: true }
            }
            Target::Bumped { p, h, delta } => {
                let (p, h, sym) = match &h.kind {
                    BumpKind::Descended { inner, sigma } => {
                        (power(p, sigma.0, sigma.1), inner.as_ref().clone(), Some(*sigma))
                    }
                    _ => (p.clone(), h.clone(), None),
                };
                let l = complex_hessian(&p);
                let mut lipschitz = field_lipschitz(&l);
                let proven = if let BumpKind::Polynomial { h: hp } = &h.kind {
                    lipschitz += delta.abs() * field_lipschitz(&complex_hessian(hp));
                    true
                } else {
                    false
                };
                Self {
                    p: l.compile(),
                    analytic: h.analytic_levi(),
                    bump: Some((h.compile(), *delta)),
                    sym,
                    lipschitz,
                    proven,
                }
            }
        }
    }

    fn bump_levi(b: &CompiledBump, z: [Complex64; 2], sym: Option<(u32, u32)>) -> HermitianForm2 {
        let Some(s) = sym else { return b.levi(z) };
        let mut acc = HermitianForm2::zero();
        for l in 0..s.0 {
            let a = Complex64::from_polar(1.0, 2.0 * PI * l as f64 / s.0 as f64);
            for m in 0..s.1 {
                let c = Complex64::from_polar(1.0, 2.0 * PI * m as f64 / s.1 as f64);
                let h = b.levi([a * z[0], c * z[1]]);
                acc = acc.add(&HermitianForm2::new(h.h11, h.h22, h.h12 * a * c.conj()));
            }
        }
        acc.scale(1.0 / (s.0 * s.1) as f64)
    }

    /// Minimum eigenvalue of the target and the Levi scale at `z`.
    fn at(&self, z: [Complex64; 2]) -> (f64, f64) {
        let lp = self.p.at(z);
        match &self.bump {
            None => (lp.min_eigenvalue(), lp.norm()),
            Some((b, d)) => {
                let lh = Self::bump_levi(b, z, self.sym).scale(*d);
                (lp.add(&lh.scale(-1.0)).min_eigenvalue(), lp.norm().max(lh.norm()))
            }
        }
    }

    fn tol(&self) -> f64 {
        if self.analytic {
            ANALYTIC_TOL
        } else {
            FD_TOL
        }
    }
}

/// Main grid points followed by the seam sub-grids at `t = 0` and `t = π/2`.
fn sample_points(grid: GridSpec) -> Vec<(f64, f64, f64)> {
    let mut pts: Vec<_> = (0..grid.len()).map(|i| grid.angles(i)).collect();
    let m = SEAM_FACTOR * grid.ntheta;
    let step = 2.0 * PI / m as f64;
    pts.extend((0..m).map(|i| (0.0, i as f64 * step, 0.0)));
    pts.extend((0..m).map(|i| (FRAC_PI_2, 0.0, i as f64 * step)));
    pts
}

struct Sampled {
    points: Vec<(f64, f64, f64)>,
    values: Vec<Option<(f64, f64)>>,
}

fn sample(eval: &LeviEval, region: &Region, grid: GridSpec, radius: f64, threads: usize) -> Sampled {
    let points = sample_points(grid);
    let values = par_map(points.len(), threads, |i| {
        let (t, a, b) = points[i];
        let z = sphere_point(t, a, b);
        if !region.contains(z) {
            return None;
        }
        Some(eval.at([z[0] * radius, z[1] * radius]))
    });
    Sampled { points, values }
}

/// Largest change of the minimum eigenvalue between `θ2`-neighbours of
/// the main grid, per radian.
fn empirical_lipschitz(s: &Sampled, grid: GridSpec) -> f64 {
    let mut best = 0.0f64;
    for i in 0..grid.len() {
        if (i + 1) % grid.ntheta == 0 {
            continue;
        }
        if let (Some(a), Some(b)) = (s.values[i], s.values[i + 1]) {
            best = best.max((a.0 - b.0).abs() / grid.dtheta());
        }
    }
    best
}

/// Positivity of the Levi form of the target on a region of `S³`, with
/// refinement up to the budget.
///
/// Certified when every sample is at least `margin − tol·s(z)`; violated
/// when some sample falls below `−10·tol·s(z)`, where `s(z)` is the
/// larger Levi norm of `p` and `δH` at the sample, floored at
/// [`SCALE_FLOOR`] times the largest.
pub fn certify_psd(target: &Target, region: &Region, margin: f64, opts: &CertifyOptions) -> Certificate {
    let eval = LeviEval::new(target);
    let tol = opts.tol.unwrap_or_else(|| eval.tol());
    let mut grid = opts.grid;
    let mut evaluations = 0;
    let mut refinements = 0;
    loop {
        let s = sample(&eval, region, grid, opts.radius, opts.threads);
        evaluations += s.values.iter().filter(|v| v.is_some()).count();
        let scale = s.values.iter().flatten().map(|v| v.1).fold(0.0, f64::max);
        let floor = SCALE_FLOOR * scale;
        let (imin, min) = s
            .values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (i, v.0)))
            .fold((usize::MAX, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
        let worst = s
            .values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.filter(|v| v.0 < -10.0 * tol * v.1.max(floor)).map(|v| (i, v.0)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let short = s.values.iter().flatten().any(|v| v.0 < margin - tol * v.1.max(floor));
        let cell = grid.cell_diameter();
        let lipschitz =
            if eval.proven { eval.lipschitz } else { eval.lipschitz + 2.0 * empirical_lipschitz(&s, grid) };
        let slack = lipschitz * cell / 2.0;
        let verdict = if imin == usize::MAX {
            Verdict::Certified
        } else if let Some((i, lam)) = worst {
            let (t, theta1, theta2) = s.points[i];
            let z = sphere_point(t, theta1, theta2);
            let reproduced = eval.at([z[0] * opts.radius, z[1] * opts.radius]).0;
            Verdict::Violated { witness: Witness { t, theta1, theta2, min_eig: lam, reproduced } }
        } else if !short {
            Verdict::Certified
        } else {
            Verdict::Inconclusive {
                reason: format!("sampled minimum {min:.3e} within tolerance band below margin {margin:.3e}"),
            }
        };
        let done = !matches!(verdict, Verdict::Inconclusive { .. }) || grid.refined().len() > opts.budget;
        if done {
            let min_sampled = if min.is_finite() { min } else { 0.0 };
            return Certificate {
                region: region.clone(),
                grid: [grid.nt, grid.ntheta, grid.ntheta],
                seam_points: 2 * SEAM_FACTOR * grid.ntheta,
                lipschitz,
                cell_diameter: cell,
                margin,
                min_sampled,
                scale,
                tol,
                lipschitz_proven: eval.proven,
                rigorous: eval.proven && min_sampled - slack >= margin,
                verdict,
                evaluations,
                refinements,
            };
        }
        grid = grid.refined();
        refinements += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaBracket {
    pub delta_lo: f64,
    pub delta_hi: f64,
    /// Certificate of the lower end (absent when it is 0 and `p` itself
    /// fails).
    pub lo_certificate: Option<Certificate>,
    pub steps: u32,
}

/// Bisection bracket `[δ_lo, δ_hi]` for the largest `δ` with `p − δh`
/// positive semidefinite on the region. Inconclusive steps count as
/// failures.
pub fn max_delta(p: &MixedPoly, h: &BumpFunction, region: &Region, opts: &CertifyOptions) -> DeltaBracket {
    let check = |d: f64| certify_psd(&Target::bumped(p, h, d), region, 0.0, opts);
    let base = check(0.0);
    let mut steps = 1;
    if !base.is_certified() {
        return DeltaBracket { delta_lo: 0.0, delta_hi: 0.0, lo_certificate: None, steps };
    }
    let (mut lo, mut lo_cert) = (0.0, base);
    let mut hi = 1.0;
    loop {
        let c = check(hi);
        steps += 1;
        if !c.is_certified() {
            break;
        }
        lo = hi;
        lo_cert = c;
        if hi >= MAX_DELTA {
            return DeltaBracket { delta_lo: MAX_DELTA, delta_hi: MAX_DELTA, lo_certificate: Some(lo_cert), steps };
        }
        hi *= 2.0;
    }
    while hi - lo > DELTA_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        let c = check(mid);
        steps += 1;
        if c.is_certified() {
            lo = mid;
            lo_cert = c;
        } else {
            hi = mid;
        }
    }
    DeltaBracket { delta_lo: lo, delta_hi: hi, lo_certificate: Some(lo_cert), steps }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrictCertificate {
    pub certificate: Certificate,
    /// `min λ_min / dist^exponent` over samples farther than one cell from
    /// the exceptional curves.
    pub c: f64,
    pub exponent: u32,
}

/// Strict positivity of `p − δH` away from the exceptional curves, with
/// the constant `c` in `λ_min ≥ c · dist^{2k}`.
pub fn certify_strict_off_lines(
    p: &MixedPoly,
    h: Option<&BumpFunction>,
    delta: f64,
    exc: &ExceptionalSet,
    k: u32,
    opts: &CertifyOptions,
) -> StrictCertificate {
    let target = match h {
        Some(h) => Target::bumped(p, h, delta),
        None => Target::poly(p),
    };
    let eval = LeviEval::new(&target);
    let tol = opts.tol.unwrap_or_else(|| eval.tol());
    let grid = opts.grid;
    let cell = grid.cell_diameter();
    let exponent = 2 * k;
    let s = sample(&eval, &Region::FullSphere, grid, opts.radius, opts.threads);
    let scale = s.values.iter().flatten().map(|v| v.1).fold(0.0, f64::max);
    let mut c = f64::INFINITY;
    let mut worst: Option<(usize, f64)> = None;
    let mut min_sampled = f64::INFINITY;
    for (i, v) in s.values.iter().enumerate() {
        let Some((lam, local)) = *v else { continue };
        let (t, a, b) = s.points[i];
        let z = sphere_point(t, a, b);
        let d = if exc.is_empty() { Some(FRAC_PI_2) } else { exc.angular_distance(z) };
        let Some(d) = d else { continue };
        if d <= cell {
            continue;
        }
        min_sampled = min_sampled.min(lam);
        let ratio = lam / d.powi(exponent as i32);
        if ratio < c {
            c = ratio;
        }
        if lam <= 10.0 * tol * local.max(SCALE_FLOOR * scale) && worst.map_or(true, |w| lam < w.1) {
            worst = Some((i, lam));
        }
    }
    let verdict = match worst {
        None => Verdict::Certified,
        Some((i, lam)) => {
            let (t, theta1, theta2) = s.points[i];
            let z = sphere_point(t, theta1, theta2);
            let reproduced = eval.at([z[0] * opts.radius, z[1] * opts.radius]).0;
            Verdict::Violated { witness: Witness { t, theta1, theta2, min_eig: lam, reproduced } }
        }
    };
    let c = if c.is_finite() { c.max(0.0) } else { 0.0 };
    let lipschitz = eval.lipschitz;
    let min_sampled = if min_sampled.is_finite() { min_sampled } else { 0.0 };
    StrictCertificate {
        certificate: Certificate {
            region: Region::FullSphere,
            grid: [grid.nt, grid.ntheta, grid.ntheta],
            seam_points: 2 * SEAM_FACTOR * grid.ntheta,
            lipschitz,
            cell_diameter: cell,
            margin: 0.0,
            min_sampled,
            scale,
            tol,
            lipschitz_proven: eval.proven,
            rigorous: eval.proven && min_sampled - lipschitz * cell / 2.0 > 0.0,
            verdict,
            evaluations: s.values.iter().filter(|v| v.is_some()).count(),
            refinements: 0,
        },
        c: if worst.is_some() { 0.0 } else { c },
        exponent,
    }
}

fn exact_point(z: [Complex64; 2]) -> [ComplexRational; 2] {
    z.map(|v| ComplexRational::new(rat_from_f64(v.re, 40), rat_from_f64(v.im, 40)))
}

/// Symbolic Levi form against central differences in exact arithmetic
/// (step `1e−5 (1 + ‖z‖)`) at random points; returns the largest entry
/// error relative to the Hessian norm at the point.
pub fn crosscheck_hessian(p: &MixedPoly, samples: usize, seed: u64) -> f64 {
    let levi = complex_hessian(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        let z = exact_point([Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3])]);
        let nz = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let h = rat_from_f64(1e-5 * (1.0 + nz), 40);
        let f = |a: &ComplexRational, b: &ComplexRational| p.evaluate_exact(a, b).re;
        let f0 = f(&z[0], &z[1]);
        let one = ComplexRational::one();
        let i = ComplexRational::i();
        let zero = ComplexRational::zero();
        let four = Rational::from_integer(4.into());
        let lap = |v: [&ComplexRational; 2]| -> Rational {
            let mut acc = -(&f0 * &four);
            for s in [one.scale(&h), one.scale(&-h.clone()), i.scale(&h), i.scale(&-h.clone())] {
                let a = &z[0] + &(&s * v[0]);
                let b = &z[1] + &(&s * v[1]);
                acc += f(&a, &b);
            }
            acc / (&four * &h * &h)
        };
        let h11 = lap([&one, &zero]);
        let h22 = lap([&zero, &one]);
        let re = (lap([&one, &one]) - &h11 - &h22) / Rational::from_integer(2.into());
        let im = (lap([&one, &i]) - &h11 - &h22) / Rational::from_integer(2.into());
        let sym = [
            levi.h11.evaluate_exact(&z[0], &z[1]),
            levi.h22.evaluate_exact(&z[0], &z[1]),
            levi.h12.evaluate_exact(&z[0], &z[1]),
        ];
        let fd = [
            ComplexRational::real(h11),
            ComplexRational::real(h22),
            ComplexRational::new(re, im),
        ];
        let mut err = 0.0f64;
        let mut size = 0.0f64;
        for (s, d) in sym.iter().zip(&fd) {
            let diff = (s - d).to_c64().norm();
            err = err.max(diff);
            size = size.max(s.to_c64().norm());
        }
        let rel = if size > 0.0 { err / size } else { err };
        worst = worst.max(rel);
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeviSample {
    pub t: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub min_eig: f64,
}

/// Per-sample minimum eigenvalues of the target on the main grid.
pub fn levi_samples(target: &Target, region: &Region, grid: GridSpec, threads: usize) -> Vec<LeviSample> {
    let eval = LeviEval::new(target);
    let s = sample(&eval, region, grid, 1.0, threads);
    (0..grid.len())
        .filter_map(|i| {
            let (t, theta1, theta2) = s.points[i];
            s.values[i].map(|v| LeviSample { t, theta1, theta2, min_eig: v.0 })
        })
        .collect()
}

/// CSV rows `t,theta1,theta2,min_eig` with a header.
pub fn write_samples_csv<W: std::io::Write>(rows: &[LeviSample], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
