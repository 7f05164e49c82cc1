//! Harmonic lines of homogeneous polynomials and harmonic curves of
//! weighted-homogeneous ones.

pub mod interval;

use std::collections::VecDeque;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::Signed;

use crate::levi::{phi_coefficients, LeviError, PhiFamily};
use crate::polyring::{
    power, rat, rat_int, restrict_infinity, restrict_line, shear_second, ComplexRational,
    MixedPoly, Monomial, Rational,
};
use interval::{cauchy_radius, exact_f64, Rect, RealPoly2};

/// Default cap on the number of subdivision boxes per search.
pub const DEFAULT_BUDGET: usize = 4_000_000;

/// Box width at which the global search hands over to local expansions.
const COARSE_WIDTH: f64 = 1.0 / 1024.0;

/// Width reduction per refinement stage.
const STAGE_RATIO: f64 = 256.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExceptionalError {
    #[error("polynomial is not homogeneous of even degree")]
    NotHomogeneous,
    #[error("polynomial is not real-valued")]
    NotReal,
    #[error("polynomial is harmonic along every tested line (pluriharmonic input)")]
    Pluriharmonic,
    #[error("not plurisubharmonic: restriction to the line {witness} is not subharmonic")]
    NotPlurisubharmonic { witness: LineRef },
    #[error("polynomial is not ({m1},{m2})-homogeneous with weight 1")]
    NotWeighted { m1: u32, m2: u32 },
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

impl From<LeviError> for ExceptionalError {
    fn from(e: LeviError) -> Self {
        match e {
            LeviError::NotHomogeneous => ExceptionalError::NotHomogeneous,
            LeviError::NotReal => ExceptionalError::NotReal,
        }
    }
}

/// A line `z1 = ζ z2`, or `z2 = 0` for `Infinity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineRef {
    Finite(Complex64),
    Infinity,
}

impl std::fmt::Display for LineRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LineRef::Finite(z) => write!(f, "z1 = ({} + {}i) z2", z.re, z.im),
            LineRef::Infinity => write!(f, "z2 = 0"),
        }
    }
}

/// Enclosure of one exceptional line (or curve parameter) `ζ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineEnclosure {
    pub center: Complex64,
    pub radius: f64,
    pub at_infinity: bool,
    pub exact: Option<ComplexRational>,
}

impl LineEnclosure {
    pub fn infinity() -> Self {
        Self {
            center: Complex64::new(0.0, 0.0),
            radius: 0.0,
            at_infinity: true,
            exact: None,
        }
    }

    pub fn exact(z: ComplexRational) -> Self {
        Self {
            center: z.to_c64(),
            radius: 0.0,
            at_infinity: false,
            exact: Some(z),
        }
    }

    pub fn numeric(center: Complex64, radius: f64) -> Self {
        Self { center, radius, at_infinity: false, exact: None }
    }

    pub fn line(&self) -> LineRef {
        if self.at_infinity {
            LineRef::Infinity
        } else {
            LineRef::Finite(self.center)
        }
    }

    pub fn width(&self) -> f64 {
        2.0 * self.radius
    }
}

/// Exceptional lines (homogeneous case) or curves
/// `z1^σ2 = ζ z2^σ1` (weighted case, `sigma = (σ1, σ2)`).
#[derive(Debug, Clone, PartialEq)]
pub struct ExceptionalSet {
    pub lines: Vec<LineEnclosure>,
    pub sigma: (u32, u32),
    pub orbit_note: String,
    /// Harmonic lines of the pulled-back polynomial; equal to `lines`
    /// when `sigma = (1, 1)`.
    pub pullback_lines: Vec<LineEnclosure>,
    /// Shear `z2 -> z2 + c z1` used to normalize the search chart.
    pub shear: ComplexRational,
    pub search_radius: f64,
    /// False when the box budget ran out before every box was resolved.
    pub complete: bool,
}

impl ExceptionalSet {
    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn has_infinity(&self) -> bool {
        self.lines.iter().any(|l| l.at_infinity)
    }

    /// Angular distance from `z` to the nearest curve, measured as the
    /// Fubini-Study angle of a pulled-back point `(z1^(1/σ1), z2^(1/σ2))`
    /// to the harmonic lines of the pullback. Invariant under the weighted
    /// dilations. `None` when the set is empty or `z = 0`.
    pub fn angular_distance(&self, z: [Complex64; 2]) -> Option<f64> {
        let w = pull_back(z, self.sigma);
        self.pullback_lines
            .iter()
            .filter_map(|l| line_angle(w, l).map(|a| (a - l.radius).max(0.0)))
            .min_by(f64::total_cmp)
    }
}

/// Principal-root preimage of `z` under `(w1, w2) -> (w1^σ1, w2^σ2)`.
pub fn pull_back(z: [Complex64; 2], sigma: (u32, u32)) -> [Complex64; 2] {
    let root = |v: Complex64, s: u32| if s == 1 || v.norm() == 0.0 { v } else { v.powf(1.0 / s as f64) };
    [root(z[0], sigma.0), root(z[1], sigma.1)]
}

/// Fubini-Study angle between the complex directions of `a` and `b`.
pub fn fs_angle(a: [Complex64; 2], b: [Complex64; 2]) -> Option<f64> {
    let na = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
    let nb = (b[0].norm_sqr() + b[1].norm_sqr()).sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    let inner = (a[0] * b[0].conj() + a[1] * b[1].conj()).norm();
    let cross = (a[0] * b[1] - a[1] * b[0]).norm();
    Some(cross.atan2(inner))
}

fn line_angle(w: [Complex64; 2], l: &LineEnclosure) -> Option<f64> {
    let dir = if l.at_infinity {
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
    } else {
        [l.center, Complex64::new(1.0, 0.0)]
    };
    fs_angle(w, dir)
}

#[derive(Debug, Clone, Copy)]
pub struct LineSearch {
    pub tol: f64,
    pub budget: usize,
}

impl LineSearch {
    pub fn new(tol: f64) -> Self {
        Self { tol, budget: DEFAULT_BUDGET }
    }
}

/// Shears tried in order when the `z2 = 0` restriction is harmonic.
fn shear_candidates() -> Vec<ComplexRational> {
    let mut out = vec![ComplexRational::zero()];
    let reals = [rat(1, 1), rat(-1, 1), rat(2, 1), rat(1, 2), rat(-2, 1), rat(3, 1), rat(1, 3), rat(-1, 2)];
    for r in &reals {
        out.push(ComplexRational::real(r.clone()));
    }
    for (re, im) in [(0, 1), (0, -1), (1, 1), (1, -1), (2, 1), (1, 2), (-1, 2), (3, 2)] {
        out.push(ComplexRational::from_ints(re, im));
    }
    out.push(ComplexRational::new(rat(1, 3), rat(2, 5)));
    out
}

/// Whether a one-variable polynomial (slot `z1`) is harmonic: every term is
/// holomorphic or antiholomorphic.
pub fn restriction_is_harmonic(r: &MixedPoly) -> bool {
    r.terms().all(|(m, _)| m.a == 0 || m.b == 0)
}

/// Line in original coordinates corresponding to `ζ'` in the chart sheared
/// by `z2 -> z2 + c z1`: `ζ = ζ' / (1 + c ζ')`.
fn unshear(c: &ComplexRational, zeta: &ComplexRational) -> Option<ComplexRational> {
    let den = &ComplexRational::one() + &(c * zeta);
    den.inv().map(|d| zeta * &d)
}

/// Picks coordinates in which `p(z1, 0)` is not harmonic.
///
/// Returns the shear `c` and `p(z1, z2 + c z1)`.
pub fn normalize_coordinates(p: &MixedPoly) -> Result<(ComplexRational, MixedPoly), ExceptionalError> {
    let deg = p.homogeneous_degree().ok_or(ExceptionalError::NotHomogeneous)?;
    if deg % 2 == 1 {
        return Err(ExceptionalError::NotHomogeneous);
    }
    if !p.is_real() {
        return Err(ExceptionalError::NotReal);
    }
    let k = deg / 2;
    for c in shear_candidates() {
        let q = if c.is_zero() { p.clone() } else { shear_second(p, &c) };
        // mean of the restricted Laplacian over the unit circle
        let lead = q.coeff(&Monomial::new(k, k, 0, 0)).re;
        if lead.is_positive() {
            return Ok((c, q));
        }
        if lead.is_negative() {
            let witness = match c.inv() {
                Some(ci) => LineRef::Finite(ci.to_c64()),
                None => LineRef::Infinity,
            };
            return Err(ExceptionalError::NotPlurisubharmonic { witness });
        }
    }
    Err(ExceptionalError::Pluriharmonic)
}

/// Real and imaginary parts of the `φ_mn` with `m ≤ n`; the diagonal
/// entry is kept apart because it alone carries a sign.
#[derive(Clone)]
struct Model {
    diag: RealPoly2,
    rest: Vec<RealPoly2>,
}

impl Model {
    fn new(fam: &PhiFamily) -> Self {
        let k = fam.half_degree();
        let d = fam.diagonal().cloned().unwrap_or_default();
        let (diag, _) = RealPoly2::split_complex(&d);
        let mut rest = Vec::new();
        for ((m, n), f) in &fam.entries {
            if m > n || (*m == k && *n == k) {
                continue;
            }
            let (re, im) = RealPoly2::split_complex(f);
            for part in [re, im] {
                if !part.is_zero() {
                    rest.push(part);
                }
            }
        }
        Self { diag, rest }
    }

    fn shifted(&self, x: &Rational, y: &Rational) -> Self {
        Self {
            diag: self.diag.shifted(x, y),
            rest: self.rest.iter().map(|r| r.shifted(x, y)).collect(),
        }
    }
}

struct Isolation {
    leaves: Vec<Rect>,
    processed: usize,
    complete: bool,
    negative: Option<(f64, f64)>,
}

/// Breadth-first subdivision down to boxes of width `target`, discarding
/// boxes where some part excludes zero.
fn isolate(model: &Model, start: Rect, target: f64, budget: usize) -> Isolation {
    let mut queue = VecDeque::from([start]);
    let mut leaves = Vec::new();
    let mut processed = 0usize;
    while let Some(b) = queue.pop_front() {
        processed += 1;
        if processed > budget {
            leaves.push(b);
            leaves.extend(queue.drain(..));
            return Isolation { leaves, processed, complete: false, negative: None };
        }
        let rd = model.diag.range(&b);
        if rd.hi < 0.0 {
            return Isolation { leaves, processed, complete: true, negative: Some(b.center()) };
        }
        if !rd.contains_zero() {
            continue;
        }
        if model.rest.iter().any(|f| !f.range(&b).contains_zero()) {
            continue;
        }
        if b.width() <= target {
            leaves.push(b);
        } else {
            queue.extend(b.split());
        }
    }
    Isolation { leaves, processed, complete: true, negative: None }
}

/// Groups boxes into connected components of the touching relation.
fn cluster(leaves: &[Rect]) -> Vec<Rect> {
    let n = leaves.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut j = i;
        while p[j] != r {
            let nx = p[j];
            p[j] = r;
            j = nx;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if leaves[i].touches(&leaves[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Rect)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, bb)) => {
                bb.x.lo = bb.x.lo.min(leaves[i].x.lo);
                bb.x.hi = bb.x.hi.max(leaves[i].x.hi);
                bb.y.lo = bb.y.lo.min(leaves[i].y.lo);
                bb.y.hi = bb.y.hi.max(leaves[i].y.hi);
            }
            None => groups.push((r, leaves[i])),
        }
    }
    groups.into_iter().map(|(_, r)| r).collect()
}

/// Gaussian rationals with denominator at most 64 inside `r`, smallest
/// denominators first.
fn rational_candidates(r: &Rect, limit: usize) -> Vec<ComplexRational> {
    let mut out = Vec::new();
    let axis = |lo: f64, hi: f64, q: i64| -> Vec<Rational> {
        let a = (lo * q as f64).ceil() as i64;
        let b = (hi * q as f64).floor() as i64;
        if b < a || b - a > 64 {
            return Vec::new();
        }
        (a..=b).map(|p| rat(p, q)).collect()
    };
    for q in 1..=64i64 {
        let xs = axis(r.x.lo, r.x.hi, q);
        let ys = axis(r.y.lo, r.y.hi, q);
        for x in &xs {
            for y in &ys {
                let c = ComplexRational::new(x.clone(), y.clone());
                if !out.contains(&c) {
                    out.push(c);
                }
                if out.len() >= limit {
                    return out;
                }
            }
        }
    }
    out
}

fn vanishes_exactly(fam: &PhiFamily, zeta: &ComplexRational) -> bool {
    // cheap floating screen before the exact test
    let z = [zeta.to_c64(), Complex64::new(0.0, 0.0)];
    let scale = (1.0 + z[0].norm()).powi(fam.degree as i32);
    if fam.entries.values().any(|f| f.evaluate_complex(z).norm() > 1e-6 * scale * (1.0 + f.coeff_l1())) {
        return false;
    }
    let zero = ComplexRational::zero();
    fam.entries.values().all(|f| f.evaluate_exact(zeta, &zero).is_zero())
}

/// Harmonic lines through the origin of a homogeneous polynomial,
/// with the default search options.
pub fn harmonic_lines(p: &MixedPoly, tol: f64) -> Result<ExceptionalSet, ExceptionalError> {
    harmonic_lines_with(p, &LineSearch::new(tol))
}

pub fn harmonic_lines_with(p: &MixedPoly, opts: &LineSearch) -> Result<ExceptionalSet, ExceptionalError> {
    let (c, q) = normalize_coordinates(p)?;
    let fam = phi_coefficients(&q)?;
    let k = fam.half_degree();
    let diag = fam.diagonal().cloned().unwrap_or_default();
    let radius = cauchy_radius(&diag, k).ok_or(ExceptionalError::Pluriharmonic)?;
    // a power of two keeps every box corner and center exactly representable
    let radius = 2f64.powi(radius.log2().ceil() as i32);
    let model = Model::new(&fam);
    let cf = c.to_c64();
    let not_psh = |(x, y): (f64, f64)| {
        let zp = Complex64::new(x, y);
        let den = 1.0 + cf * zp;
        let witness = if den.norm() == 0.0 { LineRef::Infinity } else { LineRef::Finite(zp / den) };
        ExceptionalError::NotPlurisubharmonic { witness }
    };

    let mut lines = Vec::new();
    if restriction_is_harmonic(&restrict_infinity(p)) {
        lines.push(LineEnclosure::infinity());
    }

    let target = opts.tol / 4.0;
    let coarse = target.max(COARSE_WIDTH);
    let mut budget = opts.budget;
    let iso = isolate(&model, Rect::square(0.0, 0.0, radius), coarse, budget);
    if let Some(w) = iso.negative {
        return Err(not_psh(w));
    }
    budget = budget.saturating_sub(iso.processed);
    let mut complete = iso.complete;
    for coarse_box in cluster(&iso.leaves) {
        let refined = refine(&model, &fam, coarse_box, target, &mut budget).map_err(not_psh)?;
        for (bb, local, done) in refined {
            complete &= done;
            let found = rational_candidates(&bb, 256).into_iter().find(|z| vanishes_exactly(&fam, z));
            if let Some(zp) = found {
                // the pole of the chart map is the z2 = 0 line, tested exactly above
                if let Some(z) = unshear(&c, &zp) {
                    lines.push(LineEnclosure::exact(z));
                }
                continue;
            }
            match map_numeric(&local, &bb, cf, target, opts.tol, &mut budget) {
                Mapped::Line(e) => lines.push(e),
                Mapped::Pole => {}
                Mapped::Incomplete(e) => {
                    complete = false;
                    lines.push(e);
                }
            }
        }
    }
    lines.sort_by(|a, b| {
        (a.at_infinity, a.center.re, a.center.im)
            .partial_cmp(&(b.at_infinity, b.center.re, b.center.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(ExceptionalSet {
        pullback_lines: lines.clone(),
        lines,
        sigma: (1, 1),
        orbit_note: "homogeneous case: each enclosure is one complex line z1 = ζ z2".into(),
        shear: c,
        search_radius: radius,
        complete,
    })
}

/// Shrinks a cluster in stages, re-expanding the polynomials around each
/// intermediate cluster (at an exact zero when a small rational one is
/// found) so that rounding stays proportional to the local scale.
fn refine(
    model: &Model,
    fam: &PhiFamily,
    start: Rect,
    target: f64,
    budget: &mut usize,
) -> Result<Vec<(Rect, Model, bool)>, (f64, f64)> {
    let mut out = Vec::new();
    let mut stack = vec![start];
    while let Some(bb) = stack.pop() {
        let (cx, cy) = bb.center();
        let (ox, oy) = match rational_candidates(&bb, 64).into_iter().find(|z| vanishes_exactly(fam, z)) {
            Some(z) => (z.re, z.im),
            None => (exact_f64(cx), exact_f64(cy)),
        };
        let local = model.shifted(&ox, &oy);
        let step = target.max(bb.width() / STAGE_RATIO);
        let iso = isolate(&local, bb, step, *budget);
        if let Some(w) = iso.negative {
            return Err(w);
        }
        *budget = budget.saturating_sub(iso.processed);
        for c in cluster(&iso.leaves) {
            if step <= target || !iso.complete {
                out.push((c, local.clone(), iso.complete));
            } else {
                stack.push(c);
            }
        }
    }
    Ok(out)
}

enum Mapped {
    Line(LineEnclosure),
    Pole,
    Incomplete(LineEnclosure),
}

/// Maps a numeric cluster back through the chart, refining until the
/// image disk is no wider than `tol`.
fn map_numeric(model: &Model, bb: &Rect, c: Complex64, target: f64, tol: f64, budget: &mut usize) -> Mapped {
    let mut bb = *bb;
    let mut target = target;
    for _ in 0..8 {
        let (x, y) = bb.center();
        let zp = Complex64::new(x, y);
        let r = 0.5 * (bb.x.width().powi(2) + bb.y.width().powi(2)).sqrt();
        let den = 1.0 + c * zp;
        let slack = den.norm() - c.norm() * r;
        if slack <= 0.0 {
            return Mapped::Pole;
        }
        let mapped_r = r / (den.norm() * slack);
        let e = LineEnclosure::numeric(zp / den, mapped_r);
        if 2.0 * mapped_r <= tol {
            return Mapped::Line(e);
        }
        target *= 0.25 * tol / (2.0 * mapped_r);
        let iso = isolate(model, bb, target, *budget);
        *budget = budget.saturating_sub(iso.processed);
        let clusters = cluster(&iso.leaves);
        if !iso.complete || clusters.len() != 1 {
            return Mapped::Incomplete(e);
        }
        bb = clusters[0];
    }
    let (x, y) = bb.center();
    let zp = Complex64::new(x, y);
    Mapped::Incomplete(LineEnclosure::numeric(zp / (1.0 + c * zp), tol))
}

/// Independent check that `p` is harmonic along the enclosed line: exact
/// restriction for rational witnesses and the line at infinity, otherwise
/// the restricted Laplacian coefficients at the center are below `1e-10`
/// relative to the coefficient scale.
pub fn verify_line(p: &MixedPoly, line: &LineEnclosure) -> bool {
    if line.at_infinity {
        return restriction_is_harmonic(&restrict_infinity(p));
    }
    if let Some(z) = &line.exact {
        return restriction_is_harmonic(&restrict_line(p, z));
    }
    let Ok(fam) = phi_coefficients(p) else {
        return false;
    };
    let z = [line.center, Complex64::new(0.0, 0.0)];
    let scale = 1.0 + p.coeff_l1() * (1.0 + line.center.norm()).powi(p.degree().unwrap_or(0) as i32);
    fam.entries.values().all(|f| f.evaluate_complex(z).norm() <= 1e-10 * scale)
}

/// Harmonic curves `z1^σ2 = ζ z2^σ1` of an `(m1, m2)`-homogeneous
/// polynomial of weight one.
pub fn harmonic_curves(p: &MixedPoly, m1: u32, m2: u32, tol: f64) -> Result<ExceptionalSet, ExceptionalError> {
    harmonic_curves_with(p, m1, m2, &LineSearch::new(tol))
}

pub fn harmonic_curves_with(p: &MixedPoly, m1: u32, m2: u32, opts: &LineSearch) -> Result<ExceptionalSet, ExceptionalError> {
    if m1 == 0 || m2 == 0 || p.weight(&rat_int(m1 as i64), &rat_int(m2 as i64)) != Some(rat_int(1)) {
        return Err(ExceptionalError::NotWeighted { m1, m2 });
    }
    let kk = m1.lcm(&m2);
    let (s1, s2) = (kk / m1, kk / m2);
    if (s1, s2) == (1, 1) {
        return harmonic_lines_with(p, opts);
    }
    let q = power(p, s1, s2);
    let mut opts = *opts;
    for _ in 0..2 {
        let qset = harmonic_lines_with(&q, &opts)?;
        if let Some(curves) = group_orbits(&qset.lines, s1 * s2) {
            return Ok(ExceptionalSet {
                lines: curves,
                sigma: (s1, s2),
                orbit_note: format!(
                    "lines z1 = λ z2 of p(z1^{s1}, z2^{s2}) grouped by ζ = λ^{}; each entry is a curve z1^{s2} = ζ z2^{s1}",
                    s1 * s2
                ),
                pullback_lines: qset.lines,
                shear: qset.shear,
                search_radius: qset.search_radius,
                complete: qset.complete,
            });
        }
        opts.tol /= 100.0;
    }
    Err(ExceptionalError::Inconclusive("enclosures too coarse to separate root-of-unity orbits".into()))
}

/// One representative per orbit `λ -> λ^n`; `None` when enclosures are too
/// wide to tell orbits apart.
fn group_orbits(lines: &[LineEnclosure], n: u32) -> Option<Vec<LineEnclosure>> {
    let mut reps: Vec<LineEnclosure> = Vec::new();
    let mut infinity = false;
    for l in lines {
        if l.at_infinity {
            infinity = true;
            continue;
        }
        let img = match &l.exact {
            Some(z) => LineEnclosure::exact(z.pow(n)),
            None => {
                let a = l.center.norm();
                let r = (a + l.radius).powi(n as i32) - a.powi(n as i32);
                LineEnclosure::numeric(l.center.powu(n), r)
            }
        };
        let mut merged = false;
        for rep in reps.iter_mut() {
            let same = match (&rep.exact, &img.exact) {
                (Some(a), Some(b)) => a == b,
                _ => (rep.center - img.center).norm() <= rep.radius + img.radius,
            };
            if !same {
                continue;
            }
            // an orbit maps to one point, so each image disk holds the other's center
            let d = (rep.center - img.center).norm();
            if rep.exact.is_none() && img.exact.is_none() && d > rep.radius.max(img.radius) {
                return None;
            }
            if rep.exact.is_none() && (img.exact.is_some() || img.radius < rep.radius) {
                *rep = img.clone();
            }
            merged = true;
            break;
        }
        if !merged {
            reps.push(img);
        }
    }
    // distinct orbits must stay apart after grouping
    for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            if reps[i].exact.is_none() || reps[j].exact.is_none() {
                let d = (reps[i].center - reps[j].center).norm();
                if d <= reps[i].radius + reps[j].radius {
                    return None;
                }
            }
        }
    }
    if infinity {
        reps.push(LineEnclosure::infinity());
    }
    Some(reps)
}

#[cfg(test)]
mod tests;
