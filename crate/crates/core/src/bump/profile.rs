//! Cut-off profiles and periodic profiles `h(θ)`.

use std::f64::consts::PI;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use super::BumpError;
use crate::polyring::{rat_int, rat_to_f64, DerivKind, MixedPoly, Var};

/// `exp(-1/x)` glued to zero; the building block of the cut-offs.
fn glue(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// `C^∞` step from 0 (at `x ≤ 0`) to 1 (at `x ≥ 1`).
pub fn smooth_step(x: f64) -> f64 {
    let a = glue(x);
    let b = glue(1.0 - x);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmoothProfile {
    /// 1 on `[0, inner]`, 0 on `[outer, ∞)`.
    RadialCutoff { inner: f64, outer: f64 },
    /// `a0 + Σ (a_n cos nθ + b_n sin nθ)`, `n = 1..`.
    Fourier { a0: f64, cos: Vec<f64>, sin: Vec<f64> },
}

impl SmoothProfile {
    pub fn constant(c: f64) -> Self {
        SmoothProfile::Fourier { a0: c, cos: Vec::new(), sin: Vec::new() }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    /// Value and first two derivatives.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        match self {
            SmoothProfile::RadialCutoff { inner, outer } => {
                let w = outer - inner;
                let s = (x - inner) / w;
                if s <= 0.0 {
                    return (1.0, 0.0, 0.0);
                }
                if s >= 1.0 {
                    return (0.0, 0.0, 0.0);
                }
                // derivatives by differencing the closed form; only used for reporting
                let e = 1e-5;
                let f = |t: f64| 1.0 - smooth_step(t);
                let (f0, fp, fm) = (f(s), f(s + e), f(s - e));
                (f0, (fp - fm) / (2.0 * e * w), (fp - 2.0 * f0 + fm) / (e * e * w * w))
            }
            SmoothProfile::Fourier { a0, cos, sin } => {
                let (mut v, mut d1, mut d2) = (*a0, 0.0, 0.0);
                for (i, (a, b)) in cos.iter().zip(sin).enumerate() {
                    let n = (i + 1) as f64;
                    let (s, c) = (n * x).sin_cos();
                    v += a * c + b * s;
                    d1 += n * (b * c - a * s);
                    d2 -= n * n * (a * c + b * s);
                }
                (v, d1, d2)
            }
        }
    }

    /// Degree and `ℓ¹` norm of the Fourier coefficients.
    fn fourier_size(&self) -> (usize, f64) {
        match self {
            SmoothProfile::Fourier { a0, cos, sin } => {
                (cos.len(), a0.abs() + cos.iter().chain(sin).map(|c| c.abs()).sum::<f64>())
            }
            SmoothProfile::RadialCutoff { .. } => (0, 1.0),
        }
    }
}

/// Outcome of [`subharmonic_profile`] with its certification data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCertificate {
    pub j: u32,
    /// Certified lower bound of `q - j²h - h''` over the whole circle.
    pub c: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub design_points: usize,
    pub check_points: usize,
    /// `C` reached by the optimizer on the design grid.
    pub design_c: f64,
}

pub const DESIGN_POINTS: usize = 720;
pub const DEFAULT_H_MIN: f64 = 1e-3;

/// `q(θ) = Δu(e^{iθ})` as a closure plus a bound on `|q'|`.
fn circle_data(u: &MixedPoly) -> (MixedPoly, f64) {
    let lap = u
        .wirtinger(Var::Z1, DerivKind::Holomorphic)
        .wirtinger(Var::Z1, DerivKind::Antiholomorphic)
        .scale(&rat_int(4));
    let lip = lap
        .terms()
        .map(|(m, c)| c.abs_l1() * (m.a as f64 - m.b as f64).abs())
        .sum();
    (lap, lip)
}

/// Trigonometric `h` of degree `≤ j` maximizing `C` subject to
/// `h_min ≤ h ≤ 1` and `j²h + h'' + C ≤ q` on a design grid, then
/// certified on a ten times finer grid with a derivative bound.
///
/// When `q - δ(j²h + h'') ≥ δC` holds at `δ = 1` it holds for all
/// `δ ∈ (0, 1]`: where `j²h + h'' + C ≥ 0` the left side minus `δC` falls
/// with `δ`, and elsewhere it is at least `q ≥ 0`.
pub fn subharmonic_profile(u: &MixedPoly, j: u32) -> Result<(SmoothProfile, f64, ProfileCertificate), BumpError> {
    subharmonic_profile_with(u, j, DEFAULT_H_MIN)
}

pub fn subharmonic_profile_with(
    u: &MixedPoly,
    j: u32,
    h_min: f64,
) -> Result<(SmoothProfile, f64, ProfileCertificate), BumpError> {
    let (lap, lip_q) = circle_data(u);
    if lap.is_zero() {
        return Err(BumpError::HarmonicProfile);
    }
    let q_of = |th: f64| lap.evaluate([num_complex::Complex64::from_polar(1.0, th), Default::default()]);
    let jj = (j * j) as f64;
    let n = DESIGN_POINTS;
    let thetas: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
    let qs: Vec<f64> = thetas.iter().map(|&t| q_of(t)).collect();

    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let free = (f64::NEG_INFINITY, f64::INFINITY);
    let a0 = lp.add_var(0.0, free);
    let ab: Vec<_> = (1..=j).map(|_| (lp.add_var(0.0, free), lp.add_var(0.0, free))).collect();
    let c = lp.add_var(1.0, free);
    // interior bounds leave room for the between-sample slack
    let (lo, hi) = (2.0 * h_min, 1.0 - h_min);
    for (&th, &q) in thetas.iter().zip(&qs) {
        let mut h_row = vec![(a0, 1.0)];
        let mut l_row = vec![(a0, jj), (c, 1.0)];
        for (i, &(a, b)) in ab.iter().enumerate() {
            let k = (i + 1) as f64;
            let (s, co) = (k * th).sin_cos();
            h_row.push((a, co));
            h_row.push((b, s));
            l_row.push((a, (jj - k * k) * co));
            l_row.push((b, (jj - k * k) * s));
        }
        lp.add_constraint(h_row.clone(), ComparisonOp::Ge, lo);
        lp.add_constraint(h_row, ComparisonOp::Le, hi);
        lp.add_constraint(l_row, ComparisonOp::Le, q);
    }
    let profile = match lp.solve() {
        Ok(sol) => {
            let clean = |v: f64| if v.abs() < 1e-14 { 0.0 } else { v };
            SmoothProfile::Fourier {
                a0: clean(sol[a0]),
                cos: ab.iter().map(|&(a, _)| clean(sol[a])).collect(),
                sin: ab.iter().map(|&(_, b)| clean(sol[b])).collect(),
            }
        }
        Err(_) => SmoothProfile::constant(h_min),
    };
    let design_c = thetas
        .iter()
        .zip(&qs)
        .map(|(&t, &q)| {
            let (h, _, h2) = profile.eval(t);
            q - jj * h - h2
        })
        .fold(f64::INFINITY, f64::min);
    let cert = certify_profile(&profile, j, &q_of, lip_q, design_c);
    if cert.c <= 0.0 || cert.h_min <= 0.0 || cert.h_max > 1.0 {
        return Err(BumpError::ProfileInfeasible { c: cert.c });
    }
    Ok((profile, cert.c, cert))
}

fn certify_profile(
    h: &SmoothProfile,
    j: u32,
    q_of: &dyn Fn(f64) -> f64,
    lip_q: f64,
    design_c: f64,
) -> ProfileCertificate {
    let m = 10 * DESIGN_POINTS;
    let step = 2.0 * PI / m as f64;
    let jj = (j * j) as f64;
    let (deg, l1) = h.fourier_size();
    let d = deg as f64;
    // |(j²h + h'')'| ≤ Σ |j² - n²| n |coef| ≤ (j² + d²) d ‖h‖₁, |h'| ≤ d ‖h‖₁
    let lip_g = lip_q + (jj + d * d) * d * l1;
    let lip_h = d * l1;
    let (mut g_min, mut h_lo, mut h_hi) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..m {
        let t = k as f64 * step;
        let (v, _, v2) = h.eval(t);
        g_min = g_min.min(q_of(t) - jj * v - v2);
        h_lo = h_lo.min(v);
        h_hi = h_hi.max(v);
    }
    let slack = step / 2.0;
    ProfileCertificate {
        j,
        c: g_min - lip_g * slack,
        h_min: h_lo - lip_h * slack,
        h_max: h_hi + lip_h * slack,
        design_points: DESIGN_POINTS,
        check_points: m,
        design_c,
    }
}

/// Exact `|ξ|^{2ν}` coefficient of `u`, used to cross-check profiles.
pub fn mean_laplacian(u: &MixedPoly, nu: u32) -> f64 {
    let c = u.coeff(&crate::polyring::Monomial::new(nu, nu, 0, 0));
    4.0 * (nu * nu) as f64 * rat_to_f64(&c.re)
}
