//! Bump functions `H ≥ 0` with `p − δH` plurisubharmonic, and their
//! construction.

mod build;
pub mod profile;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::exceptional::pull_back;
use crate::levi::{complex_hessian, CompiledLevi, HermitianForm2};
use crate::polyring::{CompiledPoly, DerivKind, MixedPoly, Var};
use crate::structure::WedgeSpec;

pub use build::{
    audit, cone_bump, levelset_bump, patch_bumps, symmetrize_and_descend, wedge_bump, wedge_bump_with,
    BumpAudit, BumpOptions, ConeBump,
};
pub use profile::{
    smooth_step, subharmonic_profile, subharmonic_profile_with, ProfileCertificate, SmoothProfile,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BumpError {
    #[error("profile target is harmonic (its laplacian vanishes)")]
    HarmonicProfile,
    #[error("no admissible profile: certified constant {c}")]
    ProfileInfeasible { c: f64 },
    #[error("polynomial is not homogeneous of even degree")]
    NotHomogeneous,
    #[error("polynomial does not vanish on the line")]
    NotVanishing,
    #[error("not strictly plurisubharmonic in the punctured cone: eigenvalue {value} at r = {r}, angles ({theta1}, {theta2})")]
    NotStrict { r: f64, theta1: f64, theta2: f64, value: f64 },
    #[error("eigenvalue ratio does not stabilize as r -> 0 (spread {spread})")]
    Unstable { spread: f64 },
    #[error("wedge meets an exceptional curve")]
    WedgeMeetsLine,
    #[error("surrogate insufficient: best candidate fails at (t, theta1, theta2) = ({t}, {theta1}, {theta2}) with eigenvalue {min_eig}")]
    SurrogateInsufficient { t: f64, theta1: f64, theta2: f64, min_eig: f64 },
    #[error("cones around exceptional lines overlap after shrinking (chart radius {radius})")]
    Overlap { radius: f64 },
    #[error("certification failed: {0}")]
    Certification(String),
    #[error("bump takes the negative value {value}")]
    Negative { value: f64 },
    #[error(transparent)]
    Exceptional(#[from] crate::exceptional::ExceptionalError),
}

/// The cone `|z1 − ζ z2| < ε |z2|`, or `|z2| < ε |z1|` when `zeta` is
/// `None` (the line `z2 = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub zeta: Option<Complex64>,
    pub aperture: f64,
}

impl ConeSpec {
    /// The linear form `ℓ` cutting out the line.
    pub fn ell(&self, z: [Complex64; 2]) -> Complex64 {
        match self.zeta {
            Some(c) => z[0] - c * z[1],
            None => z[1],
        }
    }

    /// Gradient of `ℓ`.
    pub fn gradient(&self) -> [Complex64; 2] {
        match self.zeta {
            Some(c) => [Complex64::new(1.0, 0.0), -c],
            None => [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        }
    }

    /// A point spanning the line.
    pub fn direction(&self) -> [Complex64; 2] {
        match self.zeta {
            Some(c) => [c, Complex64::new(1.0, 0.0)],
            None => [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        }
    }

    /// `|ℓ|² / |base|²` in the affine chart of the line.
    pub fn chart_ratio(&self, z: [Complex64; 2]) -> f64 {
        let base = match self.zeta {
            Some(_) => z[1],
            None => z[0],
        };
        let b = base.norm_sqr();
        if b == 0.0 {
            f64::INFINITY
        } else {
            self.ell(z).norm_sqr() / b
        }
    }

    pub fn contains(&self, z: [Complex64; 2]) -> bool {
        self.chart_ratio(z) < self.aperture * self.aperture
    }
}

/// Interior shape of a wedge bump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum WedgeShape {
    /// `‖z‖^{2k} Σ χ_c (1 − κ s_c / sin²(outer_c))`, `s_c` the squared sine
    /// of the angle to the cap center.
    Tilted { kappa: f64, collar: f64 },
    /// `(1 − Π (1 − χ_c)) · p`.
    SelfSimilar { p: MixedPoly, collar: f64 },
}

impl WedgeShape {
    pub fn collar(&self) -> f64 {
        match self {
            WedgeShape::Tilted { collar, .. } | WedgeShape::SelfSimilar { collar, .. } => *collar,
        }
    }
}

/// A smooth cut-off `profile(s)` in the chart ratio `s` of a cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub cone: ConeSpec,
    pub profile: SmoothProfile,
}

impl Cutoff {
    /// Cut-off equal to 1 on the cone of aperture `r` and 0 outside `2r`.
    pub fn around(zeta: Option<Complex64>, r: f64) -> Self {
        Self {
            cone: ConeSpec { zeta, aperture: 2.0 * r },
            profile: SmoothProfile::RadialCutoff { inner: r * r, outer: 4.0 * r * r },
        }
    }

    pub fn value(&self, z: [Complex64; 2]) -> f64 {
        let s = self.cone.chart_ratio(z);
        if s.is_finite() {
            self.profile.value(s)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchPart {
    pub bump: BumpFunction,
    pub cutoff: Option<Cutoff>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BumpKind {
    /// `(c1 / 2k²) |ℓ|^{2k}`.
    Cone { cone: ConeSpec, c1: f64, k: u32 },
    Wedge { wedge: WedgeSpec, amplitude: f64, k: u32, shape: WedgeShape },
    /// `|f|^{2ν} h(arg f)`.
    Levelset { f: MixedPoly, nu: u32, profile: SmoothProfile },
    /// `Σ Ψ_j H_j + α ‖z‖^{2k} Π (1 − Ψ_j)`.
    Patched { parts: Vec<PatchPart>, amplitude: f64, k: u32 },
    /// `G(w) = H_sym(w1^{1/σ1}, w2^{1/σ2})`.
    Descended { inner: Box<BumpFunction>, sigma: (u32, u32) },
    /// A fixed polynomial.
    Polynomial { h: MixedPoly },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpFunction {
    #[serde(flatten)]
    pub kind: BumpKind,
    /// `p − δH` is plurisubharmonic for `0 ≤ δ ≤ delta0`.
    pub delta0: f64,
}

impl BumpFunction {
    pub fn polynomial(h: MixedPoly) -> Self {
        Self { kind: BumpKind::Polynomial { h }, delta0: 0.0 }
    }

    pub fn compile(&self) -> CompiledBump {
        CompiledBump::new(self)
    }

    /// One-off evaluation; use [`compile`](Self::compile) in loops.
    pub fn value(&self, z: [Complex64; 2]) -> f64 {
        self.compile().value(z)
    }

    /// Degree `2k` of homogeneity, or the weight-1 weights of a descended bump.
    pub fn homogeneity(&self) -> Homogeneity {
        match &self.kind {
            BumpKind::Cone { k, .. } | BumpKind::Wedge { k, .. } | BumpKind::Patched { k, .. } => {
                Homogeneity::Degree(2 * k)
            }
            BumpKind::Levelset { f, nu, .. } => {
                Homogeneity::Degree(2 * nu * f.homogeneous_degree().unwrap_or(0))
            }
            BumpKind::Polynomial { h } => Homogeneity::Degree(h.homogeneous_degree().unwrap_or(0)),
            BumpKind::Descended { inner, sigma } => match inner.homogeneity() {
                Homogeneity::Degree(d) => Homogeneity::Weighted { m1: d / sigma.0, m2: d / sigma.1 },
                w => w,
            },
        }
    }

    /// Whether the Levi form is available in closed form.
    pub fn analytic_levi(&self) -> bool {
        matches!(self.kind, BumpKind::Cone { .. } | BumpKind::Levelset { .. } | BumpKind::Polynomial { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Homogeneity {
    Degree(u32),
    /// `G(t^{1/m1} w1, t^{1/m2} w2) = t G(w)`.
    Weighted { m1: u32, m2: u32 },
}

/// Relative step of the finite-difference Levi form.
pub const FD_STEP: f64 = 1e-4;

fn norm(z: [Complex64; 2]) -> f64 {
    (z[0].norm_sqr() + z[1].norm_sqr()).sqrt()
}

/// Squared sine of the angle between `z` and the line through `d`.
fn sin2_angle(z: [Complex64; 2], d: [Complex64; 2]) -> f64 {
    let nz = z[0].norm_sqr() + z[1].norm_sqr();
    let nd = d[0].norm_sqr() + d[1].norm_sqr();
    if nz == 0.0 {
        return 0.0;
    }
    let cross = z[0] * d[1] - z[1] * d[0];
    (cross.norm_sqr() / (nz * nd)).min(1.0)
}

fn cap_direction(zeta: Option<Complex64>) -> [Complex64; 2] {
    match zeta {
        Some(c) => [c, Complex64::new(1.0, 0.0)],
        None => [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
    }
}

/// Cut-off of one wedge cap as a function of `s = sin²(angle)`.
fn cap_cutoff(half_width: f64, collar: f64) -> (SmoothProfile, f64) {
    let inner = half_width.min(std::f64::consts::FRAC_PI_2);
    let outer = (half_width + collar).min(std::f64::consts::FRAC_PI_2);
    let (si, so) = (inner.sin().powi(2), outer.sin().powi(2));
    let profile = if so <= si {
        SmoothProfile::RadialCutoff { inner: si, outer: si + 1e-12 }
    } else {
        SmoothProfile::RadialCutoff { inner: si, outer: so }
    };
    (profile, so.max(si))
}

enum Node {
    Cone { cone: ConeSpec, c1: f64, k: u32 },
    Tilted { wedge: WedgeSpec, caps: Vec<(SmoothProfile, f64)>, kappa: f64, amplitude: f64, k: u32 },
    SelfSimilar { wedge: WedgeSpec, caps: Vec<SmoothProfile>, p: CompiledPoly, amplitude: f64 },
    Levelset { f: CompiledPoly, df: [CompiledPoly; 2], j: u32, profile: SmoothProfile },
    Patched { parts: Vec<(CompiledBump, Option<Cutoff>)>, amplitude: f64, k: u32 },
    Descended { inner: Box<CompiledBump>, sigma: (u32, u32) },
    Polynomial { h: CompiledPoly, levi: CompiledLevi },
}

/// A bump prepared for repeated evaluation.
pub struct CompiledBump {
    node: Node,
    analytic: bool,
}

impl CompiledBump {
    pub fn new(b: &BumpFunction) -> Self {
        let node = match &b.kind {
            BumpKind::Cone { cone, c1, k } => Node::Cone { cone: *cone, c1: *c1, k: *k },
            BumpKind::Wedge { wedge, amplitude, k, shape } => match shape {
                WedgeShape::Tilted { kappa, collar } => Node::Tilted {
                    caps: wedge.caps.iter().map(|c| cap_cutoff(c.half_width, *collar)).collect(),
                    wedge: wedge.clone(),
                    kappa: *kappa,
                    amplitude: *amplitude,
                    k: *k,
                },
                WedgeShape::SelfSimilar { p, collar } => Node::SelfSimilar {
                    caps: wedge.caps.iter().map(|c| cap_cutoff(c.half_width, *collar).0).collect(),
                    wedge: wedge.clone(),
                    p: p.compile(),
                    amplitude: *amplitude,
                },
            },
            BumpKind::Levelset { f, nu, profile } => Node::Levelset {
                df: [
                    f.wirtinger(Var::Z1, DerivKind::Holomorphic).compile(),
                    f.wirtinger(Var::Z2, DerivKind::Holomorphic).compile(),
                ],
                f: f.compile(),
                j: 2 * nu,
                profile: profile.clone(),
            },
            BumpKind::Patched { parts, amplitude, k } => Node::Patched {
                parts: parts.iter().map(|p| (p.bump.compile(), p.cutoff.clone())).collect(),
                amplitude: *amplitude,
                k: *k,
            },
            BumpKind::Descended { inner, sigma } => {
                Node::Descended { inner: Box::new(inner.compile()), sigma: *sigma }
            }
            BumpKind::Polynomial { h } => Node::Polynomial { h: h.compile(), levi: complex_hessian(h).compile() },
        };
        Self { node, analytic: b.analytic_levi() }
    }

    pub fn analytic(&self) -> bool {
        self.analytic
    }

    pub fn value(&self, z: [Complex64; 2]) -> f64 {
        match &self.node {
            Node::Cone { cone, c1, k } => {
                c1 / (2.0 * (k * k) as f64) * cone.ell(z).norm_sqr().powi(*k as i32)
            }
            Node::Tilted { wedge, caps, kappa, amplitude, k } => {
                let w = pull_back(z, wedge.sigma);
                let mut sum = 0.0;
                for (cap, (profile, so)) in wedge.caps.iter().zip(caps) {
                    let s = sin2_angle(w, cap_direction(cap.zeta));
                    let chi = profile.value(s);
                    if chi > 0.0 {
                        sum += chi * (1.0 - kappa * s / so);
                    }
                }
                let n2 = z[0].norm_sqr() + z[1].norm_sqr();
                amplitude * n2.powi(*k as i32) * sum
            }
            Node::SelfSimilar { wedge, caps, p, amplitude } => {
                let w = pull_back(z, wedge.sigma);
                let mut miss = 1.0;
                for (cap, profile) in wedge.caps.iter().zip(caps) {
                    miss *= 1.0 - profile.value(sin2_angle(w, cap_direction(cap.zeta)));
                }
                let psi = 1.0 - miss;
                if psi == 0.0 {
                    0.0
                } else {
                    amplitude * psi * p.eval_real(z)
                }
            }
            Node::Levelset { f, j, profile, .. } => {
                let v = f.eval(z);
                let r = v.norm();
                if r == 0.0 {
                    return 0.0;
                }
                r.powi(*j as i32) * profile.value(v.arg())
            }
            Node::Patched { parts, amplitude, k } => {
                let mut total = 0.0;
                let mut outside = 1.0;
                for (b, cut) in parts {
                    let psi = cut.as_ref().map_or(1.0, |c| c.value(z));
                    if cut.is_some() {
                        outside *= 1.0 - psi;
                    }
                    if psi > 0.0 {
                        total += psi * b.value(z);
                    }
                }
                if *amplitude > 0.0 && outside > 0.0 {
                    let n2 = z[0].norm_sqr() + z[1].norm_sqr();
                    total += amplitude * n2.powi(*k as i32) * outside;
                }
                total
            }
            Node::Descended { inner, sigma } => inner.symmetrized(pull_back(z, *sigma), *sigma),
            Node::Polynomial { h, .. } => h.eval_real(z),
        }
    }

    /// Average of the bump over `(z1, z2) ↦ (e^{2πil/σ1} z1, e^{2πim/σ2} z2)`.
    pub fn symmetrized(&self, z: [Complex64; 2], sigma: (u32, u32)) -> f64 {
        let mut sum = 0.0;
        for l in 0..sigma.0 {
            let a = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * l as f64 / sigma.0 as f64);
            for m in 0..sigma.1 {
                let b = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * m as f64 / sigma.1 as f64);
                sum += self.value([a * z[0], b * z[1]]);
            }
        }
        sum / (sigma.0 * sigma.1) as f64
    }

    /// The inner bump and rotation orders of a descended bump.
    pub fn descended_parts(&self) -> Option<(&CompiledBump, (u32, u32))> {
        match &self.node {
            Node::Descended { inner, sigma } => Some((inner, *sigma)),
            _ => None,
        }
    }

    /// Levi form, in closed form where available.
    pub fn levi(&self, z: [Complex64; 2]) -> HermitianForm2 {
        match &self.node {
            Node::Cone { cone, c1, k } => {
                let w = 0.5 * c1 * cone.ell(z).norm_sqr().powi(*k as i32 - 1);
                let a = cone.gradient();
                HermitianForm2::new(w * a[0].norm_sqr(), w * a[1].norm_sqr(), a[0] * a[1].conj() * w)
            }
            Node::Levelset { f, df, j, profile } => {
                let v = f.eval(z);
                let r = v.norm();
                if r == 0.0 && *j > 2 {
                    return HermitianForm2::zero();
                }
                let (h, _, h2) = profile.eval(if r == 0.0 { 0.0 } else { v.arg() });
                let jj = (*j * *j) as f64;
                let w = 0.25 * r.powi(*j as i32 - 2) * (jj * h + h2);
                let (a, b) = (df[0].eval(z), df[1].eval(z));
                HermitianForm2::new(w * a.norm_sqr(), w * b.norm_sqr(), a * b.conj() * w)
            }
            Node::Polynomial { levi, .. } => levi.at(z),
            _ => self.levi_fd(z),
        }
    }

    /// Levi form by central differences along complex directions, one
    /// Richardson step.
    pub fn levi_fd(&self, z: [Complex64; 2]) -> HermitianForm2 {
        let n = norm(z);
        if n == 0.0 {
            return HermitianForm2::zero();
        }
        let h = FD_STEP * n;
        let f0 = self.value(z);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let lap = |v: [Complex64; 2], h: f64| {
            let g = |s: Complex64| self.value([z[0] + s * v[0], z[1] + s * v[1]]);
            (g(one * h) + g(-one * h) + g(i * h) + g(-i * h) - 4.0 * f0) / (4.0 * h * h)
        };
        let rich = |v: [Complex64; 2]| (4.0 * lap(v, h / 2.0) - lap(v, h)) / 3.0;
        let zero = Complex64::new(0.0, 0.0);
        let h11 = rich([one, zero]);
        let h22 = rich([zero, one]);
        let re = (rich([one, one]) - h11 - h22) / 2.0;
        let im = (rich([one, i]) - h11 - h22) / 2.0;
        HermitianForm2::new(h11, h22, Complex64::new(re, im))
    }
}

#[cfg(test)]
mod tests;
