//! Levi-degeneracy classification and the factorizations `p = U(F)`.

mod factor;

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::exceptional::{fs_angle, pull_back, ExceptionalSet};
use crate::levi::complex_hessian;
use crate::polyring::MixedPoly;

pub use factor::{
    circle_laplacian, factor_bidegree, factor_levelsets, primitive_root, Factorization,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StructureError {
    #[error("polynomial is not bihomogeneous of even bidegree ({0}, {1})")]
    NotBihomogeneous(u32, u32),
    #[error("not of monomial-composite form: support violates alpha*q = beta*p")]
    NotMonomialComposite,
    #[error("polynomial is pluriharmonic")]
    Harmonic,
    #[error("polynomial is not real-valued")]
    NotReal,
    #[error("Levi determinant is not identically zero (property B fails)")]
    NotPropertyB,
    #[error("hint is not a non-constant holomorphic polynomial")]
    HintNotHolomorphic,
    #[error("p is not harmonic along the level sets of the hint")]
    HintNotHarmonic,
    #[error("p is not a polynomial in F and conj(F) for the given hint")]
    HintInconsistent,
    #[error("F required: polynomial is not bihomogeneous, pass a hint")]
    FRequired,
    #[error("U is not subharmonic: laplacian {value} at angle {theta}")]
    NotSubharmonic { theta: f64, value: f64 },
}

/// `det 𝔥(p) ≡ 0`, decided exactly.
pub fn check_property_b(p: &MixedPoly) -> bool {
    complex_hessian(p).det().is_zero()
}

/// Uniform grid on `S³` in the coordinates
/// `z = (cos t e^{iθ1}, sin t e^{iθ2})`, `t ∈ [0, π/2]` (endpoints included).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nt: usize,
    pub ntheta: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { nt: 33, ntheta: 64 }
    }
}

impl GridSpec {
    pub fn cube(n: usize) -> Self {
        Self { nt: n + 1, ntheta: n }
    }

    pub fn dt(&self) -> f64 {
        FRAC_PI_2 / (self.nt.max(2) - 1) as f64
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.ntheta.max(1) as f64
    }

    /// Euclidean diameter bound of one grid cell on the sphere.
    pub fn cell_diameter(&self) -> f64 {
        self.dt().hypot(self.dtheta())
    }

    pub fn len(&self) -> usize {
        self.nt * self.ntheta * self.ntheta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn refined(&self) -> Self {
        Self { nt: 2 * self.nt - 1, ntheta: 2 * self.ntheta }
    }

    /// Angles of the sample with flat index `i`.
    pub fn angles(&self, i: usize) -> (f64, f64, f64) {
        let k2 = i % self.ntheta;
        let k1 = (i / self.ntheta) % self.ntheta;
        let j = i / (self.ntheta * self.ntheta);
        (j as f64 * self.dt(), k1 as f64 * self.dtheta(), k2 as f64 * self.dtheta())
    }
}

pub fn sphere_point(t: f64, theta1: f64, theta2: f64) -> [Complex64; 2] {
    [Complex64::from_polar(t.cos(), theta1), Complex64::from_polar(t.sin(), theta2)]
}

/// One sample of the Levi form on `S³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub t: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub min_eig: f64,
    /// Angular distance to the exceptional curves, when there are any.
    pub distance: Option<f64>,
}

impl SpherePoint {
    pub fn z(&self) -> [Complex64; 2] {
        sphere_point(self.t, self.theta1, self.theta2)
    }
}

/// One cap of a wedge, centered on the direction of `z1 = ζ z2`
/// (`None` for `z2 = 0`) in the pulled-back chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WedgeCap {
    pub zeta: Option<Complex64>,
    pub half_width: f64,
}

impl WedgeCap {
    fn direction(&self) -> [Complex64; 2] {
        match self.zeta {
            Some(z) => [z, Complex64::new(1.0, 0.0)],
            None => [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        }
    }
}

/// Union of angular caps around curves `z1^σ2 = ζ z2^σ1`. Membership is
/// tested on the principal-root pullback, so it is invariant under the
/// `(m1, m2)`-dilations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WedgeSpec {
    pub m1: u32,
    pub m2: u32,
    pub sigma: (u32, u32),
    pub caps: Vec<WedgeCap>,
}

impl WedgeSpec {
    /// The wedge covering everything.
    pub fn full(sigma: (u32, u32)) -> Self {
        let cap = WedgeCap { zeta: Some(Complex64::new(0.0, 0.0)), half_width: FRAC_PI_2 };
        Self { m1: sigma.1, m2: sigma.0, sigma, caps: vec![cap] }
    }

    /// Signed angular depth: negative inside, positive outside.
    pub fn signed_distance(&self, z: [Complex64; 2]) -> f64 {
        let w = pull_back(z, self.sigma);
        self.caps
            .iter()
            .filter_map(|c| fs_angle(w, c.direction()).map(|a| a - c.half_width))
            .min_by(f64::total_cmp)
            .unwrap_or(f64::INFINITY)
    }

    pub fn contains(&self, z: [Complex64; 2]) -> bool {
        self.signed_distance(z) <= 0.0
    }

    /// Angular distance from the wedge to the curve through `z` (zero when
    /// inside).
    pub fn distance(&self, z: [Complex64; 2]) -> f64 {
        self.signed_distance(z).max(0.0)
    }

    /// The same wedge widened by `collar` radians.
    pub fn widened(&self, collar: f64) -> Self {
        let mut w = self.clone();
        for c in &mut w.caps {
            c.half_width = (c.half_width + collar).min(FRAC_PI_2);
        }
        w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PropertyA {
    Holds { margin: f64 },
    Fails { witness: SpherePoint },
    Inconclusive { reason: String },
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    pub property_b: bool,
    pub property_a: PropertyA,
    pub wedge: Option<WedgeSpec>,
    /// Degenerate samples (at most [`MAX_REPORTED_SAMPLES`]).
    pub sigma_samples: Vec<SpherePoint>,
    pub sigma_count: usize,
    pub cell_diameter: f64,
    /// No harmonic curve meets the wedge. This is the only check made of
    /// the "no complex subvarieties" clause.
    pub subvariety_check: bool,
}

pub const MAX_REPORTED_SAMPLES: usize = 512;

/// Operational test of property A on a sphere grid.
///
/// Samples with `λ_min ≤ tol · max ‖𝔥‖` are degenerate; those within one
/// cell of an exceptional curve are attributed to it. The rest must keep
/// an angular margin above two cell diameters.
pub fn check_property_a(p: &MixedPoly, exc: &ExceptionalSet, grid: GridSpec, tol: f64) -> DegeneracyReport {
    let cell = grid.cell_diameter();
    if check_property_b(p) {
        return DegeneracyReport {
            property_b: true,
            property_a: PropertyA::NotApplicable,
            wedge: None,
            sigma_samples: Vec::new(),
            sigma_count: 0,
            cell_diameter: cell,
            subvariety_check: true,
        };
    }
    let levi = complex_hessian(p).compile();
    let mut scale = 0.0f64;
    let mut eigs = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let (t, a, b) = grid.angles(i);
        let h = levi.at(sphere_point(t, a, b));
        scale = scale.max(h.norm());
        eigs.push(h.min_eigenvalue());
    }
    let thresh = tol * scale;
    let mut degenerate = Vec::new();
    let mut most_negative: Option<SpherePoint> = None;
    for (i, &e) in eigs.iter().enumerate() {
        if e > thresh {
            continue;
        }
        let (t, theta1, theta2) = grid.angles(i);
        let distance = exc.angular_distance(sphere_point(t, theta1, theta2));
        let sp = SpherePoint { t, theta1, theta2, min_eig: e, distance };
        if e < -thresh && most_negative.map_or(true, |m| e < m.min_eig) {
            most_negative = Some(sp);
        }
        degenerate.push(sp);
    }
    let sigma_count = degenerate.len();
    let outside: Vec<SpherePoint> = degenerate
        .iter()
        .copied()
        .filter(|s| s.distance.map_or(true, |d| d > cell))
        .collect();
    let nearest = outside
        .iter()
        .filter(|s| s.distance.is_some())
        .min_by(|a, b| a.distance.partial_cmp(&b.distance).expect("finite distances"));
    let margin = nearest.and_then(|s| s.distance).unwrap_or(FRAC_PI_2);

    let wedge = if outside.is_empty() { None } else { Some(cover(&outside, exc.sigma, margin, cell)) };
    let subvariety_check = wedge.as_ref().map_or(true, |w| {
        exc.pullback_lines.iter().all(|l| {
            let z = if l.at_infinity {
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
            } else {
                [l.center, Complex64::new(1.0, 0.0)]
            };
            w.caps
                .iter()
                .all(|c| fs_angle(z, c.direction()).map_or(true, |a| a > c.half_width))
        })
    });

    let property_a = if let Some(w) = most_negative {
        PropertyA::Inconclusive {
            reason: format!("negative Levi eigenvalue {:.3e} at a sample; input is not plurisubharmonic", w.min_eig),
        }
    } else if margin > 2.0 * cell {
        PropertyA::Holds { margin }
    } else {
        let w = *nearest.expect("margin below pi/2 has a witness");
        if w.min_eig.abs() <= 1e-3 * thresh {
            PropertyA::Fails { witness: w }
        } else {
            PropertyA::Inconclusive {
                reason: format!("degenerate sample within {:.3e} rad of an exceptional curve", margin),
            }
        }
    };
    let sigma_samples = degenerate.into_iter().take(MAX_REPORTED_SAMPLES).collect();
    DegeneracyReport {
        property_b: false,
        property_a,
        wedge,
        sigma_samples,
        sigma_count,
        cell_diameter: cell,
        subvariety_check,
    }
}

/// Greedy cover of the samples by caps of half-width `min(margin / 2, 3 cell)`
/// centered on samples, so that every sample is at least half that deep
/// inside.
fn cover(samples: &[SpherePoint], sigma: (u32, u32), margin: f64, cell: f64) -> WedgeSpec {
    let half = (margin / 2.0).min(3.0 * cell).min(FRAC_PI_2);
    let mut caps: Vec<WedgeCap> = Vec::new();
    let mut spec = WedgeSpec { m1: sigma.1, m2: sigma.0, sigma, caps: Vec::new() };
    for s in samples {
        let w = pull_back(s.z(), sigma);
        let covered = caps
            .iter()
            .any(|c| fs_angle(w, c.direction()).map_or(false, |a| a <= half / 2.0));
        if !covered {
            let zeta = if w[1].norm() == 0.0 { None } else { Some(w[0] / w[1]) };
            caps.push(WedgeCap { zeta, half_width: half });
        }
    }
    spec.caps = caps;
    spec
}
