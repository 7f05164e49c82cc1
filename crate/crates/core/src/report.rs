//! JSON report produced by the command-line tool.

use serde::{Deserialize, Serialize};

use crate::bump::{BumpAudit, BumpFunction, ProfileCertificate};
use crate::certify::Certificate;
use crate::exceptional::{ExceptionalSet, LineEnclosure};
use crate::polyring::MixedPoly;
use crate::structure::{DegeneracyReport, Factorization};

pub const SCHEMA_VERSION: u32 = 1;

pub const CONVENTIONS: &str = "Levi form h_jk = d_j dbar_k p, h12 = d_1 dbar_2 p; Laplacian = 4 d dbar; \
sphere chart z = (cos t e^{i theta1}, sin t e^{i theta2}); weights (m1, m2) with p(t^{1/m1} z1, t^{1/m2} z2) = t p(z)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Certified,
    Violated,
    Inconclusive,
    Failed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Certified => 0,
            Outcome::Violated | Outcome::Failed => 2,
            Outcome::Inconclusive => 3,
        }
    }

    /// The worse of two outcomes.
    pub fn and(self, o: Outcome) -> Outcome {
        let rank = |x: Outcome| match x {
            Outcome::Certified => 0,
            Outcome::Inconclusive => 1,
            Outcome::Failed => 2,
            Outcome::Violated => 3,
        };
        if rank(o) > rank(self) {
            o
        } else {
            self
        }
    }

    pub fn of(c: &Certificate) -> Outcome {
        if c.is_certified() {
            Outcome::Certified
        } else if c.is_violated() {
            Outcome::Violated
        } else {
            Outcome::Inconclusive
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        Self { name: env!("CARGO_PKG_NAME").into(), version: env!("CARGO_PKG_VERSION").into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputEcho {
    /// `--poly` text or fixture name.
    pub source: String,
    pub poly: Option<MixedPoly>,
    pub weights: Option<[u32; 2]>,
    pub hint: Option<MixedPoly>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsReport {
    pub m1: u32,
    pub m2: u32,
    pub inferred: bool,
    pub sigma: [u32; 2],
    /// `p(z1^σ1, z2^σ2)`, homogeneous.
    pub pullback: MixedPoly,
    pub pullback_degree: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PluriharmonicCheck {
    /// The Levi form vanishes identically.
    pub pluriharmonic: bool,
    /// Number of pure holomorphic or antiholomorphic terms.
    pub pluriharmonic_terms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineReport {
    pub equation: String,
    pub at_infinity: bool,
    pub zeta: [f64; 2],
    pub radius: f64,
    pub exact: Option<String>,
}

impl LineReport {
    pub fn new(l: &LineEnclosure, sigma: (u32, u32)) -> Self {
        let equation = if l.at_infinity {
            "z2 = 0".to_string()
        } else {
            let lhs = if sigma.1 == 1 { "z1".to_string() } else { format!("z1^{}", sigma.1) };
            let rhs = if sigma.0 == 1 { "z2".to_string() } else { format!("z2^{}", sigma.0) };
            match &l.exact {
                Some(z) => format!("{lhs} = ({z}) {rhs}"),
                None => format!("{lhs} = ({} + {}i) {rhs}", l.center.re, l.center.im),
            }
        };
        Self {
            equation,
            at_infinity: l.at_infinity,
            zeta: [l.center.re, l.center.im],
            radius: l.radius,
            exact: l.exact.as_ref().map(|z| z.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExceptionalReport {
    pub sigma: [u32; 2],
    pub complete: bool,
    pub orbit_note: String,
    pub lines: Vec<LineReport>,
    pub pullback_lines: Vec<LineReport>,
}

impl ExceptionalReport {
    pub fn new(e: &ExceptionalSet) -> Self {
        Self {
            sigma: [e.sigma.0, e.sigma.1],
            complete: e.complete,
            orbit_note: e.orbit_note.clone(),
            lines: e.lines.iter().map(|l| LineReport::new(l, e.sigma)).collect(),
            pullback_lines: e.pullback_lines.iter().map(|l| LineReport::new(l, (1, 1))).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorReport {
    pub f: MixedPoly,
    pub u: MixedPoly,
    pub nu: u32,
    pub residual_zero: bool,
    pub exponents: Option<[u32; 2]>,
    pub laplacian_min: f64,
    pub level_check: Option<f64>,
}

impl FactorReport {
    pub fn new(f: &Factorization) -> Self {
        Self {
            f: f.f.clone(),
            u: f.u.clone(),
            nu: f.nu,
            residual_zero: f.residual_zero,
            exponents: f.exponents.map(|(a, b)| [a, b]),
            laplacian_min: f.laplacian_min,
            level_check: f.level_check,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeReport {
    pub line: String,
    pub c1: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileReport {
    pub j: u32,
    pub c: f64,
    pub certificate: ProfileCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpReport {
    /// `levelset`, `patched`, or either followed by `+descended`.
    pub construction: String,
    pub function: BumpFunction,
    pub cones: Vec<ConeReport>,
    pub profile: Option<ProfileReport>,
    pub audit: BumpAudit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketReport {
    pub delta_lo: f64,
    pub delta_hi: f64,
    pub steps: u32,
    pub grid: [usize; 3],
    /// Id of the certificate at `delta_lo`, when there is one.
    pub certificate: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaReport {
    pub delta0: f64,
    pub certificate: String,
    pub bracket: Option<BracketReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrictReport {
    pub c: f64,
    pub exponent: u32,
    pub certificate: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateEntry {
    pub id: String,
    pub claim: String,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureReport {
    pub name: String,
    pub description: String,
    pub poly: MixedPoly,
    pub weights: Option<[u32; 2]>,
    pub outcome: Outcome,
    /// Id of the plurisubharmonicity certificate.
    pub certificate: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisReport {
    pub schema: u32,
    pub tool: ToolInfo,
    pub command: String,
    pub conventions: String,
    pub input: InputEcho,
    pub outcome: Outcome,
    pub weights: Option<WeightsReport>,
    pub pluriharmonic: Option<PluriharmonicCheck>,
    /// Id of the plurisubharmonicity certificate.
    pub psh: Option<String>,
    pub exceptional: Option<ExceptionalReport>,
    pub degeneracy: Option<DegeneracyReport>,
    pub factorization: Option<FactorReport>,
    pub bump: Option<BumpReport>,
    pub delta: Option<DeltaReport>,
    pub strictness: Option<StrictReport>,
    pub fixtures: Option<Vec<FixtureReport>>,
    pub certificates: Vec<CertificateEntry>,
    pub error: Option<ErrorReport>,
}

impl AnalysisReport {
    pub fn new(command: &str, input: InputEcho) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            tool: ToolInfo::default(),
            command: command.into(),
            conventions: CONVENTIONS.into(),
            input,
            outcome: Outcome::Certified,
            weights: None,
            pluriharmonic: None,
            psh: None,
            exceptional: None,
            degeneracy: None,
            factorization: None,
            bump: None,
            delta: None,
            strictness: None,
            fixtures: None,
            certificates: Vec::new(),
            error: None,
        }
    }

    /// Stores a certificate, folds its verdict into the outcome and returns
    /// its id.
    pub fn add_certificate(&mut self, id: &str, claim: &str, c: Certificate) -> String {
        self.outcome = self.outcome.and(Outcome::of(&c));
        self.certificates.push(CertificateEntry { id: id.into(), claim: claim.into(), certificate: c });
        id.into()
    }

    pub fn certificate(&self, id: &str) -> Option<&Certificate> {
        self.certificates.iter().find(|e| e.id == id).map(|e| &e.certificate)
    }

    pub fn fail(&mut self, kind: &str, message: impl Into<String>) {
        self.outcome = self.outcome.and(Outcome::Failed);
        self.error = Some(ErrorReport { kind: kind.into(), message: message.into() });
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
