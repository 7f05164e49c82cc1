//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_integer::Integer;

use crate::bump::{
    audit, cone_bump, levelset_bump, patch_bumps, subharmonic_profile, symmetrize_and_descend, wedge_bump_with,
    BumpFunction, BumpOptions, ConeBump,
};
use crate::certify::{
    budget_from_env, certify_psd, certify_strict_off_lines, default_threads, levi_samples, max_delta,
    write_samples_csv, CertifyOptions, Region, Target,
};
use crate::exceptional::{harmonic_curves_with, ExceptionalSet, LineSearch};
use crate::fixtures::{Example, ALL};
use crate::levi::complex_hessian;
use crate::polyring::{parse_holomorphic, parse_poly, power, rat_int, MixedPoly};
use crate::report::{
    AnalysisReport, BracketReport, BumpReport, ConeReport, DeltaReport, ExceptionalReport, FactorReport,
    FixtureReport, InputEcho, LineReport, Outcome, PluriharmonicCheck, ProfileReport, StrictReport, WeightsReport,
};
use crate::structure::{check_property_a, factor_levelsets, Factorization, GridSpec, PropertyA};

pub const DEFAULT_LINE_TOL: f64 = 1e-8;
pub const DEGENERACY_TOL: f64 = 1e-12;
pub const BRACKET_GRID: usize = 24;
pub const AUDIT_SAMPLES: usize = 10_000;
pub const AUDIT_THRESHOLD: f64 = 1e-9;
pub const AUDIT_RADIUS: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(name = "pshbump", version, about = "Bumping of homogeneous plurisubharmonic polynomials on C^2")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full pipeline: certificate, exceptional set, classification, bump, delta bracket.
    Analyze(InputArgs),
    /// Exceptional lines or curves.
    Lines(InputArgs),
    /// Property (A) / (B) classification.
    Classify(InputArgs),
    /// Factorization p = U(F) of a property (B) polynomial.
    Factor(InputArgs),
    /// Bump construction and its certified delta.
    Bump(InputArgs),
    /// Plurisubharmonicity certificate on the unit sphere.
    Certify(InputArgs),
    /// Built-in fixtures, re-verified.
    Examples(ExamplesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Width of exceptional line enclosures.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Points per axis of the certification grid.
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for sampled audits.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    #[arg(long, conflicts_with = "example", required_unless_present = "example", allow_hyphen_values = true)]
    pub poly: Option<String>,
    #[arg(long, value_enum)]
    pub example: Option<Example>,
    /// Weights `m1,m2`; inferred when omitted.
    #[arg(long, value_parser = parse_weights)]
    pub weights: Option<(u32, u32)>,
    /// Holomorphic F for the factorization p = U(F).
    #[arg(long, allow_hyphen_values = true)]
    pub hint: Option<String>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ExamplesArgs {
    #[arg(long, value_enum)]
    pub example: Option<Example>,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn parse_weights(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once(',').ok_or("expected m1,m2")?;
    let a: u32 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: u32 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if a == 0 || b == 0 {
        return Err("weights must be positive".into());
    }
    Ok((a, b))
}

/// Parsed and validated input.
#[derive(Debug, Clone)]
pub struct Input {
    pub source: String,
    pub poly: MixedPoly,
    pub weights: Option<(u32, u32)>,
    pub hint: Option<MixedPoly>,
}

/// Settings shared by every stage.
#[derive(Debug, Clone)]
pub struct Settings {
    pub line_tol: f64,
    pub grid: usize,
    pub threads: usize,
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Self { line_tol: DEFAULT_LINE_TOL, grid: 64, threads: default_threads(), seed: 0 }
    }
}

impl Settings {
    fn from_args(c: &CommonArgs) -> Self {
        Self {
            line_tol: c.tol.unwrap_or(DEFAULT_LINE_TOL),
            grid: c.grid.max(2),
            threads: c.threads.unwrap_or_else(default_threads).max(1),
            seed: c.seed,
        }
    }

    pub fn certify(&self) -> CertifyOptions {
        CertifyOptions { threads: self.threads, ..CertifyOptions::with_grid(GridSpec::cube(self.grid)) }
    }

    fn bracket(&self) -> CertifyOptions {
        CertifyOptions { threads: self.threads, ..CertifyOptions::with_grid(GridSpec::cube(BRACKET_GRID)) }.fixed()
    }

    fn bump(&self) -> BumpOptions {
        let d = BumpOptions::default();
        BumpOptions {
            search: CertifyOptions { threads: self.threads, ..d.search },
            certify: CertifyOptions { threads: self.threads, ..self.certify() }.fixed(),
            ..d
        }
    }
}

/// Weights, the branch exponents `σ` and the homogeneous pullback.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub p: MixedPoly,
    pub m1: u32,
    pub m2: u32,
    pub sigma: (u32, u32),
    pub q: MixedPoly,
}

fn echo(input: &Input) -> InputEcho {
    InputEcho {
        source: input.source.clone(),
        poly: Some(input.poly.clone()),
        weights: input.weights.map(|(a, b)| [a, b]),
        hint: input.hint.clone(),
    }
}

pub fn prepare(r: &mut AnalysisReport, input: &Input) -> Option<Prepared> {
    let p = input.poly.clone();
    let (m1, m2, inferred) = match input.weights {
        Some((a, b)) => (a, b, false),
        None => match p.infer_weights() {
            Some(w) if w.m1.is_integer() && w.m2.is_integer() => {
                match (w.m1.to_integer().try_into(), w.m2.to_integer().try_into()) {
                    (Ok(a), Ok(b)) => (a, b, true),
                    _ => {
                        r.fail("weights", "inferred weights out of range");
                        return None;
                    }
                }
            }
            Some(w) => {
                r.fail("weights", format!("inferred weights ({}, {}) are not integers", w.m1, w.m2));
                return None;
            }
            None => {
                r.fail("weights", "weights cannot be inferred; pass --weights m1,m2");
                return None;
            }
        },
    };
    if p.weight(&rat_int(m1 as i64), &rat_int(m2 as i64)) != Some(rat_int(1)) {
        r.fail("weights", format!("polynomial is not ({m1}, {m2})-homogeneous of weight one"));
        return None;
    }
    let kk = m1.lcm(&m2);
    let sigma = (kk / m1, kk / m2);
    let q = power(&p, sigma.0, sigma.1);
    r.weights = Some(WeightsReport {
        m1,
        m2,
        inferred,
        sigma: [sigma.0, sigma.1],
        pullback: q.clone(),
        pullback_degree: kk,
    });
    Some(Prepared { p, m1, m2, sigma, q })
}

fn check_pluriharmonic(r: &mut AnalysisReport, pr: &Prepared) -> bool {
    let pluriharmonic = complex_hessian(&pr.q).is_zero();
    let terms = pr.p.terms().filter(|(m, _)| m.is_pluriharmonic()).count();
    r.pluriharmonic = Some(PluriharmonicCheck { pluriharmonic, pluriharmonic_terms: terms });
    if pluriharmonic {
        r.fail("pluriharmonic", "the Levi form vanishes identically; every line is exceptional");
    }
    pluriharmonic
}

fn certify_polynomial(r: &mut AnalysisReport, pr: &Prepared, s: &Settings) -> Outcome {
    let c = certify_psd(&Target::poly(&pr.q), &Region::FullSphere, 0.0, &s.certify());
    let o = Outcome::of(&c);
    let claim = if pr.sigma == (1, 1) {
        "p is plurisubharmonic".to_string()
    } else {
        format!("p(z1^{}, z2^{}) is plurisubharmonic", pr.sigma.0, pr.sigma.1)
    };
    r.psh = Some(r.add_certificate("psh", &claim, c));
    o
}

fn exceptional(r: &mut AnalysisReport, pr: &Prepared, s: &Settings) -> Option<ExceptionalSet> {
    let opts = LineSearch { tol: s.line_tol, budget: budget_from_env() };
    match harmonic_curves_with(&pr.p, pr.m1, pr.m2, &opts) {
        Ok(e) => {
            if !e.complete {
                r.outcome = r.outcome.and(Outcome::Inconclusive);
            }
            r.exceptional = Some(ExceptionalReport::new(&e));
            Some(e)
        }
        Err(e) => {
            r.fail("exceptional", e.to_string());
            None
        }
    }
}

/// The harmonic lines of the pullback as a set of its own.
fn pulled_back(e: &ExceptionalSet) -> ExceptionalSet {
    ExceptionalSet { lines: e.pullback_lines.clone(), sigma: (1, 1), ..e.clone() }
}

fn classify(r: &mut AnalysisReport, pr: &Prepared, exc_q: &ExceptionalSet) -> Outcome {
    let d = check_property_a(&pr.q, exc_q, GridSpec::default(), DEGENERACY_TOL);
    let o = if d.property_b {
        Outcome::Certified
    } else {
        match &d.property_a {
            PropertyA::Holds { .. } => Outcome::Certified,
            PropertyA::Fails { .. } | PropertyA::NotApplicable => Outcome::Failed,
            PropertyA::Inconclusive { .. } => Outcome::Inconclusive,
        }
    };
    if o == Outcome::Failed {
        r.fail("classification", "neither property (A) nor property (B) holds");
    } else {
        r.outcome = r.outcome.and(o);
    }
    r.degeneracy = Some(d);
    o
}

fn factor(r: &mut AnalysisReport, pr: &Prepared, hint: Option<&MixedPoly>) -> Option<Factorization> {
    match factor_levelsets(&pr.q, hint) {
        Ok(f) => {
            r.factorization = Some(FactorReport::new(&f));
            Some(f)
        }
        Err(e) => {
            r.fail("factorization", e.to_string());
            None
        }
    }
}

/// Bump on the pullback and its descent to `p`.
pub struct Built {
    pub on_pullback: BumpFunction,
    pub bump: BumpFunction,
    pub patched: bool,
}

fn build_bump(
    r: &mut AnalysisReport,
    pr: &Prepared,
    exc: &ExceptionalSet,
    exc_q: &ExceptionalSet,
    hint: Option<&MixedPoly>,
    s: &Settings,
) -> Option<Built> {
    let degeneracy = r.degeneracy.clone()?;
    let mut cones_report = Vec::new();
    let mut profile_report = None;
    let (hq, mut construction, patched) = if degeneracy.property_b {
        let f = factor(r, pr, hint)?;
        let j = 2 * f.nu;
        let (profile, c, cert) = match subharmonic_profile(&f.u, j) {
            Ok(v) => v,
            Err(e) => {
                r.fail("profile", e.to_string());
                return None;
            }
        };
        profile_report = Some(ProfileReport { j, c, certificate: cert });
        (levelset_bump(&f.f, f.nu, &profile), "levelset".to_string(), false)
    } else {
        let k = pr.q.homogeneous_degree().unwrap_or(0) / 2;
        let opts = s.bump();
        let mut cones: Vec<ConeBump> = Vec::new();
        for l in &exc_q.lines {
            match cone_bump(&pr.q, l, opts.eps) {
                Ok(c) => {
                    cones_report.push(ConeReport { line: LineReport::new(l, (1, 1)).equation, c1: c.c1, sigma: c.sigma });
                    cones.push(c);
                }
                Err(e) => {
                    r.fail("cone_bump", e.to_string());
                    return None;
                }
            }
        }
        let wedge = match &degeneracy.wedge {
            Some(w) => match wedge_bump_with(&pr.q, w, k, exc_q, &opts) {
                Ok(b) => Some(b),
                Err(e) => {
                    r.fail("wedge_bump", e.to_string());
                    return None;
                }
            },
            None => None,
        };
        match patch_bumps(&pr.q, &cones, wedge.as_ref(), exc_q, &opts) {
            Ok(h) => (h, "patched".to_string(), true),
            Err(e) => {
                r.fail("patch_bumps", e.to_string());
                return None;
            }
        }
    };
    let bump = match symmetrize_and_descend(&hq, pr.sigma) {
        Ok(g) => g,
        Err(e) => {
            r.fail("descend", e.to_string());
            return None;
        }
    };
    if pr.sigma != (1, 1) {
        construction.push_str("+descended");
    }
    let a = audit(&bump, exc, AUDIT_SAMPLES, s.seed, AUDIT_THRESHOLD, AUDIT_RADIUS);
    r.bump = Some(BumpReport { construction, function: bump.clone(), cones: cones_report, profile: profile_report, audit: a });
    Some(Built { on_pullback: hq, bump, patched })
}

fn certify_bump(r: &mut AnalysisReport, pr: &Prepared, b: &Built, exc_q: &ExceptionalSet, s: &Settings, bracket: bool) {
    let delta0 = b.bump.delta0;
    let c = certify_psd(&Target::bumped(&pr.p, &b.bump, delta0), &Region::FullSphere, 0.0, &s.certify());
    let id = r.add_certificate("bumped", &format!("p - {delta0} H is plurisubharmonic"), c);
    let bracket = bracket.then(|| {
        let opts = s.bracket();
        let br = max_delta(&pr.p, &b.bump, &Region::FullSphere, &opts);
        let certificate = br.lo_certificate.clone().map(|c| {
            // the bracket is a report, its certificate does not gate the outcome
            r.certificates.push(crate::report::CertificateEntry {
                id: "delta_lo".into(),
                claim: format!("p - {} H is plurisubharmonic (bracket grid)", br.delta_lo),
                certificate: c,
            });
            "delta_lo".to_string()
        });
        BracketReport {
            delta_lo: br.delta_lo,
            delta_hi: br.delta_hi,
            steps: br.steps,
            grid: [opts.grid.nt, opts.grid.ntheta, opts.grid.ntheta],
            certificate,
        }
    });
    r.delta = Some(DeltaReport { delta0, certificate: id, bracket });
    if b.patched {
        let k = pr.q.homogeneous_degree().unwrap_or(0) / 2;
        let st = certify_strict_off_lines(&pr.q, Some(&b.on_pullback), delta0, exc_q, k, &s.certify().fixed());
        let id = r.add_certificate(
            "strict",
            "the bumped pullback is strictly plurisubharmonic off the exceptional lines",
            st.certificate,
        );
        r.strictness = Some(StrictReport { c: st.c, exponent: st.exponent, certificate: id });
    }
}

/// Everything up to and including the bump; `full` adds the psh
/// certificate, the bracket and the strictness check.
pub fn analyze(input: &Input, s: &Settings, command: &str, full: bool) -> AnalysisReport {
    let mut r = AnalysisReport::new(command, echo(input));
    let Some(pr) = prepare(&mut r, input) else { return r };
    if check_pluriharmonic(&mut r, &pr) {
        return r;
    }
    if full && certify_polynomial(&mut r, &pr, s) == Outcome::Violated {
        return r;
    }
    let Some(exc) = exceptional(&mut r, &pr, s) else { return r };
    let exc_q = pulled_back(&exc);
    if classify(&mut r, &pr, &exc_q) != Outcome::Certified {
        return r;
    }
    if let Some(b) = build_bump(&mut r, &pr, &exc, &exc_q, input.hint.as_ref(), s) {
        certify_bump(&mut r, &pr, &b, &exc_q, s, full);
    }
    r
}

pub fn lines(input: &Input, s: &Settings) -> AnalysisReport {
    let mut r = AnalysisReport::new("lines", echo(input));
    if let Some(pr) = prepare(&mut r, input) {
        exceptional(&mut r, &pr, s);
    }
    r
}

pub fn classify_only(input: &Input, s: &Settings) -> AnalysisReport {
    let mut r = AnalysisReport::new("classify", echo(input));
    let Some(pr) = prepare(&mut r, input) else { return r };
    if check_pluriharmonic(&mut r, &pr) {
        return r;
    }
    if let Some(exc) = exceptional(&mut r, &pr, s) {
        classify(&mut r, &pr, &pulled_back(&exc));
    }
    r
}

pub fn factor_only(input: &Input) -> AnalysisReport {
    let mut r = AnalysisReport::new("factor", echo(input));
    if let Some(pr) = prepare(&mut r, input) {
        factor(&mut r, &pr, input.hint.as_ref());
    }
    r
}

pub fn certify_only(input: &Input, s: &Settings) -> AnalysisReport {
    let mut r = AnalysisReport::new("certify", echo(input));
    if let Some(pr) = prepare(&mut r, input) {
        certify_polynomial(&mut r, &pr, s);
    }
    r
}

pub fn examples(which: Option<Example>, s: &Settings) -> AnalysisReport {
    let input = InputEcho {
        source: which.map_or("all".into(), |e| e.name().into()),
        poly: None,
        weights: None,
        hint: None,
    };
    let mut r = AnalysisReport::new("examples", input);
    let list: Vec<Example> = which.map_or(ALL.to_vec(), |e| vec![e]);
    let mut out = Vec::new();
    for e in list {
        let f = e.fixture();
        let mut sub = AnalysisReport::new("certify", InputEcho { source: f.name.into(), poly: None, weights: None, hint: None });
        let input = Input { source: f.name.into(), poly: f.poly.clone(), weights: f.weights, hint: None };
        let Some(pr) = prepare(&mut sub, &input) else {
            r.fail("fixture", format!("fixture {} is malformed", f.name));
            continue;
        };
        let c = certify_psd(&Target::poly(&pr.q), &Region::FullSphere, 0.0, &s.certify());
        let outcome = Outcome::of(&c);
        let id = format!("psh:{}", f.name);
        r.add_certificate(&id, &format!("fixture {} is plurisubharmonic", f.name), c);
        out.push(FixtureReport {
            name: f.name.into(),
            description: f.description.into(),
            poly: f.poly,
            weights: f.weights.map(|(a, b)| [a, b]),
            outcome,
            certificate: id,
        });
    }
    r.fixtures = Some(out);
    r
}

fn read_input(a: &InputArgs) -> Result<Input, (String, String)> {
    let (source, poly, weights) = match (&a.poly, a.example) {
        (Some(text), _) => {
            let p = parse_poly(text).map_err(|e| ("parse".to_string(), e.to_string()))?;
            (text.clone(), p, a.weights)
        }
        (None, Some(e)) => {
            let f = e.fixture();
            (f.name.to_string(), f.poly, a.weights.or(f.weights))
        }
        (None, None) => return Err(("usage".into(), "one of --poly or --example is required".into())),
    };
    let hint = match &a.hint {
        Some(h) => Some(parse_holomorphic(h).map_err(|e| ("parse".to_string(), format!("hint: {e}")))?),
        None => None,
    };
    Ok(Input { source, poly, weights, hint })
}

fn csv_rows(r: &AnalysisReport, input: &Input, s: &Settings) -> Vec<u8> {
    let mut scratch = AnalysisReport::new("csv", echo(input));
    let mut out = Vec::new();
    let Some(pr) = prepare(&mut scratch, input) else { return out };
    let grid = GridSpec::cube(s.grid);
    let rows = match (&r.bump, &r.delta) {
        (Some(b), Some(d)) => levi_samples(&Target::bumped(&pr.p, &b.function, d.delta0), &Region::FullSphere, grid, s.threads),
        _ => levi_samples(&Target::poly(&pr.q), &Region::FullSphere, grid, s.threads),
    };
    write_samples_csv(&rows, &mut out).expect("csv to memory");
    out
}

fn emit(bytes: &[u8], out_path: Option<&PathBuf>, stdout: &mut dyn Write) -> std::io::Result<()> {
    match out_path {
        Some(p) => std::fs::write(p, bytes),
        None => stdout.write_all(bytes),
    }
}

/// Runs the tool and returns its exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let (args, common) = match &cli.command {
        Command::Examples(a) => {
            let s = Settings::from_args(&a.common);
            let r = examples(a.example, &s);
            let code = r.outcome.exit_code();
            return finish(&r.to_json(), a.common.out.as_ref(), stdout, stderr, code);
        }
        Command::Analyze(a)
        | Command::Lines(a)
        | Command::Classify(a)
        | Command::Factor(a)
        | Command::Bump(a)
        | Command::Certify(a) => (a, &a.common),
    };
    let s = Settings::from_args(common);
    let input = match read_input(args) {
        Ok(i) => i,
        Err((kind, message)) => {
            let echo = InputEcho {
                source: args.poly.clone().unwrap_or_default(),
                poly: None,
                weights: args.weights.map(|(a, b)| [a, b]),
                hint: None,
            };
            let mut r = AnalysisReport::new(command_name(&cli.command), echo);
            r.fail(&kind, message);
            return finish(&r.to_json(), common.out.as_ref(), stdout, stderr, 1);
        }
    };
    let r = match &cli.command {
        Command::Analyze(_) => analyze(&input, &s, "analyze", true),
        Command::Bump(_) => analyze(&input, &s, "bump", false),
        Command::Lines(_) => lines(&input, &s),
        Command::Classify(_) => classify_only(&input, &s),
        Command::Factor(_) => factor_only(&input),
        Command::Certify(_) => certify_only(&input, &s),
        Command::Examples(_) => unreachable!(),
    };
    let code = r.outcome.exit_code();
    let bytes = match common.format {
        Format::Json => r.to_json().into_bytes(),
        Format::Csv => csv_rows(&r, &input, &s),
    };
    finish_bytes(&bytes, common.out.as_ref(), stdout, stderr, code)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Analyze(_) => "analyze",
        Command::Lines(_) => "lines",
        Command::Classify(_) => "classify",
        Command::Factor(_) => "factor",
        Command::Bump(_) => "bump",
        Command::Certify(_) => "certify",
        Command::Examples(_) => "examples",
    }
}

fn finish(text: &str, out: Option<&PathBuf>, stdout: &mut dyn Write, stderr: &mut dyn Write, code: i32) -> i32 {
    finish_bytes(text.as_bytes(), out, stdout, stderr, code)
}

fn finish_bytes(bytes: &[u8], out: Option<&PathBuf>, stdout: &mut dyn Write, stderr: &mut dyn Write, code: i32) -> i32 {
    match emit(bytes, out, stdout) {
        Ok(()) => code,
        Err(e) => {
            let _ = writeln!(stderr, "pshbump: cannot write output: {e}");
            1
        }
    }
}
