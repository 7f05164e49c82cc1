use std::process::Command;

use pshbump::report::{AnalysisReport, Outcome, SCHEMA_VERSION};

fn pshbump(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_pshbump")).args(args).output().expect("binary runs");
    (out.status.code().expect("exit code"), out.stdout)
}

fn report(bytes: &[u8]) -> AnalysisReport {
    serde_json::from_slice(bytes).expect("report parses")
}

#[test]
fn lines_at_plus_minus_one() {
    let (code, out) = pshbump(&["lines", "--poly", "abs2(z1^2 - z2^2)"]);
    assert_eq!(code, 0);
    let r = report(&out);
    let lines = r.exceptional.unwrap().lines;
    assert_eq!(lines.len(), 2);
    assert!(lines.iter().any(|l| l.exact.as_deref() == Some("1")));
    assert!(lines.iter().any(|l| l.exact.as_deref() == Some("-1")));
}

#[test]
fn negative_polynomial_is_violated() {
    let (code, out) = pshbump(&["certify", "--poly", "-abs2(z1)"]);
    assert_eq!(code, 2);
    let r = report(&out);
    assert_eq!(r.outcome, Outcome::Violated);
    assert!(r.certificate("psh").unwrap().witness().is_some());
}

#[test]
fn parse_error_is_a_json_object() {
    let (code, out) = pshbump(&["analyze", "--poly", "abs2(z1)^^2"]);
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(v["error"]["kind"], "parse");
    assert_eq!(v["schema"], SCHEMA_VERSION);
}

#[test]
fn example_two_pipeline() {
    let (code, out) = pshbump(&["analyze", "--example", "ex2", "--weights", "16,16"]);
    assert_eq!(code, 0);
    let r = report(&out);
    assert!(r.degeneracy.as_ref().unwrap().property_b);
    let f = r.factorization.as_ref().unwrap();
    assert_eq!(f.f.to_string(), "z1*z2");
    assert_eq!(f.u, pshbump::polyring::parse_poly(pshbump::fixtures::KN).unwrap());
    let d = r.delta.as_ref().unwrap();
    assert_eq!(d.delta0, 1.0);
    assert!(r.certificate(&d.certificate).unwrap().is_certified());
    assert_eq!(r.bump.as_ref().unwrap().construction, "levelset");
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    for args in [
        vec!["classify", "--example", "ex1"],
        vec!["bump", "--example", "kn", "--grid", "32"],
        vec!["examples", "--grid", "16"],
    ] {
        let (c1, a) = pshbump(&args);
        let (c2, b) = pshbump(&args);
        assert_eq!(c1, c2);
        assert_eq!(a, b, "{args:?}");
        let r = report(&a);
        assert_eq!(r.outcome.exit_code(), c1);
        let again = r.to_json();
        assert_eq!(again.as_bytes(), &a[..]);
    }
}

#[test]
fn thread_count_does_not_change_reports() {
    let (_, a) = pshbump(&["certify", "--example", "ex1", "--threads", "1", "--grid", "24"]);
    let (_, b) = pshbump(&["certify", "--example", "ex1", "--threads", "5", "--grid", "24"]);
    assert_eq!(a, b);
}
