use std::io::Write;
use std::process::{Command, Output, Stdio};

use denslift::lift::second_order_canonical_lift;
use denslift::syntax::{from_json, parse_operator, SessionConfig};
use denslift::Scalar;

fn denslift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_denslift")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

fn ok(args: &[&str]) -> String {
    let o = denslift(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

#[test]
fn adjoint_of_weight_operator() {
    assert_eq!(ok(&["adjoint", "--dim", "1", "L"]), "1 - L");
}

#[test]
fn second_order_lift_at_one_third() {
    let out = ok(&["lift", "second", "--dim", "1", "--lambda0", "1/3", "a D1 D1 + b D1 + c"]);
    let cfg = SessionConfig::new(1);
    let delta = parse_operator("a D1 D1 + b D1 + c", &cfg).unwrap();
    let expect = second_order_canonical_lift(&delta, &Scalar::frac(1, 3)).unwrap();
    assert_eq!(parse_operator(&out, &cfg).unwrap(), expect);
    assert!(out.contains("(-2*a_,1 + 3*b)*D1"));
}

#[test]
fn exit_codes() {
    let o = denslift(&["lift", "second", "--lambda0", "1/2", "a D1 D1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceptional weight 1/2"));
    let o = denslift(&["adjoint", "--dim", "1", "D1 D2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = denslift(&["compose", "a (", "D1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_output_reingests() {
    let out = ok(&["lift", "distinguished", "--dim", "2", "--volume", "generic", "--json", "S[1,2] D1 D2 + T[2] D2"]);
    let op = from_json(&out).unwrap();
    let text = ok(&["lift", "distinguished", "--dim", "2", "--volume", "generic", "S[1,2] D1 D2 + T[2] D2"]);
    assert_eq!(parse_operator(&text, &SessionConfig::new(2)).unwrap(), op);
    assert!(out.contains(r#""schema":"denslift/1""#));
}

#[test]
fn reads_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_denslift"))
        .args(["adjoint", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"a D1").unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(stdout(&o), "-a_,1 - a*D1");
}

#[test]
fn every_command_has_a_happy_path() {
    let cases: &[&[&str]] = &[
        &["compose", "D1", "a"],
        &["lift", "canonical", "--volume", "generic", "a D1 D1"],
        &["lift", "vol", "--volume", "generic", "--params", "b=2,c1=1", "a D1"],
        &["lift", "first", "--params", "c=3", "a D1 + b"],
        &["lift", "proj", "a D1 D1"],
        &["taylor", "--volume", "generic", "a D1 D1"],
        &["assemble", "a D1", "b"],
        &["symbol", "a D1 D1 D1"],
        &["quantize", "a*xi^2 + b*xi"],
        &["schwarzian", "--lambda0", "1/3", "a D1 D1 + b D1 + c"],
    ];
    for args in cases {
        ok(args);
    }
}

#[test]
fn checks() {
    let pass = |args: &[&str]| assert_eq!(ok(args).lines().last(), Some("PASS"), "{args:?}");
    pass(&["check", "adjoint-involution", "--dim", "2", "S[1,2] D1 D2 L + T[1] D1"]);
    pass(&["check", "equivariance", "--lift", "second", "--dim", "2", "S[1,1] D1 D1 + T[2] D2 + R"]);
    pass(&["check", "equivariance", "--lift", "proj", "--dim", "2", "S[1,2] D1 D2 D2 + T[1] D1"]);
    pass(&["check", "variation", "--volume", "generic", "--dim", "2", "S[1,2] D1 D2 + T[1] D1"]);
    pass(&["check", "sdiff-classify", "--dim", "3"]);
    pass(&["check", "sdiff-classify", "--dim", "3", "--params", "a2=-1,a3=1,b1=1,b2=-1"]);
    pass(&["check", "regular", "--lift", "distinguished", "--volume", "generic", "a D1 D1 D1"]);
    pass(&["check", "selfadjoint", "--lift", "distinguished", "--volume", "generic", "a D1 D1 D1"]);
    pass(&["check", "cocycle", "--lambda0", "1/3", "a D1 D1 + b D1 + c"]);
    let fail = ok(&["check", "equivariance", "--lift", "canonical", "--volume", "generic", "a D1 D1"]);
    assert!(fail.starts_with("FAIL: "), "{fail}");
    let fail = ok(&["check", "sdiff-classify", "--dim", "3", "--params", "a1=1"]);
    assert!(fail.starts_with("FAIL: "), "{fail}");
}
