mod common;

use std::process::{Command, Output};

use common::{field, log_integer_unit};
use rigid_hk::pipeline::expansion::parse_expansion;

fn hk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hk")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn tate_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = hk(&["tate", "--p", "5", "--r", "2", "--prec", "20", "--q", "pi", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["spec"]["r"], 2);
    assert_eq!(v["windows"]["matrices_stable"], true);

    let seq = dir.path().join("s.json");
    let o = hk(&["tate", "--p", "5", "--r", "2", "--sequential", "--out", seq.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&seq).unwrap());
    let o = hk(&["report-diff", out.to_str().unwrap(), seq.to_str().unwrap()]);
    assert_eq!(code(&o), 0);

    let other = dir.path().join("o.json");
    assert_eq!(code(&hk(&["tate", "--p", "5", "--r", "3", "--no-stability", "--out", other.to_str().unwrap()])), 0);
    let o = hk(&["report-diff", out.to_str().unwrap(), other.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains(".spec.r: 2 vs 3"));
}

#[test]
fn log_prints_an_expansion() {
    let o = hk(&["log", "--p", "5", "--prec", "30", "--q", "p", "--eval", "10"]);
    assert_eq!(code(&o), 0);
    let k = field(5, 30, None);
    let x = parse_expansion(String::from_utf8(o.stdout).unwrap().trim(), &k).unwrap();
    assert!(common::agrees_with_rational(&x, &log_integer_unit(2, 5, 30), 28));
    let o = hk(&["log", "--p", "5", "--field", "s^2-5", "--q", "pi", "--eval", "pi"]);
    assert_eq!(code(&o), 0);
    let k2 = field(5, 20, Some("s^2-5"));
    assert!(parse_expansion(String::from_utf8(o.stdout).unwrap().trim(), &k2).unwrap().is_zero_to(19));
}

#[test]
fn verify_runs_a_suite() {
    let o = hk(&["verify", "--suite", "choice_of_pi", "--p", "5", "--eisenstein", "s^2-5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["name"], "choice_of_pi");
    assert_eq!(v["passed"], true);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["tate", "--bogus"][..],
        &["tate", "--p", "4"],
        &["tate", "--eisenstein", "s^2-25"],
        &["tate", "--window", "1,2"],
        &["verify", "--suite", "nope"],
        &["log", "--eval", "x"],
        &["report-diff", "/nonexistent/a.json", "/nonexistent/b.json"],
    ] {
        assert_eq!(code(&hk(args)), 2, "{args:?}");
    }
}
