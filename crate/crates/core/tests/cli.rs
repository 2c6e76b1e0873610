use std::process::{Command, Output};

use apportion_core::report::Report;
use serde_json::Value;

fn quota(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quota"))
        .args(args)
        .env_remove("QUOTA_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = quota(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

#[test]
fn apportion_reports_a_caused_violation() {
    let v = json(&[
        "apportion",
        "--method",
        "mod-jefferson",
        "--pops",
        "1,100,1990",
        "--seats",
        "10",
    ]);
    let rows = v.as_array().unwrap();
    let seats: Vec<u64> = rows.iter().map(|r| r["seats"].as_u64().unwrap()).collect();
    assert_eq!(seats, [1, 1, 8]);
    assert_eq!(rows[2]["violation"], "lower");
    assert_eq!(rows[2]["cause"], "caused-by-nonzero");
    assert_eq!(rows[2]["offending"], true);
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| quota(args).status.code();
    assert_eq!(
        code(&[
            "apportion",
            "--method",
            "webster",
            "--pops",
            "1,3",
            "--seats",
            "2"
        ]),
        Some(2)
    );
    assert_eq!(
        code(&[
            "apportion",
            "--method",
            "webster",
            "--pops",
            "1,1",
            "--seats",
            "3"
        ]),
        Some(1)
    );
    assert_eq!(
        code(&[
            "apportion",
            "--method",
            "nope",
            "--pops",
            "1,2",
            "--seats",
            "3"
        ]),
        Some(1)
    );
    assert_eq!(
        code(&[
            "simulate",
            "--method",
            "hh",
            "--seats",
            "5",
            "--samples",
            "0"
        ]),
        Some(1)
    );
    assert_eq!(code(&["frobnicate"]), Some(1));
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["verify", "--suite", "table1"]), Some(0));
}

#[test]
fn formats_carry_the_same_numbers() {
    let base = [
        "prob",
        "exact",
        "--method",
        "mod-jefferson",
        "--seats",
        "10",
    ];
    let with = |f: &'static str| {
        let mut a = vec!["--format", f];
        a.extend(base);
        stdout(&a)
    };
    let from_json = Report::from_json(&with("json")).unwrap();
    let from_csv = Report::from_csv(&with("csv")).unwrap();
    assert_eq!(from_json, from_csv);
    assert!(with("csv").contains("0.111111"));
    assert!(with("md").contains("| 0.111111 |"));
}

#[test]
fn table_matches_reference_values() {
    let v = json(&[
        "prob",
        "table",
        "--seats",
        "10,20",
        "--methods",
        "adams,dean",
    ]);
    let got: Vec<f64> = v
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| [r["M=10"].as_f64().unwrap(), r["M=20"].as_f64().unwrap()])
        .collect();
    let want = [0.380, 0.385, 0.278, 0.244];
    assert_eq!(got.len(), 4);
    for (g, w) in got.iter().zip(want) {
        assert_eq!(format!("{g:.3}"), format!("{w:.3}"));
    }
}

#[test]
fn integral_and_limit() {
    let v = json(&[
        "prob",
        "integral",
        "--method",
        "hh",
        "--seats",
        "5",
        "--density",
        "exp-iid",
    ]);
    assert!((v[0]["value"].as_f64().unwrap() - 0.131).abs() < 1e-3);
    let v = json(&["prob", "limit", "--method", "adams"]);
    assert_eq!(v[0]["value"].as_f64().unwrap(), 0.386294);
}

#[test]
fn simulate_is_seeded() {
    let args = [
        "simulate",
        "--method",
        "hh",
        "--seats",
        "5",
        "--sampler",
        "exp-iid",
        "--samples",
        "20000",
    ];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v[0]["seed"], 42);

    let reseeded = Command::new(env!("CARGO_BIN_EXE_quota"))
        .args(args)
        .env("QUOTA_SEED", "7")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&reseeded.stdout).unwrap();
    assert_eq!(v[0]["seed"], 7);
}

#[test]
fn tau_and_violatory_set() {
    let v = json(&["tau", "--pops", "1,2,5"]);
    assert!((v[0]["tau"].as_f64().unwrap() - 2.0 / 15.0).abs() < 1e-6);
    let v = json(&["vset", "--method", "mod-jefferson", "--seats", "10"]);
    assert_eq!(v[0]["tau_low"].as_f64().unwrap(), 0.259259);
    assert!((1.5 * v[0]["total_length"].as_f64().unwrap() - 1.0 / 9.0).abs() < 1e-5);
}
