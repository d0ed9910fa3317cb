use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::{json, Value};

fn tropbn(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tropbn"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn tropbn");
    if let Some(text) = stdin {
        child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    }
    drop(child.stdin.take());
    child.wait_with_output().unwrap()
}

fn ok_json(args: &[&str], stdin: Option<&str>) -> Value {
    let out = tropbn(args, stdin);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn code(args: &[&str], stdin: Option<&str>) -> i32 {
    tropbn(args, stdin).status.code().unwrap()
}

const NON_GENERIC: &str = r#"{"g":2,"ell":["2/1","1/1"],"m":["1/1","1/1"],"bridges":["1/1"]}"#;

#[test]
fn gen_emits_the_default_chain() {
    let chain = ok_json(&["gen", "--g", "3", "--seed", "7"], None);
    assert_eq!(
        chain,
        json!({"g": 3, "ell": ["5/1", "6/1", "7/1"], "m": ["1/1", "1/1", "1/1"], "bridges": ["1/1", "1/1"]})
    );
    let flat = ok_json(&["gen", "--g", "2", "--no-bridges"], None);
    assert_eq!(flat["bridges"], json!(["0/1"]));
}

#[test]
fn gen_output_round_trips_into_check_reduce_and_rank() {
    for g in 1..=6 {
        let chain = String::from_utf8(tropbn(&["gen", "--g", &g.to_string()], None).stdout).unwrap();
        let check = ok_json(&["check", "--input", "-"], Some(&chain));
        assert_eq!(check["generic"], json!(true));
        let reduced = ok_json(&["reduce", "--input", "-", "--seed", "5"], Some(&chain));
        let text = reduced.to_string();
        let ranked = ok_json(&["rank", "--input", "-"], Some(&text));
        assert_eq!(ranked["reduced"], reduced["reduced"]);
        // reducing a reduced divisor changes nothing
        let again = ok_json(&["reduce", "--input", "-", "--g", &g.to_string()], Some(&reduced["reduced"].to_string()));
        assert_eq!(again["reduced"], reduced["reduced"]);
    }
}

#[test]
fn count_matches_the_expected_census() {
    assert_eq!(
        ok_json(&["count", "--g", "4", "--r", "1", "--d", "3"], None),
        json!({"rho": 0, "lambda": 2, "cells": 2})
    );
    let positive = ok_json(&["count", "--g", "4", "--r", "1", "--d", "4"], None);
    assert_eq!(positive["rho"], json!(2));
    assert_eq!(positive["lambda"], Value::Null);
}

#[test]
fn aj_and_invert_are_inverse() {
    let aj = ok_json(&["aj", "--g", "4", "--d", "3", "--seed", "11"], None);
    let inv = ok_json(&["invert", "--input", "-"], Some(&aj.to_string()));
    assert_eq!(inv["reduced"], aj["reduced"]);
    assert_eq!(inv["point"], aj["point"]);
}

#[test]
fn cells_carry_the_documented_fields() {
    let out = ok_json(&["cells", "--g", "6", "--r", "1", "--d", "4"], None);
    let cells = out["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 5);
    for c in cells {
        for key in ["steps", "free", "fixed", "d0"] {
            assert!(c.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn intersect_gives_g_factorial_points() {
    let out = ok_json(&["intersect", "--g", "3", "--seed", "4"], None);
    let points = out["points"].as_array().unwrap();
    assert_eq!(points.len(), 6);
    assert!(points.iter().all(|p| p["mult"] == json!(1)));
    // feeding the drawn shifts back reproduces the points
    let again = ok_json(&["intersect", "--input", "-"], Some(&json!({"shifts": out["shifts"]}).to_string()));
    assert_eq!(again["points"], out["points"]);
}

#[test]
fn bn_intersect_local_eqns_and_dj_run() {
    let bn = ok_json(&["bn-intersect", "--g", "4", "--r", "1", "--d", "4", "--seed", "2"], None);
    assert_eq!(bn["points"].as_array().unwrap().len(), 12);
    let local = ok_json(&["local-eqns", "--g", "4", "--r", "1", "--d", "4", "--seed", "3"], None);
    assert_eq!(local["equations"].as_array().unwrap().len(), 2);
    let dj = ok_json(&["dj", "--g", "4", "--r", "1", "--d", "4", "--seed", "3"], None);
    assert_eq!(dj["representatives"].as_array().unwrap().len(), 2);
    assert_eq!(dj["reduced"], local["reduced"]);
}

#[test]
fn verify_agrees_on_the_reference_corpus() {
    let out = ok_json(&["verify", "--g", "2", "--trials", "50", "--seed", "1"], None);
    assert_eq!(out["trials"], json!(50));
    assert_eq!(out["agreements"], json!(50));
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["verify", "--g", "2", "--trials", "10", "--seed", "9"][..],
        &["bn-intersect", "--g", "5", "--r", "1", "--d", "5", "--seed", "9"][..],
        &["local-eqns", "--g", "5", "--r", "2", "--d", "6", "--seed", "9"][..],
    ] {
        assert_eq!(tropbn(args, None).stdout, tropbn(args, None).stdout, "{args:?}");
    }
}

#[test]
fn exit_codes_follow_the_error_class() {
    assert_eq!(code(&["check", "--input", "-"], Some(NON_GENERIC)), 2);
    assert_eq!(code(&["rank", "--input", "-"], Some(NON_GENERIC)), 2);
    assert_eq!(code(&["rank", "--input", "-"], Some("not json")), 2);
    assert_eq!(code(&["cells", "--g", "3"], None), 2);
    assert_eq!(code(&["cells", "--g", "3", "--d", "2", "--bogus"], None), 2);
    assert_eq!(code(&["invert", "--g", "3"], None), 2);
    assert_eq!(code(&["cells", "--g", "8", "--r", "1", "--d", "5", "--limit", "3"], None), 1);
    assert_eq!(code(&[], None), 2);
}

#[test]
fn errors_go_to_stderr_only() {
    let out = tropbn(&["cells", "--g", "3"], None);
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}
