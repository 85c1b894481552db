use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

use epforge::cli::{run_with, EXIT_INVALID, EXIT_MISMATCH, EXIT_NUMERICAL, EXIT_OK};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("epforge").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let (code, out, err) = run(&full);
    assert_eq!(code, EXIT_OK, "{args:?}: {err}");
    serde_json::from_str(&out).unwrap()
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&s).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

#[test]
fn json_output_matches_shipped_schemas() {
    let cases: &[(&str, &[&str])] = &[
        ("secular", &["secular", "--n", "7"]),
        ("secular", &["secular", "--n", "8", "--p", "4"]),
        ("lemma", &["lemma", "--odd", "--k", "4"]),
        ("spectrum", &["spectrum", "--n", "6", "--params", "0.3,-0.2"]),
        ("spectrum", &["spectrum", "--n", "5", "--params", "0.3", "--center", "0.1", "--kinetic-shift"]),
        ("ep4", &["ep4", "--k", "4"]),
        ("ep5", &["ep5", "--n", "7"]),
        ("ep5", &["ep5", "--k", "5", "--eliminate", "b"]),
        ("ep2", &["ep2", "--n", "10"]),
        ("ep_newton", &["ep-newton", "--n", "6", "--p", "2", "--grid", "5"]),
        ("asymptote", &["asymptote", "--k", "7"]),
        ("asymptote", &["asymptote", "--k", "7", "--order", "2"]),
        ("domain", &["domain", "--n", "4", "--resolution", "24", "--check-eps"]),
        ("repro", &["repro", "table1"]),
        ("repro", &["repro", "table2"]),
        ("repro", &["repro", "table3"]),
        ("repro", &["repro", "table4"]),
        ("repro", &["repro", "fig-domains", "--resolution", "32"]),
        ("repro_zcurves", &["repro", "fig-zcurves"]),
    ];
    for (name, args) in cases {
        let v = json(args);
        let validator = schema(name);
        let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
    }
}

/// Roots of y^3 - 5y^2 + 6y - 1 by bisection, then E = +-sqrt(y).
fn free_six_site_levels() -> Vec<f64> {
    let f = |y: f64| ((y - 5.0) * y + 6.0) * y - 1.0;
    let mut out = Vec::new();
    for (mut lo, mut hi) in [(0.0, 0.5), (0.5, 2.0), (2.0, 4.0)] {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(lo) < 0.0) == (f(mid) < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let e = (0.5 * (lo + hi)).sqrt();
        out.extend([-e, e]);
    }
    out.sort_by(f64::total_cmp);
    out
}

#[test]
fn free_six_site_spectrum() {
    let v = json(&["spectrum", "--n", "6", "--params", "0,0"]);
    let ev: Vec<(f64, f64)> = v["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|z| (z[0].as_f64().unwrap(), z[1].as_f64().unwrap()))
        .collect();
    let expected = free_six_site_levels();
    assert_eq!(ev.len(), 6);
    for ((re, im), e) in ev.iter().zip(&expected) {
        assert!((re - e).abs() < 1e-12 && im.abs() < 1e-12);
    }
    assert_eq!(v["is_physical"], Value::Bool(true));
}

#[test]
fn lemma_reports_identity_check() {
    let (code, out, _) = run(&["lemma", "--even", "--k", "3"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("c3 = -1 + A^2 - 2*A*B - A^2*B^2"));
    assert!(out.contains("c2 = 6 - 3*A^2 + 2*A*B - B^2 + A^2*B^2"));
    assert!(out.contains("identity check: PASS"));
}

#[test]
fn table1_csv_passes() {
    let (code, out, _) = run(&["repro", "table1", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn invalid_input_exits_one() {
    for args in [
        &["spectrum", "--n", "1"][..],
        &["spectrum", "--n", "6", "--params", "1,2,3,4"],
        &["ep4", "--n", "7"],
        &["ep5", "--k", "1"],
        &["secular", "--n", "6", "--bogus"],
        &["asymptote", "--k", "5", "--order", "4"],
        &["domain", "--n", "4", "--resolution", "4"],
        &["lemma", "--even", "--odd", "--k", "3"],
        &["lemma", "--even", "--k", "3", "--format", "csv"],
        &["frobnicate"],
    ] {
        let (code, _, err) = run(args);
        assert_eq!(code, EXIT_INVALID, "{args:?}");
        assert!(!err.is_empty());
    }
}

#[test]
fn numerical_failure_exits_two() {
    let (code, _, err) = run(&["spectrum", "--n", "8", "--params", "1,-2", "--tol", "1e-300"]);
    assert_eq!(code, EXIT_NUMERICAL);
    assert!(err.contains("disagree"));
}

#[test]
fn reference_mismatch_exits_three() {
    let bundled = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/reference.json");
    let text = std::fs::read_to_string(bundled).unwrap();
    let path = scratch("perturbed_reference.json");
    std::fs::write(&path, text.replace("-1.683771565", "-1.683771575")).unwrap();
    let p = path.to_str().unwrap();
    let (code, _, err) = run(&["repro", "table1", "--reference", p]);
    assert_eq!(code, EXIT_MISMATCH);
    assert!(err.contains("reference comparison failed"));
    let (code, _, _) = run(&["repro", "table3", "--reference", p]);
    assert_eq!(code, EXIT_OK);

    std::fs::write(&path, "{\"table1\": 3}").unwrap();
    assert_eq!(run(&["repro", "table1", "--reference", p]).0, EXIT_INVALID);
}

#[test]
fn presets_are_deterministic() {
    for args in [
        &["repro", "table2", "--format", "json"][..],
        &["repro", "fig-zcurves", "--format", "csv"],
        &["repro", "fig-domains", "--resolution", "32", "--format", "json"],
        &["ep-newton", "--n", "7", "--p", "3", "--grid", "5", "--format", "json"],
    ] {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.0, EXIT_OK);
        assert_eq!(a.1, b.1, "{args:?}");
    }
}

#[test]
fn config_file_supplies_defaults() {
    let path = scratch("spectrum.conf");
    std::fs::write(&path, "# free chain\ncommand = spectrum\nn = 6\nparams = 0,0\nformat = json\n").unwrap();
    let (code, out, err) = run(&["--config", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    let direct = run(&["spectrum", "--n", "6", "--params", "0,0", "--format", "json"]).1;
    assert_eq!(out, direct);

    let (code, out, _) = run(&["--config", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("re,im,reality_flag"));

    std::fs::write(&path, "command spectrum\n").unwrap();
    assert_eq!(run(&["--config", path.to_str().unwrap()]).0, EXIT_INVALID);
}

#[test]
fn output_flag_writes_file() {
    let path = scratch("secular.txt");
    let (code, out, _) = run(&["secular", "--n", "6", "--output", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with("P(E) = E^6 + (-5 + A^2 + B^2)*E^4"));
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("repro"));
}

#[test]
fn binary_runs_with_thread_override() {
    let out = Command::new(env!("CARGO_BIN_EXE_epforge"))
        .args(["ep2", "--n", "8", "--format", "csv"])
        .env("EPFORGE_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);

    let bad = Command::new(env!("CARGO_BIN_EXE_epforge")).args(["ep2"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_INVALID));
}
