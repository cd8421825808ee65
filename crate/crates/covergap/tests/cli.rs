//! End-to-end runs of the `covergap` binary.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn covergap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covergap"))
        .args(args)
        .env("COVERGAP_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn json_out(args: &[&str]) -> (i32, Value, String) {
    let o = covergap(args);
    let text = String::from_utf8(o.stdout).unwrap();
    let v = serde_json::from_str(&text).unwrap_or(Value::Null);
    (o.status.code().unwrap(), v, text)
}

fn f(v: &Value, path: &[&str]) -> f64 {
    let mut cur = v;
    for p in path {
        cur = &cur[*p];
    }
    cur.as_f64().unwrap_or_else(|| panic!("{path:?} is not a number"))
}

#[test]
fn analyze_two_state() {
    let (code, v, _) = json_out(&["--quiet", "analyze", "--family", "two_state", "--params", "p=0.5", "q=0.5"]);
    assert_eq!(code, 0);
    assert!((f(&v, &["spectral", "gap"]) - 1.0).abs() < 1e-12);
    assert!((f(&v, &["hitting", "alpha_hitting"]) - 1.0).abs() < 1e-12);
    assert!((f(&v, &["hitting", "alpha_spectral"]) - 1.0).abs() < 1e-12);
    assert!((f(&v, &["hitting", "H"]) - 2.0).abs() < 1e-12);
    assert!((v["mixing"]["t_mix_2"][0].as_f64().unwrap() - 2f64.ln()).abs() < 1e-9);
}

#[test]
fn analyze_complete_three() {
    let (code, v, _) = json_out(&["--quiet", "analyze", "--family", "complete", "--params", "n=3"]);
    assert_eq!(code, 0);
    assert!((f(&v, &["hitting", "alpha_hitting"]) - 4.0 / 3.0).abs() < 1e-10);
    assert!((f(&v, &["hitting", "H"]) - 2.0).abs() < 1e-10);
    assert!((f(&v, &["matthews", "upper"]) - 4.197).abs() < 1e-3);
}

#[test]
fn reducible_matrix_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("red.json");
    std::fs::write(&p, r#"{"n": 3, "P": [[1, 0, 0], [0, 0.5, 0.5], [0, 0.5, 0.5]]}"#).unwrap();
    let o = covergap(&["analyze", "--spec", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not irreducible"));
}

#[test]
fn bad_flags_are_input_errors() {
    assert_eq!(covergap(&["analyze"]).status.code(), Some(2));
    assert_eq!(covergap(&["analyze", "--family", "cycle", "--params", "k=3"]).status.code(), Some(2));
    assert_eq!(covergap(&["cover", "--family", "cycle", "--params", "n=4", "--starts", "7"]).status.code(), Some(2));
    assert_eq!(covergap(&["sweep", "--n", "8", "--m-list", "16"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_covergap"))
        .args(["cover", "--family", "cycle", "--params", "n=4"])
        .env("COVERGAP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spec_file_and_family_flags_agree() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.json");
    std::fs::write(&p, r#"{"family": "grid_torus", "params": {"n": 6, "m": 3}}"#).unwrap();
    let (_, _, a) = json_out(&["--quiet", "analyze", "--spec", p.to_str().unwrap()]);
    let (_, _, b) = json_out(&["--quiet", "analyze", "--family", "grid_torus", "--params", "n=6", "m=3"]);
    assert_eq!(a, b);
}

#[test]
fn reports_round_trip_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["analyze", "--family", "hypercube", "--params", "d=3"][..],
        &["cover", "--family", "cycle", "--params", "n=6", "--trials", "200"],
        &["verify", "--family", "random_reversible", "--params", "n=7", "seed=2", "--trials", "200"],
        &["sweep", "--n", "6", "--m-list", "1,3", "--trials", "200", "--format", "json"],
    ] {
        let out = dir.path().join("r.json");
        let mut full = vec!["--quiet"];
        full.extend_from_slice(args);
        full.extend(["--out", out.to_str().unwrap()]);
        let code = covergap(&full).status.code().unwrap();
        assert!(code <= 1, "{args:?}");
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(covergap::canonical::recanonicalize(&text).unwrap(), text, "{args:?}");
    }
}

#[test]
fn verify_random_chain_skips_transitive_rows() {
    let (_, v, _) = json_out(&["--quiet", "verify", "--family", "random_reversible", "--params", "n=40", "seed=5", "--trials", "300"]);
    let checks = v["checks"].as_array().unwrap();
    for id in ["transitive_ratio_lower", "near_set_transitive_size", "cover_lower_transitive", "heat_kernel_diagonal_dominance"] {
        let row = checks.iter().find(|c| c["id"] == id).unwrap_or_else(|| panic!("{id} missing"));
        assert_eq!(row["verdict"], "SKIPPED", "{id}");
    }
}

#[test]
fn verify_torus_has_cover_and_tail_rows() {
    let (_, v, _) = json_out(&["--quiet", "verify", "--family", "grid_torus", "--params", "n=16", "m=4", "--trials", "2000"]);
    let checks = v["checks"].as_array().unwrap();
    for id in [
        "cover_matthews_lower",
        "cover_lower_general",
        "tail_upper_from_point",
        "hit_prob_sandwich_lower",
        "induced_hitting_identity",
    ] {
        let row = checks.iter().find(|c| c["id"] == id).unwrap_or_else(|| panic!("{id} missing"));
        assert_eq!(row["verdict"], "PASS", "{id}");
    }
    for c in checks {
        for k in ["id", "lhs", "rhs", "slack", "verdict"] {
            assert!(c.get(k).is_some());
        }
    }
}

#[test]
fn sweep_csv_columns() {
    let o = covergap(&["--quiet", "sweep", "--n", "8", "--m-list", "4,1", "--trials", "300"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,m,gap,alpha,H,tcov_hat,tcov_stderr,cv,gap_times_tcov,tcov_over_H"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("8,1,"));
    assert!(rows[1].starts_with("8,4,"));
}

#[test]
fn sweep_single_width_matches_cycle() {
    let (_, c, _) = json_out(&["--quiet", "analyze", "--family", "cycle", "--params", "n=12"]);
    let o = covergap(&["--quiet", "sweep", "--n", "12", "--m-list", "1", "--trials", "300", "--format", "json"]);
    let s: Value = serde_json::from_slice(&o.stdout).unwrap();
    let row = &s["rows"][0];
    assert!((f(row, &["gap"]) - f(&c, &["spectral", "gap"])).abs() < 1e-9);
    assert!((f(row, &["alpha"]) - f(&c, &["hitting", "alpha_hitting"])).abs() < 1e-9);
    assert!((f(row, &["H"]) - f(&c, &["hitting", "H"])).abs() < 1e-9);
}

#[test]
fn cover_csv_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("per_start.csv");
    let o = covergap(&["--quiet", "cover", "--family", "complete", "--params", "n=4", "--trials", "500", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(Path::new(&out)).unwrap();
    assert!(text.starts_with("start,mean,stderr\n"));
    assert_eq!(text.lines().count(), 5);
}
