//! End-to-end tests of the command-line interface and its exit codes.

use std::process::{Command, Output};

fn houghton(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_houghton"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn eval_commutator_is_the_swap() {
    let out = houghton(&["--json", "eval", "[h2,h3]"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["offsets"], serde_json::json!([0, 0, 0]));
    assert_eq!(v["table"][0]["gen"], "a1_1");
    assert_eq!(v["table"][0]["image"], "a1_2");
    assert_eq!(v["table"][1]["gen"], "a1_2");
    assert_eq!(v["table"][1]["image"], "a1_1");
}

#[test]
fn eval_empty_word_is_identity() {
    let out = houghton(&["--json", "eval", ""]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["table"].as_array().unwrap().len(), 0);
}

#[test]
fn eval_shift() {
    let out = houghton(&["--json", "eval", "h2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["offsets"], serde_json::json!([-1, 1, 0]));
    assert_eq!(v["table"][0]["gen"], "a1_1");
    assert_eq!(v["table"][0]["image"], "a2_1");
}

#[test]
fn eval_parse_error_exits_2() {
    let out = houghton(&["eval", "h9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn trivial_decisions_and_exit_codes() {
    let out = houghton(&["trivial", "[h2,h3] s"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("trivial (compact-check)"));

    let out = houghton(&["trivial", "h2 h3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("nontrivial (flux)"));

    let out = houghton(&["trivial", "t t"]);
    assert_eq!(out.status.code(), Some(0));

    let out = houghton(&["trivial", "rho12 rho12"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flux_routes_agree() {
    let out = houghton(&["--r", "4", "flux", "h3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "(0, 1, 0)");

    let out = houghton(&["flux", "s"]);
    assert_eq!(stdout(&out).trim(), "(0, 0)");

    let out = houghton(&["flux", "h2^3 h3'", "--via", "corank"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "(3, -1)");

    let out = houghton(&["flux", "rho12"]);
    assert_eq!(out.status.code(), Some(2));

    let out = houghton(&["flux", "", "--via", "corank"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "(0, 0)");
}

#[test]
fn verify_families() {
    let out = houghton(&["verify", "--family", "p"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("pass"));

    let out = houghton(&["--r", "2", "verify", "--family", "p"]);
    assert_eq!(out.status.code(), Some(2));

    let out = houghton(&["--json", "verify", "--family", "afv", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["all_hold"], true);
    assert!(v["results"].as_array().unwrap().len() > 50);
}

#[test]
fn verify_reduction_families() {
    let out = houghton(&["--json", "verify", "--family", "r", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["all_hold"], true);
}

#[test]
fn verify_report_written_to_out_path() {
    let dir = std::env::temp_dir().join("houghton-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let out = houghton(&[
        "verify",
        "--family",
        "qprime",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["all_hold"], true);
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn rank_splits_generators() {
    let out = houghton(&["rank", "a1_1 a1_2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "2");

    let out = houghton(&["rank", ""]);
    assert_eq!(stdout(&out).trim(), "0");

    // Comma-separated: two conjugates generating a rank-1 subgroup.
    let out = houghton(&["rank", "a1_1 a1_2 a1_1', a1_1 a1_2 a1_2 a1_1'"]);
    assert_eq!(stdout(&out).trim(), "1");

    let out = houghton(&["--json", "rank", "a1_1"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["rank"], 1);
    assert_eq!(v["graph"]["edges"][0]["label"], "a1_1");
}

#[test]
fn rewrite_reports_stats() {
    let out = houghton(&["--json", "rewrite", "h2 t h2'"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["area"], 0);
    assert_eq!(v["factors"][0]["base"], "t");
    assert_eq!(v["factors"][0]["conjugator"], "h2");

    let out = houghton(&["rewrite", "h2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn growth_table_has_area_column_within_bound() {
    let out = houghton(&["--json", "growth", "--max-len", "8", "--samples", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    for row in rows {
        assert!(row["area_ratio"].as_f64().unwrap() <= 1.0);
    }
    assert_eq!(rows[0]["max_expanded_len"], 0);

    let out = houghton(&["growth", "--max-len", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ceiling_violation_exits_3() {
    let out = houghton(&["--ceiling", "10", "eval", "t^(h2'^40)"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn text_and_json_agree_on_facts() {
    let text = houghton(&["flux", "h2 h2"]);
    let json = houghton(&["--json", "flux", "h2 h2"]);
    assert_eq!(stdout(&text).trim(), "(2, 0)");
    assert_eq!(stdout(&json).trim(), "[2,0]");
}
