use std::process::Command;

use cqoa_cli::{run, Outcome};
use serde_json::{json, Value};

fn cqoa(args: &[&str]) -> Outcome {
    run(std::iter::once("cqoa").chain(args.iter().copied()))
}

fn json_of(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = cqoa(&full);
    assert_eq!(out.code, 0, "{out:?}");
    serde_json::from_str(&out.stdout).unwrap()
}

#[test]
fn bc_ope_document() {
    let doc = json_of(&["ope", "--algebra", "bc:2", "b", "c"]);
    assert_eq!(doc, json!({ "singular": [{ "n": 0, "expr": "1" }], "locality_order": 1 }));
    let doc = json_of(&["ope", "--algebra", "bc:2", "b", "b"]);
    assert_eq!(doc, json!({ "singular": [], "locality_order": 0 }));
}

#[test]
fn stress_tensor_ope_lists_poles_from_the_top() {
    let t = "-:d(b) c: - 2*:b d(c):";
    let doc = json_of(&["ope", "--algebra", "bc:2", t, t]);
    let poles: Vec<i64> = doc["singular"].as_array().unwrap().iter().map(|e| e["n"].as_i64().unwrap()).collect();
    assert_eq!(poles, [3, 1, 0]);
    assert_eq!(doc["singular"][0]["expr"], "-13");
}

#[test]
fn dsquare_shows_the_critical_charge() {
    let out = cqoa(&["brst", "dsquare", "--algebra", "brst", "--kappa", "sym"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("(kappa - 26)/12"), "{}", out.stdout);
    let doc = json_of(&["brst", "dsquare", "--parts"]);
    assert_eq!(doc["parts"]["matter"], "2*:d(c) c L: + kappa/12*:d3(c) c:");
    assert_eq!(doc["reduced"], "(kappa - 26)/12*:d3(c) c:");
}

#[test]
fn nilpotency_depends_on_kappa() {
    assert_eq!(json_of(&["brst", "nilpotency", "--kappa", "26"])["nilpotent"], true);
    let doc = json_of(&["brst", "nilpotency", "--kappa", "25"]);
    assert_eq!(doc["nilpotent"], false);
    assert_eq!(doc["reduced"], "-1/12*:d3(c) c:");
}

#[test]
fn axiom_check_passes() {
    let out = cqoa(&["check-axioms", "--algebra", "vir", "--max-weight", "5", "--n-floor", "-3"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.ends_with("pass\n"), "{}", out.stdout);
}

#[test]
fn rendering_is_canonical_and_reparses() {
    let nf = |src: &str| json_of(&["nf", "--algebra", "bc:2", src])["expr"].as_str().unwrap().to_string();
    assert_eq!(nf("b - b"), "0");
    assert_eq!(nf("-:b c:"), "-:b c:");
    assert_eq!(nf(":b b:"), "0");
    let jj = json_of(&["brst", "dsquare"])["expr"].as_str().unwrap().to_string();
    assert_eq!(json_of(&["nf", &jj])["expr"], jj.as_str());
}

#[test]
fn sweeps_are_reproducible() {
    let args = ["bv", "second-order", "--kappa", "26", "--samples", "20", "--seed", "7", "--max-weight", "3"];
    let first = cqoa(&args);
    assert_eq!(first.code, 0);
    assert_eq!(first, cqoa(&args));
    let oracle = ["oracle-compare", "--algebra", "bc:2", "--max-weight", "1", "--format", "json"];
    let doc: Value = serde_json::from_str(&cqoa(&oracle).stdout).unwrap();
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["pairs"], 144);
}

#[test]
fn brst_layer() {
    let doc = json_of(&["brst", "current"]);
    assert_eq!(doc["current"], "-:b d(c) c: + :c L:");
    assert_eq!(doc["ope_j_b"]["locality_order"], 2);
    let doc = json_of(&["brst", "kernel", "--kappa", "26", "--weight", "0", "--ghost", "0"]);
    assert_eq!(doc["kernel"], json!(["1"]));
    assert_eq!(doc["cohomology_dim"], 1);
    let doc = json_of(&["bv", "bracket", "--kappa", "26", ":b c:", "c", "--dump-states"]);
    assert_eq!(doc["expr"], "-1");
    assert_eq!(doc["states"], json!([{ "state": "|0>", "coefficient": "-1" }]));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["nf", "--algebra", "bc:2", "x"][..],
        &["nf", "--algebra", "bc:2", "b +"],
        &["nf", "--algebra", "bc:2", "--kappa", "3", "b"],
        &["nf", "--algebra", "bc:x", "b"],
        &["nf", "--algebra", "bc:2", "lambda*b"],
        &["brst", "current", "--algebra", "vir"],
        &["brst", "kernel", "--weight", "0", "--ghost", "0"],
        &["circle", "b", "c"],
        &["frobnicate"],
    ] {
        let out = cqoa(args);
        assert_eq!(out.code, 2, "{args:?}: {out:?}");
        assert!(out.stdout.is_empty());
    }
    let out = cqoa(&["nf", "--algebra", "bc:2", "b +", "--format", "json"]);
    assert_eq!(out.code, 2);
    let doc: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(doc["error"]["kind"], "usage");
    assert!(doc["error"]["message"].as_str().unwrap().contains("column 4"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_cqoa");
    let ok = Command::new(bin).args(["ope", "--algebra", "bc:2", "c", "b"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&ok.stdout), "0: 1\nlocality_order: 1\n");
    let bad = Command::new(bin).args(["nf", "--algebra", "bc:2", "x"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).starts_with("error:"));
}
