use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spectral-forge"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let p = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> (i32, Value, String) {
    let Output { status, stdout, stderr } = bin().args(args).output().unwrap();
    let json: Value = serde_json::from_slice(&stdout).expect("stdout is JSON");
    (status.code().unwrap(), json, String::from_utf8(stderr).unwrap())
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn hadamard_valid_and_invalid() {
    let d = fixture("half_digits_set.json");
    let l = fixture("half_digits_spectrum.json");
    let (code, json, _) = run(&["check-hadamard", "--digits", path(&d), "--spectrum", path(&l)]);
    assert_eq!(code, 0);
    assert_eq!(json["valid"], true);
    assert_eq!(json["command"], "check-hadamard");
    assert_eq!(json["schema_version"], 1);

    let bad = scratch("same.json", "[0, 2]");
    let (code, json, stderr) = run(&["check-hadamard", "--digits", path(&d), "--spectrum", path(&bad)]);
    assert_eq!(code, 1);
    assert_eq!(json["result"]["failure"]["kind"], "orthogonality_failure");
    assert!(stderr.contains("not orthogonal"));
}

#[test]
fn t1_failure_for_base_24() {
    let d = fixture("base24_four_digit.json");
    let (code, json, stderr) = run(&["check-t1t2", "--base", "24", "--digits", path(&d)]);
    assert_eq!(code, 1);
    assert_eq!(json["result"]["t1"], false);
    assert!(stderr.contains("T1 failure"), "{stderr}");

    let (code, json, _) = run(&["find-spectrum", "--digits", path(&d)]);
    assert_eq!(code, 1);
    assert_eq!(json["result"]["spectra"].as_array().unwrap().len(), 0);
}

#[test]
fn factor_mask_lines() {
    let d = fixture("base24_four_digit.json");
    let (code, json, stderr) = run(&["factor-mask", "--digits", path(&d)]);
    assert_eq!(code, 0);
    assert_eq!(json["result"]["lines"], serde_json::json!(["Phi_2 ^ 1", "Phi_32 ^ 1"]));
    assert_eq!(json["result"]["residual"], "1");
    assert!(stderr.contains("Phi_32 ^ 1"));
}

#[test]
fn input_errors_exit_2() {
    let bad = scratch("bad.json", "{\"digits\": [0, 1,");
    let (code, json, stderr) = run(&["check-t1t2", "--base", "4", "--digits", path(&bad)]);
    assert_eq!(code, 2);
    assert!(json["error"].as_str().unwrap().contains("line"));
    assert!(stderr.contains("input error"));

    let missing = Path::new(env!("CARGO_TARGET_TMPDIR")).join("does-not-exist.json");
    let (code, _, _) = run(&["validate-form", "--spec", path(&missing)]);
    assert_eq!(code, 2);

    let no_base = scratch("no_base.json", "[0, 2]");
    let (code, _, _) = run(&["check-tile", "--digits", path(&no_base)]);
    assert_eq!(code, 2);

    let (code, _, _) = run(&[
        "classify-paq",
        "--p",
        "2",
        "--q",
        "3",
        "--alpha",
        "2",
        "--variant",
        "iv",
    ]);
    assert_eq!(code, 2);

    let out = bin()
        .args(["check-t1t2", "--digits", path(&no_base)])
        .env("SPECTRAL_FORGE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn forms_validate_and_reduce() {
    for name in [
        "mixed_one_stage.json",
        "quarter_tile.json",
        "half_digits.json",
        "two_stage_72.json",
    ] {
        let (code, json, _) = run(&["validate-form", "--spec", path(&fixture(name))]);
        assert_eq!(code, 0, "{name}");
        assert_eq!(json["result"]["report"]["valid"], true);
    }
    let (code, json, _) = run(&[
        "gen-product-form",
        "--spec",
        path(&fixture("mixed_one_stage.json")),
        "--expand",
    ]);
    assert_eq!(code, 0);
    assert_eq!(json["result"]["digits"], serde_json::json!(["0", "1", "8", "25"]));

    let (code, json, _) = run(&["gen-product-form", "--four-digit", "24,1,4,1,1"]);
    assert_eq!(code, 0);
    assert_eq!(json["result"]["base"], 24);
}

#[test]
fn measure_commands() {
    let (code, json, _) = run(&[
        "verify-jp",
        "--form",
        path(&fixture("half_digits.json")),
        "--levels",
        "4",
    ]);
    assert_eq!(code, 0);
    assert_eq!(json["result"]["bessel_ok"], true);
    assert_eq!(json["result"]["deficiency_decreasing"], true);

    let (code, json, _) = run(&[
        "check-lemma42",
        "--form",
        path(&fixture("quarter_tile.json")),
        "--p",
        "2",
    ]);
    assert_eq!(code, 0);
    assert!(json["result"]["max_deviation"].as_f64().unwrap() < 1e-9);

    let (code, json, _) = run(&[
        "weakly-periodic",
        "--form",
        path(&fixture("mixed_one_stage.json")),
        "--resolution",
        "64",
        "--window",
        "16",
    ]);
    assert_eq!(code, 0);
    assert!(json["result"]["min_max"].as_f64().unwrap() > 0.0);
}

#[test]
fn paq_and_tiles() {
    let (code, json, _) = run(&[
        "classify-paq",
        "--p",
        "2",
        "--q",
        "3",
        "--alpha",
        "2",
        "--variant",
        "ii",
        "--m",
        "1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(json["result"]["complete_mod_n"], true);

    let (code, _, _) = run(&[
        "classify-paq",
        "--p",
        "2",
        "--q",
        "3",
        "--alpha",
        "2",
        "--variant",
        "ii",
        "--extra-q",
    ]);
    assert_eq!(code, 1);

    let (code, json, _) = run(&[
        "check-tile",
        "--digits",
        path(&fixture("quarter_tile_set.json")),
        "--base",
        "16",
        "--exhaustive",
    ]);
    assert_eq!(code, 0);
    assert_eq!(json["result"]["exhaustive"]["tiles"], true);
}

#[test]
fn output_is_deterministic() {
    let form = fixture("quarter_tile.json");
    let args = [
        "verify-jp",
        "--form",
        path(&form),
        "--levels",
        "3",
        "--samples",
        "8",
        "--seed",
        "11",
    ];
    let single = bin().args(args).env("SPECTRAL_FORGE_THREADS", "1").output().unwrap();
    let many = bin().args(args).env("SPECTRAL_FORGE_THREADS", "4").output().unwrap();
    let again = bin().args(args).output().unwrap();
    assert_eq!(single.stdout, many.stdout);
    assert_eq!(single.stdout, again.stdout);
}
