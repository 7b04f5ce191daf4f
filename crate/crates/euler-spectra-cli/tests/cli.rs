//! End-to-end tests of the command-line interface: exit codes, the frozen
//! CSV column contract, byte-identical reruns and JSON schema stability.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_euler-spectra"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_config(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("euler-spectra-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const SCAN_HEADER: &str = "lambda_re,lambda_im,detK_re,detK_im,detT_re,detT_im,evans_re,evans_im,jost_re,jost_im,g_re,g_im,gap,N,N_tail,depth,error";

#[test]
fn validate_exit_codes() {
    let ok = run(&["validate", "--p", "2,3", "--q", "2,-1"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("admissible: true"));

    let fail = run(&["validate", "--p", "1,0", "--q", "0,1"]);
    assert_eq!(fail.status.code(), Some(1));
    assert!(stdout(&fail).contains("FAIL"));

    let degenerate = run(&["validate", "--p", "2,3", "--q", "4,6"]);
    assert_eq!(degenerate.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&degenerate.stderr).contains("degenerate slice"));
}

#[test]
fn validate_json_parses() {
    let out = run(&["validate", "--p", "2,3", "--q", "2,-1", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["admissible"], serde_json::Value::Bool(true));
    assert_eq!(v["ring_checks"].as_array().unwrap().len(), 4);
}

#[test]
fn eval_free_config_is_unity() {
    let path = write_config(
        "free.toml",
        "mode = \"general\"\nwindow = 4\nunit_rho = true\n",
    );
    let out = run(&[
        "eval",
        "--config",
        path.to_str().unwrap(),
        "--lambda",
        "1.5",
        "--N",
        "16",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    // complex values serialize as [re, im] pairs
    for key in ["det_k", "det_t", "evans", "jost", "g_fun"] {
        let re = v[key][0].as_f64().unwrap();
        let im = v[key][1].as_f64().unwrap();
        assert!((re - 1.0).abs() < 1e-12 && im.abs() < 1e-12, "{key}");
    }
    assert!(v["max_pairwise_gap"].as_f64().unwrap() < 1e-12);
}

#[test]
fn eval_rejects_segment_points() {
    let out = run(&[
        "eval", "--p", "2,3", "--q", "2,-1", "--lambda", "0,1", "--N", "16",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("essential spectrum"));
}

#[test]
fn eval_reference_config_cross_validates() {
    let out = run(&[
        "eval", "--p", "2,3", "--q", "2,-1", "--lambda", "1", "--n-tail", "30000", "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["max_pairwise_gap"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn scan_contract_and_determinism() {
    let dir = std::env::temp_dir().join("euler-spectra-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let out1 = dir.join("scan_a.csv");
    let out2 = dir.join("scan_b.csv");
    let args = |path: &PathBuf| {
        vec![
            "scan".to_string(),
            "--p".into(),
            "2,3".into(),
            "--q".into(),
            "2,-1".into(),
            "--grid".into(),
            "0.5,1.5,3,-0.5,0.5,3".into(),
            "--N".into(),
            "24".into(),
            "--n-tail".into(),
            "8000".into(),
            "--out".into(),
            path.to_str().unwrap().to_string(),
        ]
    };
    let s1 = bin().args(args(&out1)).output().unwrap();
    assert_eq!(s1.status.code(), Some(0));
    let s2 = bin()
        .args(args(&out2))
        .env("EULER_SPECTRA_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(s2.status.code(), Some(0));

    let text1 = std::fs::read_to_string(&out1).unwrap();
    let text2 = std::fs::read_to_string(&out2).unwrap();
    // byte-identical reruns, independent of the worker pool size
    assert_eq!(text1, text2);

    let lines: Vec<&str> = text1.lines().collect();
    assert_eq!(lines[0], SCAN_HEADER);
    assert_eq!(lines.len(), 1 + 9, "one row per grid point");
    // row-major with re fastest: first two rows share im, advance re
    let first: Vec<&str> = lines[1].split(',').collect();
    let second: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(first[1], second[1]);
    assert!(first[0].parse::<f64>().unwrap() < second[0].parse::<f64>().unwrap());
    // every full-precision field round-trips
    for cell in &first[..13] {
        cell.parse::<f64>().unwrap();
    }
}

#[test]
fn scan_skips_segment_rows_but_keeps_them() {
    let out = run(&[
        "scan",
        "--p",
        "2,3",
        "--q",
        "2,-1",
        "--grid",
        "-0.5,0.5,3,0,0,1",
        "--N",
        "16",
        "--n-tail",
        "4000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 3);
    let mid: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(mid[0].parse::<f64>().unwrap(), 0.0);
    let error_cell = mid.last().unwrap();
    assert!(
        error_cell.contains("essential spectrum"),
        "skipped row must carry the reason, got {error_cell:?}"
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipping"));
}

#[test]
fn find_json_schema_round_trips() {
    let out = run(&[
        "find", "--p", "2,3", "--q", "2,-1", "--n-tail", "20000", "--N", "48", "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!((v["lambda_star"][0].as_f64().unwrap() - 0.8467994030).abs() < 1e-6);
    assert_eq!(v["winding"].as_i64().unwrap(), 1);
    assert!(v["residual"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["oracle"].as_array().unwrap().len(), 3);
    // schema stability: parse -> re-serialize reproduces the bytes
    let reserialized = serde_json::to_string_pretty(&v).unwrap();
    assert_eq!(text.trim_end(), reserialized);
}

#[test]
fn find_requires_negative_rho0() {
    let path = write_config(
        "free_find.toml",
        "mode = \"general\"\nwindow = 4\nunit_rho = true\n",
    );
    let out = run(&["find", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rho_0 < 0"));
}

#[test]
fn verify_passes_flow_and_general_configs() {
    // section sizes stay at the verify default: the 1e-6 thresholds are
    // calibrated for them and honestly fail on much smaller sections
    let out = run(&["verify", "--p", "2,3", "--q", "2,-1", "--n-tail", "20000"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("all checks passed"));

    // general free config: rho-dependent checks are skipped, rest passes
    let path = write_config("free_verify.json", r#"{"mode": "general", "window": 4}"#);
    let out = run(&[
        "verify",
        "--config",
        path.to_str().unwrap(),
        "--N",
        "24",
        "--n-tail",
        "64",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.contains("skipped"));
    assert!(text.contains("all checks passed"));
}

#[test]
fn verify_surfaces_contraction_failure() {
    let out = run(&["verify", "--p", "2,3", "--q", "2,-1", "--n-tail", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("contraction failure"));
}

#[test]
fn oracle_reports_sections() {
    let out = run(&[
        "oracle",
        "--p",
        "2,3",
        "--q",
        "2,-1",
        "--N",
        "16,32",
        "--lambda-max",
        "5",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let entries = v.as_array().unwrap();
    assert_eq!(entries.len(), 2);
    for entry in entries {
        let roots = entry["roots"].as_array().unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0].as_f64().unwrap() - 0.8468).abs() < 1e-3);
    }
}

#[test]
fn missing_input_is_invalid() {
    let out = run(&["eval", "--lambda", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--config"));
}
