use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn arborlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arborlab"))
        .args(args)
        .env_remove("ARBORLAB_CACHE")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("arborlab-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn zn_at_alpha_zero_is_catalan() {
    let v = json(&arborlab(&["zn", "--alpha", "0", "--n", "4"]));
    assert_eq!(v["Z"], serde_json::json!([1, 1, 2, 5]));
    assert_eq!(v["config"]["subcommand"], "zn");
    assert_eq!(v["config"]["mode"], "exact");
}

#[test]
fn zn_reports_rationals_and_big_integers_as_strings() {
    let v = json(&arborlab(&["zn", "--alpha", "-1", "--n", "4"]));
    assert_eq!(v["Z"][3], "7/4");
    // C_k by the product formula in u128; C_36 fits a u64, C_39 does not.
    let catalan = |k: u128| (1..=k).fold(1u128, |c, i| c * 2 * (2 * i - 1) / (i + 1));
    let v = json(&arborlab(&["zn", "--alpha", "0", "--n-range", "37:40:3"]));
    assert_eq!(v["Z"][0].as_u64().map(u128::from), Some(catalan(36)));
    assert_eq!(v["Z"][1], catalan(39).to_string());
}

#[test]
fn constants_at_alpha_two() {
    let v = json(&arborlab(&["constants", "--alpha", "2"]));
    let c = v["C_alpha"].as_f64().unwrap();
    assert!((c - std::f64::consts::PI.powf(1.5) / 12.0).abs() < 1e-9);
    assert!((c - 0.464029).abs() < 5e-6);
    assert_eq!(v["branch"], "generic");
    assert!(v["error_estimate"].as_f64().unwrap() < 1e-9);
}

#[test]
fn constants_in_the_log_case() {
    let v = json(&arborlab(&["constants", "--alpha", "-3"]));
    assert_eq!(v["branch"], "logcase");
    assert_eq!(v["C_alpha_exact"], "1/30");
    assert!(v["c_alpha"].is_null());
    let v = json(&arborlab(&["constants", "--alpha", "1"]));
    assert!(v["C_alpha"].is_null());
}

#[test]
fn ball_reports_the_gap_to_a_quarter() {
    let v = json(&arborlab(&["ball", "--t0", "2,0,0", "--alpha", "0", "--n", "500"]));
    assert_eq!(v["lambda"], "1/4");
    let mass = v["exact_mass"].as_f64().unwrap();
    let gap = v["gap"].as_f64().unwrap();
    assert!((mass - 0.25 - gap).abs() < 1e-15);
    assert!(gap.abs() < 0.01);
    assert_eq!(v["config"]["args"]["t0"], "2,0,0");
}

#[test]
fn ball_methods_agree_at_small_sizes() {
    let dp = json(&arborlab(&["ball", "--t0", "2,0,0", "--alpha", "2", "--n", "8"]));
    let bf = json(&arborlab(&["ball", "--t0", "2,0,0", "--alpha", "2", "--n", "8", "--method", "bruteforce"]));
    assert_eq!(dp["exact_mass_rational"], bf["exact_mass_rational"]);
    let emp = json(&arborlab(&[
        "ball", "--t0", "2,0,0", "--alpha", "2", "--n", "8", "--method", "empirical", "--draws", "20000",
    ]));
    let half = emp["ci_halfwidth"].as_f64().unwrap();
    assert!((emp["exact_mass"].as_f64().unwrap() - dp["exact_mass"].as_f64().unwrap()).abs() < half);
}

#[test]
fn sweep_is_csv() {
    let out = arborlab(&["ball", "--t0", "2,0,0", "--alpha", "-1", "--sweep", "10:100:30"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# config: {"));
    assert_eq!(lines[1], "N,exact_mass,lambda,gap");
    let ns: Vec<&str> = lines[2..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ns, ["10", "40", "70", "100"]);
    for l in &lines[2..] {
        let cells: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells.len(), 4);
        assert!((cells[1] - cells[2] - cells[3]).abs() < 1e-15);
    }
}

#[test]
fn sampling_is_reproducible() {
    let args = ["sample", "--alpha", "1.5", "--n", "40", "--count", "20", "--seed", "7"];
    let a = arborlab(&args);
    let b = arborlab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut other = args.to_vec();
    other.extend(["--stream", "1"]);
    assert_ne!(arborlab(&other).stdout, a.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 21);
    assert_eq!(lines[0]["config"]["seed"], 7);
    for l in &lines[1..] {
        assert_eq!(l["N"], 40);
        assert_eq!(l["code"].as_array().unwrap().len(), 40);
    }
}

#[test]
fn count_rows_in_both_modes() {
    let v = json(&arborlab(&["count", "--n", "4"]));
    assert_eq!(v["rows"][3]["E"], serde_json::json!([0, 1, 3, 1]));
    assert_eq!(v["rows"][3]["L"], serde_json::json!([0, 1, 4, 5]));
    let v = json(&arborlab(&["count", "--n", "4", "--mode", "scaled"]));
    assert_eq!(v["rows"][3]["L"][3].as_f64().unwrap(), 5.0 / 256.0);
}

#[test]
fn asymptotics_table() {
    let v = json(&arborlab(&["asymptotics", "--alpha", "2", "--n", "512"]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.last().unwrap()["N"], 512);
    let ratio = rows.last().unwrap()["ratio"].as_f64().unwrap();
    assert!((ratio - 1.0).abs() < 0.05);
    let out = arborlab(&["asymptotics", "--alpha", "-1", "--n-range", "100:300:100", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().nth(1), Some("N,normalized,C_alpha,ratio"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn cache_directory_is_reused() {
    let dir = scratch_dir("cache");
    let d = dir.to_str().unwrap();
    let first = arborlab(&["zn", "--alpha", "2", "--n", "30", "--cache", d]);
    let files: Vec<_> = std::fs::read_dir(&dir).unwrap().collect();
    assert_eq!(files.len(), 1);
    let second = arborlab(&["zn", "--alpha", "2", "--n", "30", "--cache", d]);
    assert_eq!(first.stdout, second.stdout);
    let via_env = Command::new(env!("CARGO_BIN_EXE_arborlab"))
        .args(["zn", "--alpha", "2", "--n", "30"])
        .env("ARBORLAB_CACHE", &dir)
        .output()
        .unwrap();
    assert_eq!(json(&via_env)["Z"], json(&first)["Z"]);
    assert_eq!(json(&via_env)["config"]["cache"], d);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        vec!["zn", "--n", "0"],
        vec!["zn", "--alpha", "0"],
        vec!["zn", "--n", "4", "--n-range", "1:3"],
        vec!["zn", "--n-range", "5:3"],
        vec!["constants"],
        vec!["ball", "--t0", "2,0", "--n", "5"],
        vec!["ball", "--t0", "2,0,0", "--n", "2"],
        vec!["ball", "--t0", "2,0,0", "--n", "8", "--alpha", "0.5", "--method", "bruteforce"],
        vec!["count", "--n", "600", "--mode", "exact"],
        vec!["nonsense"],
    ] {
        let out = arborlab(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn verify_passes_and_reports_failures() {
    let out = arborlab(&["verify"]);
    let v = json(&out);
    assert_eq!(v["failed"], 0);
    assert_eq!(v["properties"].as_array().unwrap().len(), 14);
    // An impossible tolerance makes the constants check fail.
    let out = arborlab(&["verify", "--tol", "1e-300", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("singular_constants,false,")));
}
