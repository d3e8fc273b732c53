//! End-to-end tests of the `debias` binary: argument handling, CSV
//! ingestion, exit codes, and the result-document contract.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_debias"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("debias-cli-test-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_density_csv(path: &Path, n: usize, seed: u64) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut text = String::from("x\n");
    for _ in 0..n {
        // triangular-ish mixture is fine for exercising the tool
        let base: f64 = rng.random_range(-1.0..1.0) + rng.random_range(-1.0..1.0);
        let x = if rng.random_bool(0.4) { base + 4.0 } else { base };
        text.push_str(&format!("{x}\n"));
    }
    fs::write(path, text).unwrap();
}

fn write_pairs_csv(path: &Path, n: usize, seed: u64) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut text = String::from("x,y\n");
    for _ in 0..n {
        let x: f64 = rng.random_range(0.0..1.0);
        let noise: f64 = rng.random_range(-0.1..0.1);
        let y = (std::f64::consts::PI * x).sin() + noise;
        text.push_str(&format!("{x},{y}\n"));
    }
    fs::write(path, text).unwrap();
}

#[test]
fn density_band_produces_consistent_document() {
    let dir = workdir("density");
    let input = dir.join("d.csv");
    let out = dir.join("band.json");
    write_density_csv(&input, 200, 1);

    let output = run(&[
        "density-band",
        "--input",
        input.to_str().unwrap(),
        "--alpha",
        "0.05",
        "--boot",
        "50",
        "--seed",
        "7",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");

    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["command"], "density-band");
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["config"]["bandwidth_method"], "rot");
    assert_eq!(doc["config"]["seed"], 7);
    let payload = &doc["payload"];
    let glen = payload["grid"].as_array().unwrap().len();
    assert_eq!(glen, 512);
    for key in ["center", "lower", "upper"] {
        assert_eq!(payload[key].as_array().unwrap().len(), glen);
    }
    let t_hat = payload["t_hat"].as_f64().unwrap();
    assert!(t_hat > 0.0);
    // resolved bandwidth is echoed and positive
    assert!(doc["config"]["bandwidth"].as_f64().unwrap() > 0.0);
}

#[test]
fn json_documents_reserialize_byte_identically() {
    let dir = workdir("roundtrip");
    let input = dir.join("d.csv");
    let out = dir.join("band.json");
    write_density_csv(&input, 150, 2);
    let output = run(&[
        "density-band",
        "--input",
        input.to_str().unwrap(),
        "--boot",
        "20",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success());

    let text = fs::read_to_string(&out).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rewritten = debias_cli::jsonio::from_serde(&parsed).to_canonical_string();
    assert_eq!(text, rewritten, "canonical form must round-trip exactly");
}

#[test]
fn csv_export_matches_band_length() {
    let dir = workdir("csvout");
    let input = dir.join("d.csv");
    let out = dir.join("band.json");
    write_density_csv(&input, 120, 3);
    let output = run(&[
        "density-band",
        "--input",
        input.to_str().unwrap(),
        "--boot",
        "10",
        "--grid",
        "64",
        "--output",
        out.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(output.status.success());
    let table = fs::read_to_string(dir.join("band.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "grid,center,lower,upper");
    assert_eq!(lines.len(), 1 + 64);
}

#[test]
fn regression_band_runs_with_cv() {
    let dir = workdir("regression");
    let input = dir.join("r.csv");
    let out = dir.join("band.json");
    write_pairs_csv(&input, 150, 4);
    let output = run(&[
        "regression-band",
        "--input",
        input.to_str().unwrap(),
        "--boot",
        "30",
        "--grid",
        "128",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["config"]["bandwidth_method"], "cv");
    assert_eq!(doc["payload"]["grid"].as_array().unwrap().len(), 128);
}

#[test]
fn invreg_set_reports_roots_radius_and_normal_ci() {
    let dir = workdir("invreg");
    let input = dir.join("r.csv");
    let out = dir.join("set.json");
    write_pairs_csv(&input, 200, 5);
    let output = run(&[
        "invreg-set",
        "--input",
        input.to_str().unwrap(),
        "--r0",
        "0.5",
        "--boot",
        "40",
        "--bandwidth",
        "0.1",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(doc["payload"]["radius"].as_f64().unwrap() >= 0.0);
    assert!(!doc["payload"]["points"].as_array().unwrap().is_empty());
    assert!(doc["payload"]["normal_ci"].is_object());
}

#[test]
fn simulate_coverage_expands_nominal_sweep() {
    let dir = workdir("simulate");
    let out = dir.join("cov.json");
    let output = run(&[
        "simulate-coverage",
        "--scenario",
        "density_1d",
        "--n",
        "60",
        "--trials",
        "4",
        "--boot",
        "10",
        "--nominal",
        "0.80:0.99:0.01",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let rows = doc["payload"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 20);
    assert_eq!(doc["payload"]["valid_trials"], 4);
    // nondecreasing empirical coverage across nominal levels
    let coverages: Vec<f64> = rows
        .iter()
        .map(|r| r["coverage"].as_f64().unwrap())
        .collect();
    for w in coverages.windows(2) {
        assert!(w[1] >= w[0] - 1e-12);
    }
}

#[test]
fn usage_errors_exit_2() {
    let dir = workdir("usage");
    let input = dir.join("d.csv");
    write_density_csv(&input, 50, 6);

    let bad_alpha = run(&[
        "density-band",
        "--input",
        input.to_str().unwrap(),
        "--alpha",
        "1.5",
    ]);
    assert_eq!(bad_alpha.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&bad_alpha.stderr);
    assert!(stderr.contains("--alpha"), "{stderr}");

    let unknown_flag = run(&["density-band", "--input", "x.csv", "--bogus"]);
    assert_eq!(unknown_flag.status.code(), Some(2));

    let missing_required = run(&["levelset-set", "--input", input.to_str().unwrap()]);
    assert_eq!(missing_required.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&missing_required.stderr);
    assert!(stderr.contains("--level"), "{stderr}");

    let bad_rule = run(&[
        "simulate-coverage",
        "--scenario",
        "density_1d",
        "--bandwidth-rule",
        "bogus",
        "--n",
        "50",
        "--trials",
        "1",
        "--boot",
        "1",
    ]);
    assert_eq!(bad_rule.status.code(), Some(2));
}

#[test]
fn missing_input_exits_3() {
    let output = run(&["density-band", "--input", "/definitely/not/here.csv"]);
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn malformed_rows_exit_4_and_name_lines() {
    let dir = workdir("malformed");
    let input = dir.join("bad.csv");
    fs::write(&input, "x\n1.0\nabc\n2.0\nxyz,9\n").unwrap();
    let output = run(&["density-band", "--input", input.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 3"), "{stderr}");
    assert!(stderr.contains("line 5"), "{stderr}");

    let wrong_header = dir.join("hdr.csv");
    fs::write(&wrong_header, "value\n1.0\n2.0\n").unwrap();
    let output = run(&["density-band", "--input", wrong_header.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(4));

    // pairs header required for regression commands
    let output = run(&["regression-band", "--input", input.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(4));
}

#[test]
fn unwritable_output_exits_5() {
    let dir = workdir("io");
    let input = dir.join("d.csv");
    write_density_csv(&input, 60, 7);
    let output = run(&[
        "density-band",
        "--input",
        input.to_str().unwrap(),
        "--boot",
        "5",
        "--output",
        "/nonexistent-dir/band.json",
    ]);
    assert_eq!(output.status.code(), Some(5));
}

#[test]
fn levelset_2d_input_and_set_output() {
    use rand::{Rng, SeedableRng};
    let dir = workdir("levelset2d");
    let input = dir.join("d2.csv");
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    let mut text = String::from("x1,x2\n");
    for _ in 0..300 {
        let cx = if rng.random_bool(0.5) { 0.0 } else { 1.2 };
        let x: f64 = cx + rng.random_range(-0.45..0.45);
        let y: f64 = rng.random_range(-0.45..0.45);
        text.push_str(&format!("{x},{y}\n"));
    }
    fs::write(&input, text).unwrap();
    let out = dir.join("set.json");
    let output = run(&[
        "levelset-set",
        "--input",
        input.to_str().unwrap(),
        "--level",
        "0.2",
        "--boot",
        "20",
        "--grid",
        "48",
        "--output",
        out.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(output.status.success(), "{output:?}");
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let pts = doc["payload"]["points"].as_array().unwrap();
    assert!(!pts.is_empty());
    assert_eq!(pts[0].as_array().unwrap().len(), 2);
    let table = fs::read_to_string(dir.join("set.csv")).unwrap();
    assert!(table.starts_with("x,y,radius"));
}

#[test]
fn stdout_output_when_no_path_given() {
    let dir = workdir("stdout");
    let input = dir.join("d.csv");
    write_density_csv(&input, 80, 8);
    let output = run(&[
        "density-band",
        "--input",
        input.to_str().unwrap(),
        "--boot",
        "5",
        "--grid",
        "32",
    ]);
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["command"], "density-band");
}
