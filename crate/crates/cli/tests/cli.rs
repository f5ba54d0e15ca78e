use std::path::Path;
use std::process::{Command, Output};

use levymult::matrix_decomp::beurling_ahlfors_atoms;
use num_complex::Complex64;
use serde_json::{json, Value};

fn levymult(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levymult"))
        .args(args)
        .env_remove("LEVYMULT_THREADS")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, value: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn four_atom_config(dir: &Path) -> String {
    let pair = serde_json::to_value(beurling_ahlfors_atoms()).unwrap();
    write(dir, "ba.json", &json!({ "kind": "general", "pair": pair }))
}

fn parse_csv(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|s| s.parse().unwrap()).collect())
        .collect()
}

#[test]
fn four_atoms_reproduce_the_unimodular_symbol_at_360_angles() {
    let dir = tempfile::tempdir().unwrap();
    let config = four_atom_config(dir.path());
    let out = levymult(&["symbol-eval", "--config", &config, "--angles", "360"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# rel_tol=1e-10 abs_tol=1e-13"));
    let rows = parse_csv(&text);
    assert_eq!(rows.len(), 360);
    let mut worst: f64 = 0.0;
    for row in &rows {
        let arg = row[1].atan2(row[0]);
        let (re, im) = ((-2.0 * arg).cos(), (-2.0 * arg).sin());
        worst = worst.max((row[2] - re).hypot(row[3] - im));
    }
    assert!(worst < 1e-12, "max error {worst:e}");
}

#[test]
fn simulate_without_seed_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        dir.path(),
        "s.json",
        &json!({"measure": {"type": "atomic", "atoms": [[[1.0], 1.0]]}, "drift": [0.0], "horizon": 1.0}),
    );
    let out = levymult(&["simulate", "--check", "wang", "--scenario", &scenario]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--seed"), "{err}");
    assert!(err.to_lowercase().contains("usage"), "{err}");
}

#[test]
fn catalogue_with_defaults_passes_and_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("catalogue.json");
    let out = levymult(&["catalogue", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["pass"], json!(true));
    assert_eq!(doc["metadata"]["rel_tol"], json!(1e-10));
    let entries = doc["result"]["entries"].as_array().unwrap();
    assert!(entries.len() >= 20);
    assert!(entries.iter().all(|e| e["pass"] == json!(true)));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write(
        dir.path(),
        "s.json",
        &json!({
            "measure": {"type": "atomic", "atoms": [[[0.8], 1.5], [[-2.0], 0.5]]},
            "drift": [0.7],
            "modulator": {"kind": "constant", "c": [0.0, 1.0]},
            "horizon": 1.0,
            "point": [0.1]
        }),
    );
    let run = |threads: &str, extra: &[&str]| {
        let mut args = vec!["--threads", threads];
        args.extend_from_slice(extra);
        let out = levymult(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let wang = ["simulate", "--check", "wang", "--scenario", &scenario, "--paths", "2000", "--seed", "9"];
    assert_eq!(run("1", &wang), run("3", &wang));

    let config = four_atom_config(dir.path());
    let norm = [
        "opnorm", "--config", &config, "--p", "3", "--n", "16", "--trials", "6", "--iterations", "10",
    ];
    assert_eq!(run("1", &norm), run("4", &norm));
}

#[test]
fn tolerance_override_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = write(dir.path(), "m.json", &json!({"re": [[0.0, -1.0], [-1.0, 0.0]]}));
    let out = levymult(&["--tol", "1e-8", "decompose", "--matrix", &matrix]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["metadata"]["rel_tol"], json!(1e-8));
}

#[test]
fn apply_round_trips_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let grid = levymult::multiplier_apply::GridFunction::from_fn(1, 16, 8.0, |x| {
        Complex64::new((-x[0] * x[0]).exp(), 0.0)
    })
    .unwrap();
    let input = dir.path().join("g.csv");
    grid.write_csv(std::fs::File::create(&input).unwrap()).unwrap();
    let config = write(dir.path(), "id.json", &json!({"kind": "quadratic_form", "a": {"re": [[1.0]]}}));
    let out_path = dir.path().join("out.csv");
    let out = levymult(&[
        "apply", "--config", &config, "--input", input.to_str().unwrap(), "--format", "csv", "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_csv(&std::fs::read_to_string(&out_path).unwrap());
    assert_eq!(rows.len(), 16);
    // The symbol is 1 away from the origin and 0 at it, so the mean is removed.
    let mean = grid.values().iter().map(|v| v.re).sum::<f64>() / 16.0;
    for (row, want) in rows.iter().zip(grid.values()) {
        assert!((row[1] - (want.re - mean)).abs() < 1e-12 && row[2].abs() < 1e-12, "{row:?}");
    }
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["abs_tol"], json!(1e-13));
}
