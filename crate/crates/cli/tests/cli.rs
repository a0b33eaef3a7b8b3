use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use fdrisk_cli::{run_manifest, CliError, RunOptions};
use serde_json::{json, Value};
use tempfile::TempDir;

fn write(dir: &Path, v: &Value) -> PathBuf {
    let p = dir.join("m.json");
    fs::write(&p, serde_json::to_vec_pretty(v).unwrap()).unwrap();
    p
}

fn tree_manifest(tasks: Value) -> Value {
    json!({
        "backend": "tree",
        "grid": {"T": 1.0, "N": 4},
        "drivers": [
            {"id": "c01", "kind": "constant", "a": 0.1},
            {"id": "lin", "kind": "linear", "b": 0.3, "a": 0.1}
        ],
        "claims": [
            {"id": "zero", "kind": "constant", "value": 0.0},
            {"id": "b1", "kind": "linear", "z": 1.0, "horizon": 1.0}
        ],
        "tasks": tasks
    })
}

fn config_error(v: &Value) -> (String, String) {
    let dir = TempDir::new().unwrap();
    match run_manifest(&write(dir.path(), v), &RunOptions::default()) {
        Err(CliError::Config { pointer, msg }) => (pointer, msg),
        other => panic!("expected a configuration error, got {other:?}"),
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fdrisk"))
}

#[test]
fn gamma_row_for_a_constant_driver() {
    let dir = TempDir::new().unwrap();
    let m = tree_manifest(json!([{"id": "g", "type": "gamma", "driver": "c01", "claim": "zero", "t": 0.5, "u": [1.0], "tolerance": 1e-12}]));
    let r = run_manifest(&write(dir.path(), &m), &RunOptions::default()).unwrap();
    assert_eq!(r.exit_code, 0);
    let text = fs::read_to_string(r.output_dir.join("g.csv")).unwrap();
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    // one row per level-0 node
    assert_eq!(rows.len(), 1);
    let f = |i: usize| rows[0][i].parse::<f64>().unwrap();
    assert_eq!((f(0), f(1), f(2)), (0.0, 0.5, 1.0));
    assert!((f(3) - 0.05).abs() < 1e-12);
    assert!((f(4) - 0.05).abs() < 1e-15);
    assert!(text.contains("\r\n"));
}

#[test]
fn empty_task_list_succeeds() {
    let dir = TempDir::new().unwrap();
    let r = run_manifest(&write(dir.path(), &tree_manifest(json!([]))), &RunOptions::default()).unwrap();
    assert_eq!(r.exit_code, 0);
    assert_eq!(r.summary["tasks"].as_array().unwrap().len(), 0);
    assert_eq!(r.summary["checks"]["total"], 0);
    let s: Value = serde_json::from_slice(&fs::read(r.output_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["format"], "fdrisk-summary/1");
    assert!(s["measure_change"].as_str().unwrap().contains("exp(int q dB"));
}

#[test]
fn off_grid_time_is_a_config_error_with_pointer() {
    let m = tree_manifest(json!([{"id": "g", "type": "gamma", "driver": "c01", "claim": "zero", "t": 0.33, "u": [1.0]}]));
    let (pointer, msg) = config_error(&m);
    assert_eq!(pointer, "/tasks/0/t");
    assert!(msg.contains("grid"), "{msg}");
}

#[test]
fn unknown_field_is_reported_with_pointer() {
    let m = tree_manifest(json!([{"id": "s", "type": "solve", "driver": "lin", "claim": "b1", "colour": 1}]));
    let (pointer, msg) = config_error(&m);
    assert_eq!(pointer, "/tasks/0/colour");
    assert!(msg.contains("colour"), "{msg}");
    let mut bad = tree_manifest(json!([]));
    bad["drivers"][1]["b"] = json!("steep");
    let (pointer, _) = config_error(&bad);
    assert!(pointer.starts_with("/drivers/1"), "{pointer}");
}

#[test]
fn unknown_references_are_rejected() {
    let m = tree_manifest(json!([{"id": "s", "type": "solve", "driver": "nope", "claim": "b1"}]));
    let (pointer, _) = config_error(&m);
    assert_eq!(pointer, "/tasks/0/driver");
    let m = tree_manifest(json!([{"id": "s", "type": "frobnicate"}]));
    let (pointer, _) = config_error(&m);
    assert_eq!(pointer, "/tasks/0/type");
}

#[test]
fn mc_backend_needs_a_seed() {
    let mut m = tree_manifest(json!([]));
    m["backend"] = json!("mc");
    m["mc"] = json!({"paths": 100});
    let (pointer, msg) = config_error(&m);
    assert!(pointer.starts_with("/mc"), "{pointer}");
    assert!(msg.contains("seed"), "{msg}");
}

#[test]
fn tree_only_tasks_are_rejected_on_mc() {
    let mut m = tree_manifest(json!([{"id": "d", "type": "dual", "driver": "lin", "claim": "b1", "q_grid": {"min": -1.0, "max": 1.0, "points": 5}}]));
    m["backend"] = json!("mc");
    m["mc"] = json!({"paths": 100, "seed": 1});
    let (pointer, _) = config_error(&m);
    assert!(pointer.starts_with("/tasks/0"), "{pointer}");
}

#[test]
fn failing_check_sets_exit_one() {
    let dir = TempDir::new().unwrap();
    let m = tree_manifest(json!([{"id": "n", "type": "check:normalization", "driver": "c01"}]));
    let r = run_manifest(&write(dir.path(), &m), &RunOptions::default()).unwrap();
    assert_eq!(r.exit_code, 1);
    assert_eq!(r.summary["tasks"][0]["status"], "fail");
    assert_eq!(r.summary["checks"]["failed"], 1);
}

#[test]
fn binary_exit_codes() {
    let dir = TempDir::new().unwrap();
    let ok = write(dir.path(), &tree_manifest(json!([{"id": "s", "type": "solve", "driver": "lin", "claim": "b1", "tolerance": 1e-12}])));
    let out = dir.path().join("out");
    let st = bin().args(["run", ok.to_str().unwrap(), "--output-dir", out.to_str().unwrap()]).output().unwrap();
    assert_eq!(st.status.code(), Some(0), "{}", String::from_utf8_lossy(&st.stderr));
    assert!(out.join("s.csv").exists());

    let bad = write(dir.path(), &json!({"backend": "tree"}));
    let st = bin().args(["run", bad.to_str().unwrap()]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));

    let st = bin().args(["run", dir.path().join("missing.json").to_str().unwrap()]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));

    let st = bin().arg("--help").output().unwrap();
    assert_eq!(st.status.code(), Some(0));
}

#[test]
fn tolerance_override_applies_to_checks() {
    let dir = TempDir::new().unwrap();
    let m = tree_manifest(json!([{"id": "n", "type": "check:normalization", "driver": "c01"}]));
    let opts = RunOptions { tolerance: Some(1.0), ..Default::default() };
    let r = run_manifest(&write(dir.path(), &m), &opts).unwrap();
    assert_eq!(r.exit_code, 0);
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical() {
    let tasks = json!([
        {"id": "solve", "type": "solve", "driver": "lin", "claim": "b1"},
        {"id": "surface", "type": "surface", "driver": "lin", "claim": "b1", "s": [0.0, 0.5], "horizons": [1.0]},
        {"id": "recover", "type": "recover-driver", "driver": "lin", "s": [0.0, 0.25], "z": [-1.0, 1.0], "eps_steps": 2},
        {"id": "strong", "type": "check:strong_tc", "driver": "lin", "corpus": {"count": 4}},
        {"id": "gamma", "type": "gamma", "driver": "c01", "claim": "zero", "t": 0.5, "u": [0.5, 1.0]}
    ]);
    let mut mc = tree_manifest(tasks.clone());
    mc["backend"] = json!("mc");
    mc["mc"] = json!({"paths": 2000, "seed": 9, "antithetic": true});
    mc["grid"]["N"] = json!(8);
    for m in [tree_manifest(tasks), mc] {
        let dir = TempDir::new().unwrap();
        let p = write(dir.path(), &m);
        let a = run_manifest(&p, &RunOptions { output_dir: Some(dir.path().join("a")), workers: Some(1), ..Default::default() }).unwrap();
        let b = run_manifest(&p, &RunOptions { output_dir: Some(dir.path().join("b")), workers: Some(4), ..Default::default() }).unwrap();
        assert_eq!(a.exit_code, 0, "{}", a.summary);
        let (fa, fb) = (read_all(&a.output_dir), read_all(&b.output_dir));
        assert_eq!(fa.len(), 6);
        assert_eq!(fa, fb);
    }
}

#[test]
fn shipped_manifests_parse_and_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("manifests");
    for (name, code) in [("tree_basics.json", 0), ("families.json", 1), ("mc_basics.json", 0)] {
        let dir = TempDir::new().unwrap();
        let r = run_manifest(&root.join(name), &RunOptions { output_dir: Some(dir.path().to_path_buf()), workers: Some(2), ..Default::default() }).unwrap();
        assert_eq!(r.exit_code, code, "{name}: {}", r.summary);
    }
}
