use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn scene(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "scenes", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn bicons(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bicons"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_report(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = bicons(&all);
    let v = serde_json::from_slice(&out.stdout).expect("json report");
    (out.status.code().unwrap(), v)
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn cylinder_scene_passes() {
    let path = scene("theorem1_cylinder.json");
    let (code, r) = json_report(&[
        "run",
        "--scene",
        &path,
        "--grid",
        "3x3x3",
        "--check",
        "pmc",
        "--check",
        "biconservative",
        "--check",
        "class_a",
    ]);
    assert_eq!(code, 0);
    for name in ["pmc", "biconservative", "class_a"] {
        assert_eq!(check(&r, name)["verdict"], "PASS");
    }
    assert_eq!(r["engine"]["name"], "bicons");
    assert!(r["prng"].as_str().unwrap().contains("ChaCha8"));
    assert_eq!(r["scene"]["ambient"]["epsilon"], 1);
}

#[test]
fn helicoid_scene_fails_pmc() {
    let (code, r) = json_report(&[
        "run",
        "--scene",
        &scene("theorem1_helicoid.json"),
        "--samples",
        "50",
    ]);
    assert_eq!(code, 1);
    let c = check(&r, "pmc");
    assert_eq!(c["verdict"], "FAIL");
    assert!(c["max_residual"].as_f64().unwrap() >= 1e-3);
}

#[test]
fn slice_scene_is_degenerate() {
    let (code, r) = json_report(&["run", "--scene", &scene("slice.json")]);
    assert_eq!(code, 0);
    let c = check(&r, "biconservative");
    assert_eq!(c["verdict"], "DEGENERATE");
    assert_eq!(c["max_residual"].as_f64().unwrap(), 0.0);
}

#[test]
fn tolerance_override_changes_verdict() {
    let path = scene("theorem1_cylinder.json");
    let (code, r) = json_report(&[
        "run",
        "--scene",
        &path,
        "--grid",
        "2x2x2",
        "--check",
        "pmc",
        "--tol",
        "pmc=1e-30",
    ]);
    assert_eq!(code, 1);
    assert_eq!(check(&r, "pmc")["tolerance_used"].as_f64().unwrap(), 1e-30);
}

#[test]
fn report_and_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let csv = dir.path().join("residuals.csv");
    let o = bicons(&[
        "run",
        "--scene",
        &scene("theorem1_cylinder.json"),
        "--grid",
        "2x2x2",
        "--check",
        "h_eta",
        "--check",
        "splitting",
        "--out",
        out.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(check(&r, "h_eta")["samples_evaluated"], 8);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("check,sample_index,u1,u2,s,residual"));
    assert_eq!(lines.count(), 9);
}

#[test]
fn scene_errors_exit_with_two() {
    let o = bicons(&["run", "--scene", &scene("schema_violation.json")]);
    assert_eq!(o.status.code(), Some(2));
    let o = bicons(&["run", "--scene", &scene("slice.json"), "--check", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    let o = bicons(&["run", "--scene", &scene("does_not_exist.json")]);
    assert_eq!(o.status.code(), Some(2));
    let o = bicons(&["run", "--scene", &scene("slice.json"), "--tol", "bogus=1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn computation_errors_exit_with_three_and_name_the_sample() {
    let o = bicons(&["run", "--scene", &scene("irregular_point.json")]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("u=[0.0, 1.0]"), "{err}");
}

#[test]
fn single_step_scan_has_one_row() {
    let o = bicons(&[
        "scan",
        "--scene",
        &scene("biharmonic_scan_sphere.json"),
        "--param",
        "a2",
        "--from",
        "0.5",
        "--to",
        "0.9",
        "--steps",
        "1",
        "--residual",
        "biharmonic_normal",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "# a2 biharmonic_normal");
    assert_eq!(lines[1].split_whitespace().count(), 2);
}

#[test]
fn scan_rejects_unknown_parameter() {
    let o = bicons(&[
        "scan",
        "--scene",
        &scene("biharmonic_scan_sphere.json"),
        "--param",
        "zz",
        "--from",
        "0.5",
        "--to",
        "0.9",
        "--steps",
        "3",
        "--residual",
        "biharmonic_normal",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gallery_listing() {
    let o = bicons(&["gallery"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("theorem1"));
    assert!(text.contains("eps=+1: a^2+b^2=1"));
    assert!(text.contains("partial_tube"));
    assert!(text.contains("sum alpha_i^2 = 1"));
    let o = bicons(&["gallery", "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v
        .as_array()
        .unwrap()
        .iter()
        .any(|e| e["kind"] == "cmc_product"));
}

#[test]
fn worker_count_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut seen = Vec::new();
    for jobs in ["1", "4"] {
        let csv = dir.path().join(format!("{jobs}.csv"));
        let o = bicons(&[
            "run",
            "--scene",
            &scene("theorem1_helicoid.json"),
            "--samples",
            "200",
            "--seed",
            "9",
            "--check",
            "pmc",
            "--check",
            "gauss",
            "--jobs",
            jobs,
            "--csv",
            csv.to_str().unwrap(),
        ]);
        seen.push((o.status.code(), std::fs::read(&csv).unwrap()));
    }
    assert_eq!(seen[0], seen[1]);
}
