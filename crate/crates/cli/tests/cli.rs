use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn carleson(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carleson"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn analyze_dirac_in_the_large_r_regime() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "d.json", r#"{"type":"atomic","atoms":[{"re":0.5,"im":0.0,"w":1.0}]}"#);
    let v = json(&carleson(&["analyze", "--measure", &m, "--p", "3", "--r", "5"]));
    assert_eq!(v["regime"], "R_GE_P");
    let s = v["surrogate"].as_f64().unwrap();
    assert!((s - 2f64.powf(1.0 / 3.0)).abs() < 1e-12, "{s}");
}

#[test]
fn analyze_noupper_construction_is_one_summing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("noupper.json");
    let o = out.to_str().unwrap();
    let built = carleson(&["construct", "noupper", "--p", "3", "--c", "1.75", "--n-max", "40", "--out", o]);
    assert!(built.status.success(), "{}", String::from_utf8_lossy(&built.stderr));
    let diag: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("noupper.diagnostics.json")).unwrap()).unwrap();
    assert_eq!(diag["convergent"]["trend"], "convergent");
    assert_eq!(diag["divergent"]["trend"], "divergent");
    let v = json(&carleson(&["analyze", "--measure", o, "--p", "3", "--r", "1", "--depth", "40"]));
    assert_eq!(v["verdict"], "summing-likely");
}

#[test]
fn analyze_area_weighted_integral_diverges_at_small_p() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "a.json", r#"{"type":"area"}"#);
    let v = json(&carleson(&["analyze", "--measure", &m, "--p", "1.5", "--q", "2", "--xi-grid", "256"]));
    assert_eq!(v["regime"], "P_LE2");
    assert_eq!(v["nc_integral"]["trend"], "divergent");
}

#[test]
fn csv_profile_layout() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "d.json", r#"{"type":"atomic","atoms":[{"re":0.0,"im":0.0,"w":1.0}]}"#);
    let out = carleson(&["analyze", "--measure", &m, "--p", "3", "--format", "csv", "--xi-grid", "8"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.split('\n').collect();
    assert_eq!(lines[0], "xi,value");
    assert_eq!(lines.len(), 10);
    assert!(!text.contains('\r'));
}

#[test]
fn schema_errors_name_the_json_path() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(
        dir.path(),
        "bad.json",
        r#"{"type":"atomic","atoms":[{"re":0.1,"im":0.0,"w":1.0},{"re":0.2,"im":0.0,"w":"heavy"}]}"#,
    );
    let out = carleson(&["analyze", "--measure", &m, "--p", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("atoms[1].w"), "{err}");
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "d.json", r#"{"type":"atomic","atoms":[{"re":0.5,"im":0.0,"w":1.0}]}"#);
    assert_eq!(carleson(&["analyze", "--measure", &m]).status.code(), Some(2));
    assert_eq!(carleson(&["analyze", "--p", "3"]).status.code(), Some(2));
    assert_eq!(carleson(&["analyze", "--measure", &m, "--p", "0.5"]).status.code(), Some(2));
    assert_eq!(carleson(&["frobnicate"]).status.code(), Some(2));
    let outside = write(dir.path(), "o.json", r#"{"type":"atomic","atoms":[{"re":1.5,"im":0.0,"w":1.0}]}"#);
    assert_eq!(carleson(&["analyze", "--measure", &outside, "--p", "3"]).status.code(), Some(2));
}

#[test]
fn strict_mode_rejects_unconverged_ascent() {
    // A budget this small cannot close the duality gap.
    let args = ["diag-verify", "--p", "3", "--trials", "2", "--n-list", "8", "--budget", "8"];
    let relaxed = carleson(&args);
    assert!(relaxed.status.success());
    let table: Value = serde_json::from_slice(&relaxed.stdout).unwrap();
    assert!(table["unconverged"].as_u64().unwrap() > 0);
    let strict = carleson(&[&args[..], &["--strict"]].concat());
    assert_eq!(strict.status.code(), Some(3));
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.json");
    let stdout = carleson(&["bergman", "--p", "3"]).stdout;
    assert!(carleson(&["bergman", "--p", "3", "--out", out.to_str().unwrap()]).status.success());
    assert_eq!(std::fs::read(&out).unwrap(), stdout);
}

#[test]
fn bergman_small_p_is_never_summing() {
    let v = json(&carleson(&["bergman", "--p", "1.5", "--q-list", "2", "--r-list", "1,2,5"]));
    assert!(v["cells"].as_array().unwrap().iter().all(|c| c["summing"] == false));
}

#[test]
fn compose_reports_both_surrogates() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "phi.json", r#"{"kind":"polynomial","coeffs":[{"re":0.3,"im":0.0},{"re":0.5,"im":0.0}]}"#);
    let v = json(&carleson(&["compose", "--symbol", &s, "--p", "3", "--r", "2", "--samples", "65536", "--depth", "8"]));
    assert!(v["nevanlinna"]["value"].as_f64().unwrap() > 0.0);
    assert!(v["ratio"].as_f64().unwrap() > 0.0);
    assert!(v["pullback"]["boundary_order_bound"].as_f64().unwrap().is_finite());
}
