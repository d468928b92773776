use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/borromean").join(name)
}

fn bendlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bendlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn cohomology_for_each_module() {
    let (p, r) = (fixture("presentation.json"), fixture("representation.json"));
    for (kind, h1, ph1) in [("r31", 3, 0), ("nu", 6, 3), ("adjoint", 6, 0)] {
        let out = bendlab(&["cohomology", "--presentation", path(&p), "--rep", path(&r), "--coefficients", kind]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let v = json(&out);
        assert_eq!(v["dim_h1"], h1);
        assert_eq!(v["dim_ph1"], ph1);
        assert_eq!(v["identities_hold"], true);
    }
}

#[test]
fn per_element_mode_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("report.json");
    let (p, r) = (fixture("presentation.json"), fixture("representation.json"));
    let out = bendlab(&[
        "cohomology",
        "--presentation",
        path(&p),
        "--rep",
        path(&r),
        "--parabolic",
        "per-element",
        "--output",
        path(&file),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&file).unwrap(), out.stdout);
    let v = json(&out);
    assert_eq!(v["mode"], "per-element");
    assert_eq!(v["dim_ph1"], 0);
    assert_eq!(v["parabolic_words"].as_array().unwrap().len(), 9);
}

#[test]
fn branched_system_reports_exactness() {
    let c = fixture("complex.json");
    let v = json(&bendlab(&["branched-system", path(&c), "--geometry", "so"]));
    assert_eq!(v["nullity"], 3);
    assert_eq!(v["naive_bound"], -2);
    assert_eq!(v["exact"], true);

    let dir = tempfile::tempdir().unwrap();
    let pentagon = dir.path().join("pentagon.json");
    let incidences: Vec<String> = (0..5)
        .map(|j| format!(r#"{{"wall":"w{j}","angle":"{}pi/5"}}"#, 2 * j))
        .collect();
    let walls: Vec<String> = (0..5).map(|j| format!("\"w{j}\"")).collect();
    std::fs::write(
        &pentagon,
        format!(
            r#"{{"dimension":3,"walls":[{}],"bindings":[{{"name":"A","incidences":[{}]}}]}}"#,
            walls.join(","),
            incidences.join(",")
        ),
    )
    .unwrap();
    let v = json(&bendlab(&["branched-system", path(&pentagon)]));
    assert_eq!(v["exact"], false);
    assert_eq!(v["approximate"], true);
    assert_eq!(v["equal_weights_solve"], true);
    assert_eq!(v["tolerance"], 1e-9);

    let out = Command::new(env!("CARGO_BIN_EXE_bendlab"))
        .args(["branched-system", path(&pentagon)])
        .env("BENDLAB_FLOAT_TOL", "1e-6")
        .output()
        .unwrap();
    assert_eq!(json(&out)["tolerance"], 1e-6);
    let out = Command::new(env!("CARGO_BIN_EXE_bendlab"))
        .args(["branched-system", path(&pentagon)])
        .env("BENDLAB_FLOAT_TOL", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bend_reports_generators_and_f() {
    let args = [
        "bend",
        "--rep",
        path(&fixture("representation.json")),
        "--presentation",
        path(&fixture("presentation.json")),
        "--pants",
        path(&fixture("pants.json")),
        "--words",
        path(&fixture("words.txt")),
    ]
    .map(String::from);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = bendlab(&args);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let bendings = v["bendings"].as_array().unwrap();
    assert_eq!(bendings.len(), 6);
    assert_eq!(bendings[0]["v"][3][3], "-3");
    assert!(bendings.iter().all(|b| b["relators_vanish"] == true));
    assert_eq!(v["trace_derivative_matrix"].as_array().unwrap().len(), 6);
    assert_eq!(v["class_span"], 6);

    let mut so = args.clone();
    so.extend(["--geometry", "so"]);
    let v = json(&bendlab(&so));
    assert_eq!(v["coefficients"], "r31");
    assert!(v["trace_derivative_matrix"].is_null());
}

#[test]
fn validate_command() {
    let (p, r) = (fixture("presentation.json"), fixture("representation.json"));
    let out = bendlab(&["validate", "--presentation", path(&p), "--rep", path(&r)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], true);
}

#[test]
fn borromean_r31_only_passes() {
    let out = bendlab(&["borromean", "--coefficients", "r31"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let checks = v["checks"].as_array().unwrap();
    let get = |id: &str| checks.iter().find(|c| c["id"] == id).unwrap()["computed"].clone();
    assert_eq!(get("h1.r31"), "3");
    assert_eq!(get("ph1.r31"), "0");
}

#[test]
fn borromean_full_run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("suite.json");
    let a = bendlab(&["borromean", "--output", path(&file)]);
    let b = bendlab(&["borromean"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(std::fs::read(&file).unwrap(), a.stdout);
    let v = json(&a);
    let all_pass = v["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true);
    assert_eq!(v["passed"], all_pass);
    assert_eq!(a.status.code(), Some(if all_pass { 0 } else { 1 }));
}

#[test]
fn corrupted_relator_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("presentation.json");
    let text = std::fs::read_to_string(fixture("presentation.json")).unwrap();
    std::fs::write(&bad, text.replace("[y,[z^-1,x]]", "[y,[z,x]]")).unwrap();
    let out = bendlab(&["borromean", "--presentation", path(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("relator 2 ([y,[z,x]])"), "{stderr}");
    let v = json(&out);
    assert_eq!(v["validation"]["passed"], false);
    assert!(v.get("checks").is_none());

    let out = bendlab(&["validate", "--presentation", path(&bad), "--rep", path(&fixture("representation.json"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("p.json");
    std::fs::write(&garbage, r#"{"generators":["x"],"relators":["x q"]}"#).unwrap();
    let r = fixture("representation.json");
    let out = bendlab(&["cohomology", "--presentation", path(&garbage), "--rep", path(&r)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("q"));
    assert!(out.stdout.is_empty());

    let missing = dir.path().join("missing.json");
    let out = bendlab(&["validate", "--presentation", path(&missing), "--rep", path(&r)]);
    assert_eq!(out.status.code(), Some(2));

    let out = bendlab(&["cohomology", "--presentation", path(&garbage), "--rep", path(&r), "--coefficients", "spin"]);
    assert_eq!(out.status.code(), Some(2));
}
