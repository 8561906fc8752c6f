//! Exercises the CLI surface through the compiled binary: subcommands,
//! output formats, file output and the exit code contract
//! (0 = verified, 1 = runtime/verification failure, 2 = usage error).

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unit-fibers"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn fiber_standard_prints_record() {
    let out = run(&["fiber", "--n", "1", "--y", "0.3,0.1"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["n"], 1);
    assert_eq!(doc["center"][0], 0.3);
    assert_eq!(doc["containing_frame"].as_array().unwrap().len(), 2);
}

#[test]
fn fiber_villarceau_and_usage_error() {
    let out = run(&["fiber", "--r", "0.5", "--phi", "1.0"]);
    assert!(out.status.success());
    // mixing the two constructions is a usage error
    let bad = run(&["fiber", "--n", "1", "--y", "0,0", "--r", "0.5"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn fiber_center_out_of_region_is_runtime_error() {
    let out = run(&["fiber", "--n", "1", "--y", "2,0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn pair_certifies_hand_example() {
    let out = run(&["pair", "--n", "1", "--y", "0,0", "--z", "0.5,0"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["certificate"]["verdict"], "certified_disjoint");
    assert!((doc["geometry"]["d"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn link_pair_and_matrix_file() {
    let out = run(&["link", "--n", "1", "--y", "0,0", "--z", "0.5,0"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "linked");

    // build a two-fiber record file via `fiber`, then ask for the matrix
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fibers.json");
    let f1 = stdout(&run(&["fiber", "--n", "1", "--y", "0,0"]));
    let f2 = stdout(&run(&["fiber", "--n", "1", "--y", "0.5,0"]));
    std::fs::write(&path, format!("[{f1},{f2}]")).unwrap();
    let out = run(&["link", "--fibers", path.to_str().unwrap()]);
    assert!(out.status.success());
    let m: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(m[0][1], "linked");
    assert_eq!(m[0][0], "self_fiber");
}

#[test]
fn locate_round_trips_a_center() {
    let out = run(&["locate", "--bialy", "--p", "1.3,0,0"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("r = 0.3"));
    // north pole of the central fiber is covered by no other center
    let bad = run(&["locate", "--n", "1", "--p", "0,0,1"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn verify_writes_report_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "verify", "--n", "1", "--pairs", "500", "--seed", "7", "--bound", "0.9", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("certified"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["n_pairs"], 500);
    assert_eq!(report["certified_fraction"], 1.0);
}

#[test]
fn verify_rejects_bad_dimension() {
    let out = run(&["verify", "--n", "2", "--pairs", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_thread_cap_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("one.json");
    let b = dir.path().join("many.json");
    let one = Command::new(env!("CARGO_BIN_EXE_unit-fibers"))
        .args(["verify", "--n", "1", "--pairs", "2000", "--out", a.to_str().unwrap()])
        .env("UNIT_FIBERS_THREADS", "1")
        .output()
        .unwrap();
    let many = run(&["verify", "--n", "1", "--pairs", "2000", "--out", b.to_str().unwrap()]);
    assert!(one.status.success() && many.status.success());
    // the serialized report excludes wall time, so the bytes must agree
    assert_eq!(
        std::fs::read_to_string(&a).unwrap(),
        std::fs::read_to_string(&b).unwrap()
    );
}

#[test]
fn rho_table_has_admissible_column() {
    let out = run(&["rho", "--max", "16"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("q,rho,admissible"));
    assert!(text.lines().any(|l| l == "8,8,true"));
    assert!(text.lines().any(|l| l == "16,9,false"));
}

#[test]
fn export_obj_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bialy.obj");
    let out = run(&[
        "export", "--kind", "bialy", "--tori", "2", "--circles", "3", "--density", "16",
        "--format", "obj", "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("o fiber_0"));
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 6 * 16);

    let out = run(&[
        "export", "--kind", "standard", "--n", "3", "--count", "2", "--density", "8",
        "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().next().unwrap().starts_with("fiber_id,x0"));

    // obj only makes sense for circles in R^3
    let bad = run(&["export", "--kind", "standard", "--n", "3", "--format", "obj"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn algebra_table_is_csv() {
    let out = run(&["algebra-table", "--dim", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("a,b,c,sign"));
    // e1 * e2 = e3 in the quaternions
    assert!(text.lines().any(|l| l == "1,2,3,1"));
    // a 4x4 table plus a header
    assert_eq!(text.lines().count(), 17);
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}
