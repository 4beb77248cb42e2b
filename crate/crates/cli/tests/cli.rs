use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bolsec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bolsec")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for e in fs::read_dir(from).unwrap() {
        let p = e.unwrap().path();
        let dest = to.join(p.file_name().unwrap());
        if p.is_dir() {
            copy_dir(&p, &dest);
        } else {
            fs::copy(&p, &dest).unwrap();
        }
    }
}

fn catalog_copy() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&bolsec::catalog::default_catalog_dir(), dir.path());
    dir
}

#[test]
fn verify_tables_on_the_shipped_catalog() {
    let o = bolsec(&["verify-tables"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("15 groups"));
}

#[test]
fn corrupted_structure_constant_names_the_triple() {
    let dir = catalog_copy();
    let p = dir.path().join("algebras/sl3r.alg");
    let text = fs::read_to_string(&p).unwrap().replace("\n1 3 5 -1\n", "\n1 3 5 -2\n");
    fs::write(&p, text).unwrap();
    let o = bolsec(&["verify-tables", "--catalog", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("Jacobi identity at (e1, e2, e3)"), "{}", stderr(&o));
}

#[test]
fn missing_catalog_directory_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nothing");
    assert_eq!(code(&bolsec(&["verify-tables", "--catalog", missing.to_str().unwrap()])), 2);
}

#[test]
fn loop_suites_pass_on_sl3r_and_su21() {
    for g in ["sl3r", "su21"] {
        let o = bolsec(&["loop-suite", "--group", g, "--samples", "1000", "--tol", "1e-8"]);
        assert_eq!(code(&o), 0, "{g}: {}", stdout(&o));
        assert!(!stdout(&o).contains("FAIL"));
    }
}

#[test]
fn loop_suite_json_marks_unclaimed_suites() {
    let o = bolsec(&["loop-suite", "--group", "sl2r+so3r", "--samples", "50", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let suites = v["loops"][0]["suites"].as_array().unwrap();
    let bruck = suites.iter().find(|s| s["suite"] == "bruck").unwrap();
    assert_eq!(bruck["required"], false);
    let bol = suites.iter().find(|s| s["suite"] == "bol").unwrap();
    assert_eq!((bol["required"].clone(), bol["verdict"].clone()), (true.into(), true.into()));
}

#[test]
fn zero_samples_and_bad_tolerance_are_usage_errors() {
    assert_eq!(code(&bolsec(&["loop-suite", "--samples", "0"])), 2);
    assert_eq!(code(&bolsec(&["loop-suite", "--tol", "-1"])), 2);
    assert_eq!(code(&bolsec(&["loop-suite", "--group", "nope"])), 2);
}

#[test]
fn reproducers() {
    let o = bolsec(&["reproduce", "lemma7"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("reproduced"));
    assert_eq!(code(&bolsec(&["reproduce", "prop12", "--d", "3"])), 0);
    let o = bolsec(&["reproduce", "prop19", "--r", "-1", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["cases"].as_array().unwrap().len(), 3);
    assert_eq!(v["constructed_verdict"], true);
    assert_eq!(code(&bolsec(&["reproduce", "lemma8"])), 2);
}

#[test]
fn classify_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = bolsec(&["classify", "--max-dim", "9", "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let golden = fs::read_to_string(bolsec::catalog::golden_path(&bolsec::catalog::default_catalog_dir())).unwrap();
    assert_eq!(fs::read_to_string(&out).unwrap(), golden);
}

#[test]
fn classify_detects_a_changed_golden_file() {
    let dir = catalog_copy();
    let g = bolsec::catalog::golden_path(dir.path());
    let text = fs::read_to_string(&g).unwrap().replacen("GlobalBruckLoop", "Unresolved", 1);
    fs::write(&g, text).unwrap();
    let o = bolsec(&["classify", "--catalog", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("differs from golden"));
}

#[test]
fn classify_edge_dimensions() {
    let o = bolsec(&["classify", "--max-dim", "0", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdicts"], serde_json::json!([]));
    assert_eq!(code(&bolsec(&["classify", "--max-dim", "10"])), 2);
    let o = bolsec(&["classify", "--max-dim", "5"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("H2 ") && stdout(&o).contains(", 0 unresolved"));
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    let a = stdout(&bolsec(&["classify", "--max-dim", "6", "--format", "json"]));
    let b = stdout(&bolsec(&["classify", "--max-dim", "6", "--format", "json"]));
    assert_eq!(a, b);
}
