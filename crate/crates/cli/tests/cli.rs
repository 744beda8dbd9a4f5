use std::f64::consts::PI;
use std::process::{Command, Output};

use serde_json::Value;

fn flagvol(args: &[&str], cache: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flagvol"))
        .args(args)
        .env("FLAGVOL_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn exact_constants_for_two_planes_in_r4() {
    let dir = tempfile::tempdir().unwrap();
    let out = flagvol(&["constants", "--d", "4", "--k", "2", "--exact-c", "--format", "json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["config"]["command"], "constants");
    let alpha = &r["details"]["table"]["alpha"];
    let expect = [[16.0, -4.0], [-4.0, 1.0]];
    for i in 0..2 {
        for j in 0..2 {
            let a = alpha[i][j].as_f64().unwrap();
            assert!((a - PI * PI * expect[i][j]).abs() < 1e-10);
        }
    }
    assert_eq!(r["provenance"][0]["k"]["kind"], "exact");
    assert!(dir.path().join("phi_d4_k2_exact.json").exists());
}

#[test]
fn monte_carlo_constants_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["constants", "--d", "3", "--k", "1", "--samples", "20000", "--seed", "7", "--format", "json"];
    let a = flagvol(&args, dir.path());
    let b = flagvol(&args, dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = json(&a)["details"]["c"]["values"].clone();
    assert!((c[0].as_f64().unwrap() - 0.2).abs() < 0.01);
    assert!((c[1].as_f64().unwrap() - 1.0 / 15.0).abs() < 0.005);
}

#[test]
fn parallel_squares_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let out = flagvol(&["mixedvol", "--K", "square4d", "--L", "square4d", "--k", "2", "--samples", "100"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("general relative position") && err.contains("2-face #"), "{err}");
}

#[test]
fn rotated_cube_agrees_with_its_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = flagvol(
        &["mixedvol", "--K", "cube3", "--rotate-K", "--L", "cube3", "--k", "1", "--oracle", "--samples", "20000", "--format", "json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    let row = &r["rows"][0];
    assert_eq!(row["pass"], true);
    assert_eq!(r["details"]["oracle"]["method"], "zonotope determinants");
}

#[test]
fn zonotope_files_and_direct_mode() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.json");
    std::fs::write(&path, r#"{"generators": [[1, 0.2, 0], [0, 1, 0.3], [0.1, 0, 1], [0.5, 0.5, 0.5]]}"#).unwrap();
    let spec = format!("zono:{}", path.display());
    let out = flagvol(
        &["mixedvol", "--K", &spec, "--L", "simplex3", "--rotate-L", "--k", "2", "--mode", "direct_IR", "--oracle", "--samples", "20000", "--format", "csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("name,value,std_error,target,pass"));
    assert!(text.lines().nth(1).unwrap().ends_with(",true"), "{text}");
}

#[test]
fn missing_files_are_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = flagvol(&["mixedvol", "--K", "/nonexistent.json", "--L", "cube3", "--k", "1"], dir.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn verify_writes_a_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("ledger.json");
    let out = flagvol(
        &["verify", "--item", "kronecker", "--item", "phi22", "--json", ledger.to_str().unwrap()],
        dir.path(),
    );
    assert!(out.status.success());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&ledger).unwrap()).unwrap();
    let items = r["details"]["items"].as_array().unwrap();
    assert_eq!(items.len(), 2);
    assert!(items.iter().all(|i| i["pass"] == true));
}
