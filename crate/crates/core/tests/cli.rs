//! End-to-end runs of the `cellhom` binary.

use std::path::Path;
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

use cellhom::cell::{Cell, LPField, MandelVec6, VecField};
use cellhom::cli::fields::write_quadrature;
use cellhom::discrete::sym_gradient;
use cellhom::material::{write_microstructure, MaterialMap, Phase};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cellhom"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

fn report(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn matrix(v: &Value) -> Vec<Vec<f64>> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|row| row.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect())
        .collect()
}

const HOMOGENEOUS: &str = r#"{"grid":[4,4,4],"material":{"kind":"homogeneous","phase":{"lambda":2.0,"mu":1.5}}}"#;

#[test]
fn homogeneous_cell_reproduces_its_stiffness() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "hom.json", HOMOGENEOUS);
    let out = run(dir.path(), &["homogenize", "--config", &config, "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path(), "r.json");
    assert_eq!(r["schema"], "cellhom/1");
    assert_eq!(r["passed"], true);
    let ch = matrix(&r["result"]["report"]["ch_stress"]);
    let c = Phase::isotropic(2.0, 1.5).unwrap().stiffness().to_rows();
    for i in 0..6 {
        for j in 0..6 {
            assert!((ch[i][j] - c[i][j]).abs() <= 1e-12 * 5.0, "{i}{j}: {} vs {}", ch[i][j], c[i][j]);
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let config = r#"{"grid":[6,6,6]}"#;
    for dir in [&a, &b] {
        write(dir.path(), "c.json", config);
        let out = run(dir.path(), &["homogenize", "--config", "c.json", "--seed", "7", "--out", "r.json"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let strip = |mut v: Value| {
        v["timestamp"] = Value::Null;
        v
    };
    assert_eq!(strip(report(a.path(), "r.json")), strip(report(b.path(), "r.json")));
}

#[test]
fn laminate_matches_its_closed_form() {
    let dir = TempDir::new().unwrap();
    let config = write(
        dir.path(),
        "lam.json",
        r#"{"grid":[8,8,8],"material":{"kind":"laminate","phase1":{"lambda":12.0,"mu":8.0},
            "phase2":{"lambda":1.2,"mu":0.8},"fraction":0.5,"direction":1}}"#,
    );
    let out = run(dir.path(), &["homogenize", "--config", &config, "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let lam = &report(dir.path(), "r.json")["result"]["laminate"];
    assert!(lam["relative_error"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn corrupt_microstructure_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cell = Cell::unit_cube(4).unwrap();
    let map = MaterialMap::homogeneous(cell, Phase::isotropic(1.0, 1.0).unwrap());
    let path = dir.path().join("micro.bin");
    write_microstructure(&path, &map).unwrap();
    let mut bytes = std::fs::read(&path).unwrap();
    bytes.truncate(bytes.len() - 3);
    std::fs::write(&path, bytes).unwrap();
    write(dir.path(), "phases.json", r#"{"phases":[{"id":0,"lambda":1.0,"mu":1.0}]}"#);
    let config = write(
        dir.path(),
        "c.json",
        r#"{"grid":[4,4,4],"material":{"kind":"file","microstructure":"micro.bin","phases":"phases.json"}}"#,
    );
    let out = run(dir.path(), &["homogenize", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("voxel count mismatch"));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "c.json", r#"{"grid":[4,4,4],"tolerance":1e-6}"#);
    assert_eq!(run(dir.path(), &["homogenize", "--config", &config]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["homogenize", "--tol", "0"]).status.code(), Some(2));
}

#[test]
fn iteration_cap_is_a_solver_failure() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "c.json", r#"{"grid":[6,6,6],"max_iter":1}"#);
    let out = run(dir.path(), &["homogenize", "--config", &config]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn failed_self_checks_still_write_the_report() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "c.json", r#"{"grid":[6,6,6],"checks":{"bounds_slack":1.0}}"#);
    let out = run(dir.path(), &["homogenize", "--config", &config, "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(4));
    let r = report(dir.path(), "r.json");
    assert_eq!(r["passed"], false);
    assert_eq!(r["result"]["report"]["checks"]["passed"], false);
}

#[test]
fn donati_splits_an_exported_gradient() {
    let dir = TempDir::new().unwrap();
    let cell = Cell::unit_cube(8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut phi = VecField::random(cell, &mut rng);
    phi.remove_mean();
    let e = sym_gradient(&LPField::new(MandelVec6([0.1, 0.2, -0.3, 0.0, 0.4, 0.1]), phi)).unwrap();
    write_quadrature(dir.path().join("e.bin"), &e).unwrap();
    let out = run(dir.path(), &["donati", "--input", "e.bin", "--grid", "8", "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = &report(dir.path(), "r.json")["result"];
    assert!(r["relative_residual"].as_f64().unwrap() <= 1e-8, "{r}");
    let affine: Vec<f64> = r["affine"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    for (got, want) in affine.iter().zip([0.1, 0.2, -0.3, 0.0, 0.4, 0.1]) {
        assert!((got - want).abs() <= 1e-12);
    }
}

#[test]
fn verify_suites_pass() {
    let dir = TempDir::new().unwrap();
    for (suite, grid) in [("green", "16"), ("donati", "16"), ("traces", "8"), ("hillmandel", "8"), ("compat", "8")] {
        let out = run(dir.path(), &["verify", suite, "--grid", grid, "--seed", "42", "--out", "r.json"]);
        let r = report(dir.path(), "r.json");
        assert_eq!(out.status.code(), Some(0), "{suite}: {r}");
        assert_eq!(r["result"][0]["suite"], suite);
    }
}

#[test]
fn verify_korn_on_sixteen_cubed() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["verify", "korn", "--grid", "16", "--seed", "42", "--out", "r.json"]);
    let r = report(dir.path(), "r.json");
    assert_eq!(out.status.code(), Some(0), "{r}");
    let lambda = r["result"][0]["checks"][0]["value"].as_f64().unwrap();
    assert!((1.8..=2.000001).contains(&lambda));
}

#[test]
fn divcurl_writes_csv() {
    let dir = TempDir::new().unwrap();
    let config = write(dir.path(), "c.json", r#"{"grid":[6,6,6],"outputs":{"csv":"osc.csv"}}"#);
    let out = run(dir.path(), &["divcurl", "--config", &config, "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("osc.csv")).unwrap();
    assert!(csv.starts_with("series,row,n,integral,target,error\n"));
    assert!(csv.lines().count() > 7);
}
