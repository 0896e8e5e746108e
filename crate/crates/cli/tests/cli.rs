use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hartree(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hartree"))
        .args(args)
        .env("HARTREE_CACHE_DIR", dir.join("cache"))
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hartree(&[], dir.path()).status.code(), Some(1));
    assert_eq!(hartree(&["bogus"], dir.path()).status.code(), Some(1));
    assert_eq!(hartree(&["ground", "--gamma", "x"], dir.path()).status.code(), Some(1));
    assert_eq!(hartree(&["--help"], dir.path()).status.code(), Some(0));

    let o = hartree(&["ground", "--gamma=-1"], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("gamma"), "{}", stderr(&o));
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[ground]\nnodez = 10\n").unwrap();
    let o = hartree(&["ground", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nodez"), "{}", stderr(&o));

    fs::write(&cfg, "[ground]\nnodes = 3\n").unwrap();
    let o = hartree(&["ground", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nodes"), "{}", stderr(&o));
}

#[test]
fn unresolved_grid_is_a_solver_failure() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "trapped", "--grid", "cartesian", "--n", "32", "--half-width", "8", "--gamma", "1.95", "--potential",
        "harmonic", "-o", "out",
    ];
    let o = hartree(&args, dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("γ=1.95"), "{}", stderr(&o));
}

#[test]
fn missing_warm_start_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = hartree(&["ground", "--gamma", "1", "--warm-start", "nope.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope.csv"), "{}", stderr(&o));
}

#[test]
fn ground_writes_table_checkpoint_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["ground", "--gamma", "1", "--nodes", "512", "--r-max", "12", "-o", "out", "--plots"];
    let o = hartree(&args, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("out");
    let table = fs::read_to_string(out.join("groundstates.csv")).unwrap();
    assert_eq!(table.lines().count(), 2, "{table}");
    let manifest = fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("config_hash"));
    assert!(fs::read_dir(dir.path().join("cache")).unwrap().count() > 0);

    // the second run reads the cache and reproduces the table
    let o = hartree(&args, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out.join("groundstates.csv")).unwrap(), table);
}
