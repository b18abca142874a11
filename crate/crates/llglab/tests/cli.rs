use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn llglab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_llglab")).args(args).env_remove("LLGLAB_SEED").output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn malformed_key_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "[grid]\ndim = 2\nn = 16\nspacing = 0.1\n\n[experiments]\nrun = [\"window\"]\n").unwrap();
    let out = tmp.path().join("out");
    let r = llglab(&["run", path(&cfg), "--out", path(&out)]);
    assert_eq!(r.status.code(), Some(2));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("spacing") && err.contains("line 4"), "{err}");
    assert!(!out.exists());
}

#[test]
fn empty_experiment_list_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("empty.cfg");
    fs::write(&cfg, "[grid]\ndim = 1\nn = 16\n").unwrap();
    let out = tmp.path().join("out");
    let r = llglab(&["run", path(&cfg), "--out", path(&out)]);
    assert!(r.status.success());
    assert_eq!(fs::read_to_string(out.join("summary.csv")).unwrap(), "experiment,check,value,bound,status,note\n");
}

#[test]
fn bad_seed_override_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.cfg");
    fs::write(&cfg, "[grid]\ndim = 1\nn = 16\n").unwrap();
    let r =
        Command::new(env!("CARGO_BIN_EXE_llglab")).args(["run", path(&cfg), "--out", path(&tmp.path().join("o"))]).env("LLGLAB_SEED", "x").output().unwrap();
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn seed_override_changes_rough_data() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("rough.cfg");
    fs::write(&cfg, "seed = 1\n[grid]\ndim = 2\nn = 16\n[initial]\nkind = \"rough_mollified\"\namplitude = 0.1\n[experiments]\nrun = [\"morrey\"]\n").unwrap();
    let run = |seed: &str, dir: &str| {
        let out = tmp.path().join(dir);
        let r = Command::new(env!("CARGO_BIN_EXE_llglab")).args(["run", path(&cfg), "--out", path(&out)]).env("LLGLAB_SEED", seed).output().unwrap();
        assert!(r.status.success());
        fs::read_to_string(out.join("morrey/morrey.csv")).unwrap()
    };
    assert_eq!(run("3", "a"), run("3", "b"));
    assert_ne!(run("3", "a"), run("4", "c"));
}

#[test]
fn verify_semigroup_prints_series() {
    let r = llglab(&["verify-semigroup", "--dim", "2", "--n", "32", "--p-tilde", "4", "--samples", "11"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let out = String::from_utf8(r.stdout).unwrap();
    assert!(out.starts_with("t,norm,compensated_ratio\n"));
    assert_eq!(out.lines().count(), 12);

    // p~ beyond p(n+1) is rejected.
    let r = llglab(&["verify-semigroup", "--dim", "1", "--n", "32", "--p-tilde", "9"]);
    assert!(!r.status.success());
}

#[test]
fn llg_run_then_morrey_on_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("llg");
    let r = llglab(&["llg", "run", "--dim", "1", "--n", "32", "--T", "0.05", "--out-dir", path(&dir), "--init", "equatorial:0.1"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(fs::read_to_string(dir.join("ledger.csv")).unwrap().starts_with("t,E,"));
    let snap = dir.join("snap_00000.llgf");
    assert!(snap.exists());
    let r = llglab(&["morrey", "--input", path(&snap), "--p", "2", "--q", "1"]);
    assert!(r.status.success());
    let out = String::from_utf8(r.stdout).unwrap();
    // |m| = 1 and q = n, so the largest ball (the whole circle) wins.
    let value: f64 = out.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((value - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12, "{out}");
}

#[test]
fn cgl_solve_generic_data() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("cgl");
    let r = llglab(&["cgl", "solve", "--dim", "2", "--n", "16", "--T", "0.1", "--steps", "10", "--v0", "generic:1e-3", "--out", path(&dir)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(String::from_utf8(r.stdout).unwrap().contains("converged=true"));
    assert!(fs::read_to_string(dir.join("cgl_log.csv")).unwrap().starts_with("iter,increment"));

    let r = llglab(&["cgl", "solve", "--p", "3.5", "--dim", "1", "--n", "16"]);
    assert!(!r.status.success());
}
