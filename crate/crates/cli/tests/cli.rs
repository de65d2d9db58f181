use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sorption(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sorption")).args(args).output().unwrap()
}

fn spec(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name)
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = sorption(&["run", arg(&spec("two_bumps.spec")), "--out", arg(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("manifest.json").exists());
    assert!(dir.path().join("bumps_diagnostics.csv").exists());
}

#[test]
fn check_isotherm_prints_csv() {
    let out = sorption(&["check-isotherm", "--p", "0.5", "--phi", "0.3", "--samples", "200"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 2);
    assert!(text.contains(','));

    let out = sorption(&["check-isotherm"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn divide_rule_and_persistence_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = sorption(&["divide-rule", arg(&spec("two_bumps.spec")), "--split", "1", "--out", arg(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("bumps_divide_rule.csv").exists());

    let out = sorption(&["persistence", arg(&spec("two_bumps.spec")), "--out", arg(dir.path())]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("0 persistence violation"));

    let out = sorption(&["persistence", arg(&spec("freundlich_box.spec")), "--out", arg(dir.path())]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn benchmark_small_levels() {
    let dir = tempfile::tempdir().unwrap();
    let out = sorption(&["benchmark", "--out", arg(dir.path()), "--exponents", "2", "--levels", "50,100"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("benchmark.csv").exists());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let base = std::fs::read_to_string(spec("two_bumps.spec")).unwrap();
    let bad = dir.path().join("bad.spec");
    std::fs::write(&bad, base.replace("[solver]", "[solver]\nbogus = 1")).unwrap();
    let out = sorption(&["run", arg(&bad), "--out", arg(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let wall = dir.path().join("wall.spec");
    std::fs::write(&wall, base.replace("center=1 ", "center=4.8 ").replace("horizon = 1", "horizon = 5")).unwrap();
    let out = sorption(&["run", arg(&wall), "--out", arg(&dir.path().join("w"))]);
    assert_eq!(out.status.code(), Some(4));

    let out = sorption(&["run", arg(&dir.path().join("missing.spec")), "--out", arg(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
}
