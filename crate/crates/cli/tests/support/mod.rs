#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures")).join(rel)
}

pub fn devsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_devsim"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("devsim runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn ok(o: Output) -> Output {
    assert!(o.status.success(), "devsim failed ({:?}): {}", o.status.code(), stderr(&o));
    o
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// A demo run config in `dir` with `extra` appended to the `[simulation]`
/// table and the given seed line (empty for none).
pub fn demo_config(dir: &Path, seed: &str, extra: &str) -> PathBuf {
    let demo = fixture("demo");
    let d = demo.display();
    let text = format!(
        r#"{seed}
[paths]
profiles = "{d}/cohort.jsonl"
environment = "{d}/environment.json"
actions = "{d}/actions.json"
script = "{d}/script.json"
findings = "{d}/findings.jsonl"
mock_rules = "{rules}"

[simulation]
run_id = "demo"
{extra}
"#,
        rules = fixture("golden/mock_rules.json").display()
    );
    let path = dir.join("sim.toml");
    std::fs::write(&path, text).unwrap();
    path
}

pub fn sim_run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["sim", "run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    devsim(&args)
}

/// Compares `actual` with a golden file, rewriting it when DEVSIM_BLESS is set.
pub fn assert_golden(rel: &str, actual: &str) {
    let path = fixture(rel);
    if std::env::var_os("DEVSIM_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e} (run with DEVSIM_BLESS=1 to create)", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}
