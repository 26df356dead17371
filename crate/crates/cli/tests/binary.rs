use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn hw(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hw")).args(args).env("HW_CACHE_DIR", cache).output().unwrap()
}

fn testdata() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../testdata.txt")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn witness_on_a_single_label_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reports");
    let o = hw(
        &["witness", "--curves", testdata().to_str().unwrap(), "--label", "37a", "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("PASS 37a"));
    assert!(out.join("37a.json").exists());
    assert!(dir.path().join(hw_cli::cache::CACHE_FILE).exists());
}

#[test]
fn unknown_label_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = hw(&["witness", "--curves", testdata().to_str().unwrap(), "--label", "14a"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("hw.toml");
    std::fs::write(&cfg, "no_such_key = 1\n").unwrap();
    let o = hw(&["witness", "--curves", testdata().to_str().unwrap(), "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ap_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = hw(&["ap", "--curve", "11a", "--pmax", "13"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    // q-expansion of the weight 2 newform of level 11
    assert_eq!(stdout(&o), "2 -2\n3 -1\n5 1\n7 -2\n11 1\n13 4\n");
}

#[test]
fn scan_k_for_37a() {
    let dir = tempfile::tempdir().unwrap();
    let o = hw(&["scan-k", "--curve", "37a", "--bound", "100"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["d_k"], -7);
}

#[test]
fn tower_command() {
    let dir = tempfile::tempdir().unwrap();
    let o = hw(&["tower", "--q", "3", "--primes", "5,17", "--r", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["tower"]["full_degree"], "108");
    assert_eq!(v["tower"]["quotient_degree"], "9");
    assert_eq!(v["index_bound"]["min_index"], 3);
    let o = hw(&["tower", "--q", "3", "--primes", "7"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
