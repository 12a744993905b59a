use std::process::{Command, Output};

fn fluctlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fluctlab")).args(args).env_remove("FLUCTLAB_CACHE").output().unwrap()
}

const ZIPF: &str = "family=zipf_pair,p=0.3,q=0.7";

#[test]
fn verify_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t21.csv");
    let o = fluctlab(&["verify", "--dist", ZIPF, "--formula", "T2-1", "--grid", "10:1000:decades", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "x,exact,predicted,ratio,bound");
    assert_eq!(csv.lines().count(), 4);
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_ne!(summary["checks"][0]["status"], "fail");
}

#[test]
fn inapplicable_formula_exits_one() {
    let o = fluctlab(&["verify", "--dist", "family=srw", "--formula", "T2-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
}

#[test]
fn bad_dist_exits_one() {
    let o = fluctlab(&["ladder", "--dist", "family=nope"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exit_and_green_succeed() {
    assert!(fluctlab(&["exit", "--dist", "family=srw", "--R", "20", "--x", "5"]).status.success());
    assert!(fluctlab(&["green", "--dist", ZIPF, "--mode", "interval", "--R", "50"]).status.success());
    assert!(fluctlab(&["green", "--dist", "family=srw", "--mode", "potential", "--xs", "-3,0,4"]).status.success());
}

#[test]
fn dist_from_file_and_cache_env() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("zipf.toml");
    std::fs::write(&spec, "family = \"zipf_pair\"\np = 0.3\nq = 0.7\n").unwrap();
    let cache = dir.path().join("cache");
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_fluctlab"))
            .args(["ladder", "--dist", spec.to_str().unwrap(), "--window", "200"])
            .env("FLUCTLAB_CACHE", &cache)
            .env("FLUCTLAB_THREADS", "1")
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert!(std::fs::read_dir(&cache).unwrap().count() > 0);
}
