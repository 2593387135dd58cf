//! End-to-end runs of the binary against the shipped configuration files.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nextbit"))
}

fn config(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    path.to_str().unwrap().to_string()
}

#[test]
fn encode_then_decode_round_trips() {
    let out = bin()
        .args([
            "encode",
            "--source",
            &config("uniform-l8.cfg"),
            "--q",
            "8",
            "--seed",
            "42",
            "--input",
            "01101001",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let hex = String::from_utf8(out.stdout).unwrap().trim().to_string();
    assert!(!hex.is_empty());

    let out = bin()
        .args([
            "decode",
            "--source",
            &config("uniform-l8.cfg"),
            "--q",
            "8",
            "--seed",
            "7",
            "--hex",
            &hex,
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "01101001");
}

#[test]
fn check_roundtrip_property_exits_zero() {
    let out = bin()
        .args([
            "check",
            "--property",
            "roundtrip",
            "--source",
            &config("uniform-l8.cfg"),
            "--q",
            "8",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn check_light_property_exits_zero() {
    let out = bin()
        .args([
            "check",
            "--property",
            "light",
            "--source",
            &config("uniform-l8.cfg"),
            "--delta",
            "1/4",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("PASS"), "{stdout}");
}

#[test]
fn bench_avg_writes_a_parseable_report() {
    let dir = std::env::temp_dir().join("nextbit-cli-smoke");
    std::fs::create_dir_all(&dir).unwrap();
    let report = dir.join("avg.jsonl");
    let out = bin()
        .args([
            "bench",
            "--source",
            &config("uniform-l8.cfg"),
            "--mode",
            "avg",
            "--q",
            "8",
            "--trials",
            "50",
            "--seed",
            "3",
            "--out",
            report.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (records, _summary) = nextbit_codec::harness::parse_report(&report).unwrap();
    assert_eq!(records.len(), 50);
    std::fs::remove_file(&report).ok();
}

#[test]
fn config_errors_name_the_field_and_exit_nonzero() {
    let dir = std::env::temp_dir().join("nextbit-cli-smoke");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.cfg");
    std::fs::write(&bad, "kind = iid_bernoulli\nn = 1\nell = 4\n").unwrap();
    let out = bin()
        .args([
            "check",
            "--property",
            "light",
            "--source",
            bad.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("`p`"), "{stderr}");
    std::fs::remove_file(&bad).ok();
}
