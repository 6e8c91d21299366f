use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cms_core::io::parse_system;
use cms_core::System;
use serde_json::Value;

fn cms(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cms"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn cms")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const NOT_SURJECTIVE: &str = r#"
[space]
backend = "euclid"
dim = 1
working_box = [[0.0, 2.0]]

[[vertices]]
id = 1
region = "x0 < 1"

[[vertices]]
id = 2
region = "x0 >= 1"

[[edges]]
id = 0
source = 1
target = 2
map = { affine = { a = [[0.5]], b = [1.0] } }

[[edges]]
id = 1
source = 1
target = 1
map = { affine = { a = [[0.5]], b = [0.0] } }

[[base_points]]
vertex = 1
point = [0.5]

[[base_points]]
vertex = 2
point = [1.5]

[params]
delta = 0.5
"#;

#[test]
fn validate_names_surjectivity_violation() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), NOT_SURJECTIVE).unwrap();
    let out = cms(dir.path(), &["validate", "bad.toml"]);
    assert_eq!(out.status.code(), Some(1));
    let kinds: Vec<String> = json(&out)["estimates"]["report"]["violations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["kind"].as_str().unwrap().to_string())
        .collect();
    assert!(kinds.contains(&"surjectivity".to_string()), "{kinds:?}");
}

#[test]
fn valid_fixture_validates() {
    let dir = tempfile::tempdir().unwrap();
    assert!(cms(dir.path(), &["fixtures", "emit", "sierpinski", "--out", "s.toml"]).status.success());
    let out = cms(dir.path(), &["validate", "s.toml", "--samples", "200", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["checks"]["valid"]["pass"], Value::Bool(true));
}

#[test]
fn broken_fixture_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    cms(dir.path(), &["fixtures", "emit", "broken", "--out", "b.toml"]);
    let out = cms(dir.path(), &["validate", "b.toml", "--samples", "50", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_codes_for_usage_and_io() {
    let dir = tempfile::tempdir().unwrap();
    let out = cms(dir.path(), &["contraction", "x.toml", "--pairs", "ten", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cms(dir.path(), &["simulate", "x.toml", "--steps", "5", "--out", "t.csv"]);
    assert_eq!(out.status.code(), Some(2), "missing --seed is a usage error");
    let out = cms(dir.path(), &["contraction", "missing.toml", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "io");
    let out = cms(dir.path(), &["fixtures", "emit", "no-such-fixture"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_system_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.toml"), "[space]\nbackend = \"euclid\"\n").unwrap();
    let out = cms(dir.path(), &["contraction", "m.toml", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "invalid-input");
}

#[test]
fn emitted_fixtures_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let list = json(&cms(dir.path(), &["fixtures", "list"]));
    for f in list["estimates"]["fixtures"].as_array().unwrap() {
        let name = f["name"].as_str().unwrap();
        let out = cms(dir.path(), &["fixtures", "emit", name]);
        assert!(out.status.success(), "{name}");
        let text = String::from_utf8(out.stdout).unwrap();
        let sys: System = parse_system(&text).unwrap();
        let again = cms_core::io::emit_system(&sys).unwrap();
        assert_eq!(text, again, "{name}");
    }
}

#[test]
fn reports_embed_version_and_parameters() {
    let dir = tempfile::tempdir().unwrap();
    cms(dir.path(), &["fixtures", "emit", "fc3", "--out", "f.toml"]);
    let r = json(&cms(dir.path(), &["simulate", "f.toml", "--steps", "10", "--seed", "9", "--out", "t.csv"]));
    assert_eq!(r["operation"], "simulate");
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["parameters"]["seed"], 9);
    assert_eq!(r["parameters"]["steps"], 10);
    let csv = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
    assert!(csv.starts_with("step,edge,prob,c0\n0,,,1.0\n"));
}

#[test]
fn start_points_are_parsed_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    cms(dir.path(), &["fixtures", "emit", "fc3", "--out", "f.toml"]);
    let ok = cms(dir.path(), &["simulate", "f.toml", "--start", "base:3", "--steps", "3", "--seed", "1", "--out", "t.csv"]);
    assert!(ok.status.success());
    let csv = fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",3.0"));
    let off = cms(dir.path(), &["simulate", "f.toml", "--start", "9.0", "--steps", "3", "--seed", "1", "--out", "t.csv"]);
    assert_eq!(off.status.code(), Some(2));
}

#[test]
fn artifacts_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    cms(dir.path(), &["fixtures", "emit", "sierpinski", "--out", "s.toml"]);
    let mut seen = Vec::new();
    for threads in ["1", "3", "8"] {
        let inv = cms(
            dir.path(),
            &["--threads", threads, "invariant", "s.toml", "--particles", "1500", "--iters", "10", "--seed", "4", "--out", "mu.csv"],
        );
        assert!(inv.status.success());
        let code = cms(
            dir.path(),
            &[
                "--threads", threads, "code", "s.toml", "--measure", "mu.csv", "--depth", "12", "--samples", "3000", "--seed", "5",
                "--out", "p.csv", "--image", "p.pgm", "--width", "40", "--height", "20",
            ],
        );
        assert!(code.status.success());
        let files: Vec<Vec<u8>> = ["mu.csv", "p.csv", "p.pgm"].iter().map(|f| fs::read(dir.path().join(f)).unwrap()).collect();
        seen.push((inv.stdout, code.stdout, files));
    }
    assert!(seen.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn pgm_header_and_size() {
    let dir = tempfile::tempdir().unwrap();
    cms(dir.path(), &["fixtures", "emit", "sierpinski", "--out", "s.toml"]);
    let out = cms(
        dir.path(),
        &["code", "s.toml", "--depth", "10", "--samples", "500", "--seed", "1", "--out", "p.csv", "--image", "i.pgm", "--width", "30", "--height", "12", "--viewport", "0,0,2,1"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let bytes = fs::read(dir.path().join("i.pgm")).unwrap();
    let header = b"P5\n30 12\n255\n";
    assert!(bytes.starts_with(header));
    assert_eq!(bytes.len(), header.len() + 30 * 12);
}
