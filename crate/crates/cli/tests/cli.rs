use std::path::PathBuf;
use std::process::Command;

use chromasheet::io;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chromasheet"))
}

#[test]
fn cluster_writes_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.vsw.json");
    let st = bin()
        .args(["cluster", "-i"])
        .arg(fixture("cities.vsw.json"))
        .arg("-o")
        .arg(&out)
        .args(["--seed", "4", "--explain"])
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let doc = io::load(&out).unwrap();
    assert_eq!(doc.workbook.tables()[0].header().last().unwrap(), "Cluster");
    let explain: serde_json::Value = serde_json::from_slice(&st.stderr).unwrap();
    assert_eq!(explain["k"], 3);
}

#[test]
fn autocomplete_to_stdout_is_deterministic() {
    let run = || {
        let o = bin().args(["autocomplete", "-i"]).arg(fixture("sales.vsw.json")).args(["--seed", "1"]).output().unwrap();
        assert!(o.status.success());
        o.stdout
    };
    let a = run();
    assert_eq!(a, run());
    let doc = io::from_json_str(std::str::from_utf8(&a).unwrap()).unwrap();
    assert!(doc.workbook.tables()[0].rows().iter().all(|r| r.iter().all(|c| c.is_observed())));
}

#[test]
fn config_and_sketch_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"wrangle": {"beam": 5, "max_depth": 6}}"#).unwrap();
    let o = bin()
        .args(["wrangle", "-i"])
        .arg(fixture("icecream_raw.vsw.json"))
        .arg("--config")
        .arg(&cfg)
        .arg("--explain")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let explain: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(explain["program"][0], serde_json::json!({"op": "split", "col": 1}));

    let sketch = dir.path().join("sketch.json");
    std::fs::write(&sketch, "{}").unwrap();
    let o = bin().args(["select", "-i"]).arg(fixture("selection.vsw.json")).arg("--sketch").arg(&sketch).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("task role error"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"tables": [{"name": "t", "header": ["a"], "rows": [[1]]}], "sketch": {"colorings": [{"color": "g", "role": "group", "cells": [{"table": "t", "row": 9, "col": 1}]}]}}"#).unwrap();
    let o = bin().args(["cluster", "-i"]).arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(2));

    let few = dir.path().join("few.json");
    std::fs::write(&few, r#"{"tables": [{"name": "t", "header": ["a", "b"], "rows": [[1, 2], [2, "?"]]}]}"#).unwrap();
    let o = bin().args(["autocomplete", "-i"]).arg(&few).output().unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));

    let o = bin().args(["cluster", "-i", "/nonexistent/file.json"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}
