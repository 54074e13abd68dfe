mod common;

use std::collections::BTreeMap;

use chromasheet::engine::*;
use chromasheet::error::Category;
use chromasheet::io::{self, Document};
use chromasheet::wrangle::{synthesize_program, WrangleConfig, WranglingSketch};
use chromasheet::{CellRef, CellValue, Coloring, Error, Role, Sketch};

fn fixture_for(kind: TaskKind) -> Document {
    let name = match kind {
        TaskKind::Wrangle => "icecream_raw.vsw.json",
        TaskKind::Select => "selection.vsw.json",
        TaskKind::Cluster => "cities.vsw.json",
        _ => "sales.vsw.json",
    };
    common::fixture(name)
}

fn bytes(out: &TaskOutput) -> String {
    let doc = Document { workbook: out.workbook.clone(), sketch: out.sketch.clone() };
    format!("{}{}", io::to_json_string(&doc), serde_json::to_string(&out.summary).unwrap())
}

#[test]
fn kinds_parse_and_declare_roles() {
    for k in TaskKind::ALL {
        assert_eq!(k.name().parse::<TaskKind>().unwrap(), k);
        assert_eq!(serde_json::to_value(k).unwrap(), k.name());
    }
    assert_eq!("constraints".parse::<TaskKind>().unwrap(), TaskKind::LearnConstraints);
    assert_eq!("bogus".parse::<TaskKind>().unwrap_err().category(), Category::NotFound);
    assert_eq!(TaskKind::Select.roles(), &[Role::Positive, Role::Negative]);
    assert_eq!(TaskKind::Cluster.roles(), &[Role::Group]);
    assert_eq!(TaskKind::Predict.roles(), &[Role::Input, Role::Target, Role::Exclude]);
}

#[test]
fn config_document() {
    let c = TaskConfig::from_json_str(r#"{"seed": 9, "wrangle": {"beam": 3}, "autocomplete": {"min_weight": 0.1}}"#).unwrap();
    let r = c.resolved();
    assert_eq!(r.wrangle.beam, 3);
    assert_eq!(r.wrangle.max_depth, 6);
    assert_eq!((r.select.seed, r.cluster.seed, r.predict.seed, r.autocomplete.seed), (9, 9, 9, 9));
    assert_eq!(r.autocomplete.min_weight, 0.1);
    let e = TaskConfig::from_json_str(r#"{"beam": 3}"#).unwrap_err();
    assert_eq!(e.code(), "configuration");
    assert_eq!(TaskConfig::from_json_str("{}").unwrap(), TaskConfig::default());
}

#[test]
fn wrangle_appends_the_wrangled_table() {
    let doc = fixture_for(TaskKind::Wrangle);
    let out = run_task(TaskKind::Wrangle, &doc.workbook, &doc.sketch, &TaskConfig::default()).unwrap();
    assert_eq!(out.workbook.tables().len(), 2);
    let raw = &doc.workbook.tables()[0];
    let got = out.workbook.table("raw_wrangled").unwrap();
    let ws = WranglingSketch::from_sketch(&doc.sketch, raw).unwrap();
    let want = synthesize_program(raw, &ws, &WrangleConfig::default()).unwrap().grid.to_table("raw_wrangled").unwrap();
    assert_eq!(got, &want);
    assert_eq!(out.workbook.table("raw").unwrap(), raw);
    assert_eq!(out.summary["program"].as_array().unwrap().len(), 4);
}

#[test]
fn role_mismatch_is_a_task_role_error() {
    let doc = common::fixture("sales.vsw.json");
    let e = run_task(TaskKind::Select, &doc.workbook, &Sketch::default(), &TaskConfig::default()).unwrap_err();
    assert_eq!(e.code(), "task_role");
    assert!(e.to_string().starts_with("select: "));
    let s = Sketch::new(vec![Coloring::new("blue", Role::Positive, [CellRef::new("sales", 0, 0)])]);
    let e = run_task(TaskKind::Autocomplete, &doc.workbook, &s, &TaskConfig::default()).unwrap_err();
    assert!(matches!(e.root(), Error::TaskRole(m) if m.contains("input, target, exclude")));
    let e = run_task(TaskKind::Cluster, &doc.workbook, &Sketch::default(), &TaskConfig::default()).unwrap_err();
    assert_eq!(e.code(), "task_role");
}

#[test]
fn learn_constraints_leaves_the_workbook() {
    let doc = common::fixture("sales.vsw.json");
    let out = run_task(TaskKind::LearnConstraints, &doc.workbook, &doc.sketch, &TaskConfig::default()).unwrap();
    assert_eq!(out.workbook, doc.workbook);
    assert_eq!(out.sketch, doc.sketch);
    let names: Vec<&str> = out.summary["constraints"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(names.contains(&"Total = SUM(June, July, Aug)"), "{names:?}");
}

#[test]
fn predict_fills_without_formulas() {
    let doc = common::fixture("sales.vsw.json");
    let out = run_task(TaskKind::Predict, &doc.workbook, &doc.sketch, &TaskConfig::default()).unwrap();
    let c = out.completion.unwrap();
    assert_eq!(c.result.filled.len(), 9);
    assert!(c.result.formulas.is_empty());
    assert!(c.result.filled.iter().all(|f| f.provenance == chromasheet::autocomplete::Provenance::Predicted));
}

#[test]
fn every_task_output_round_trips() {
    for kind in TaskKind::ALL {
        let doc = fixture_for(kind);
        let out = run_task(kind, &doc.workbook, &doc.sketch, &TaskConfig::default()).unwrap();
        let text = io::to_json_string(&Document { workbook: out.workbook.clone(), sketch: out.sketch.clone() });
        let back = io::from_json_str(&text).unwrap();
        assert_eq!(back.workbook, out.workbook, "{kind}");
        assert_eq!(back.sketch, out.sketch, "{kind}");
        assert_eq!(io::to_json_string(&back), text, "{kind}");
    }
}

#[test]
fn every_task_is_deterministic() {
    let cfg = TaskConfig { seed: Some(5), ..TaskConfig::default() };
    for kind in TaskKind::ALL {
        let doc = fixture_for(kind);
        let a = run_task(kind, &doc.workbook, &doc.sketch, &cfg).unwrap();
        let b = run_task(kind, &doc.workbook, &doc.sketch, &cfg).unwrap();
        assert_eq!(bytes(&a), bytes(&b), "{kind}");
    }
}

fn session() -> Session {
    let doc = common::fixture("cities.vsw.json");
    Session::new("s1", doc.workbook, doc.sketch).unwrap()
}

#[test]
fn history_is_linear() {
    let mut s = session();
    let loaded = s.current().clone();
    s.run_task(TaskKind::Cluster, &TaskConfig::default()).unwrap();
    assert_eq!(s.history().len(), 2);
    assert_eq!(s.history()[0], loaded);
    assert!(s.current().workbook.tables()[0].col_index("Cluster").is_some());

    s.revert(1).unwrap();
    assert_eq!(s.current_index(), 1);
    s.revert(0).unwrap();
    assert_eq!(s.current(), &loaded);
    assert_eq!(s.history().len(), 2);
    let e = s.revert(2).unwrap_err();
    assert_eq!(e.code(), "index");

    s.run_task(TaskKind::LearnConstraints, &TaskConfig::default()).unwrap_err();
    assert_eq!(s.history().len(), 2, "failed runs leave history alone");

    let mut t = session();
    t.run_task(TaskKind::Cluster, &TaskConfig::default()).unwrap();
    t.revert(0).unwrap();
    t.set_sketch(Sketch::default()).unwrap();
    assert_eq!(t.history().len(), 2);
    assert_eq!(t.current_index(), 1);
    assert_eq!(t.current().kind, None);
    assert_eq!(t.history()[0], loaded);
}

#[test]
fn bad_sketch_is_rejected() {
    let mut s = session();
    let bad = Sketch::new(vec![Coloring::new("x", Role::Group, [CellRef::new("cities", 99, 0)])]);
    assert_eq!(s.set_sketch(bad).unwrap_err().code(), "invalid_sketch");
    assert_eq!(s.history().len(), 1);
}

#[test]
fn corrections_rerun_the_completion() {
    let doc = common::fixture("sales.vsw.json");
    let mut s = Session::new("s2", doc.workbook, doc.sketch).unwrap();
    s.run_task(TaskKind::Autocomplete, &TaskConfig::default()).unwrap();
    let fix = BTreeMap::from([(CellRef::new("sales", 5, 4), CellValue::number(460.0).unwrap())]);
    s.correct(&fix).unwrap();
    assert_eq!(s.history().len(), 2);
    let cur = s.current();
    assert_eq!(cur.workbook.tables()[0].rows()[5][5], CellValue::number(1240.0).unwrap());
    assert!(!cur.sketch.machine_generated.contains(&CellRef::new("sales", 5, 4)));
    s.revert(0).unwrap();
    assert_eq!(s.correct(&fix).unwrap_err().code(), "invalid_arguments");
}

#[test]
fn corrections_parse_from_json() {
    let v = serde_json::json!({"corrections": [{"cell": {"table": "sales", "row": 6, "col": 5}, "value": 460}]});
    let c = corrections_from_json(&v).unwrap();
    assert_eq!(c[&CellRef::new("sales", 5, 4)], CellValue::number(460.0).unwrap());
    assert!(corrections_from_json(&serde_json::json!({"cells": []})).is_err());
}

#[test]
fn snapshot_lists_history() {
    let mut s = session();
    s.run_task(TaskKind::Cluster, &TaskConfig::default()).unwrap();
    let snap = s.snapshot();
    assert_eq!(snap["current"], 1);
    assert_eq!(snap["history"][0]["kind"], "edit");
    assert_eq!(snap["history"][1]["kind"], "cluster");
    assert_eq!(snap["history"][1]["summary"]["k"], 3);
    let back = io::from_json_value(snap["document"].clone()).unwrap();
    assert_eq!(back.workbook, s.current().workbook);
}

#[test]
fn single_thread_runs_match() {
    for kind in TaskKind::ALL {
        let doc = fixture_for(kind);
        let cfg = TaskConfig::default();
        let par = run_task(kind, &doc.workbook, &doc.sketch, &cfg).unwrap();
        let seq = chromasheet::par::sequential(|| run_task(kind, &doc.workbook, &doc.sketch, &cfg).unwrap());
        assert_eq!(bytes(&par), bytes(&seq), "{kind}");
    }
}
