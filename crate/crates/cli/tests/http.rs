use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use chromasheet_cli::server::{router, AppState};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn fixture(name: &str) -> String {
    let p = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    std::fs::read_to_string(p).unwrap()
}

async fn call(app: &Router, method: Method, uri: &str, body: impl Into<String>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.into()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, v)
}

async fn open(app: &Router, name: &str) -> String {
    let (st, v) = call(app, Method::POST, "/sessions", fixture(name)).await;
    assert_eq!(st, StatusCode::CREATED);
    v["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn cluster_flow_with_revert() {
    let app = router(AppState::default());
    let id = open(&app, "cities.vsw.json").await;
    let (st, v) = call(&app, Method::GET, &format!("/sessions/{id}"), "").await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["history"].as_array().unwrap().len(), 1);

    let (st, v) = call(&app, Method::POST, &format!("/sessions/{id}/tasks/cluster"), "").await;
    assert_eq!(st, StatusCode::OK, "{v}");
    assert_eq!(v["summary"]["k"], 3);
    assert_eq!(v["state"]["current"], 1);
    let header = &v["state"]["document"]["tables"][0]["header"];
    assert_eq!(header.as_array().unwrap().last().unwrap(), "Cluster");

    let (st, _) = call(&app, Method::POST, &format!("/sessions/{id}/revert"), r#"{"index": 0}"#).await;
    assert_eq!(st, StatusCode::NO_CONTENT);
    let (_, v) = call(&app, Method::GET, &format!("/sessions/{id}"), "").await;
    assert_eq!(v["current"], 0);
    assert_eq!(v["history"].as_array().unwrap().len(), 2);

    let (st, v) = call(&app, Method::POST, &format!("/sessions/{id}/revert"), r#"{"index": 7}"#).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert_eq!(v["code"], "index");
}

#[tokio::test]
async fn sketch_then_autocomplete_then_correct() {
    let app = router(AppState::default());
    let id = open(&app, "sales.vsw.json").await;
    let sketch = json!({
        "colorings": [{"color": "red", "role": "exclude", "cells": [{"table": "sales", "row": 1, "col": 1}]}]
    });
    let (st, _) = call(&app, Method::PUT, &format!("/sessions/{id}/sketch"), sketch.to_string()).await;
    assert_eq!(st, StatusCode::NO_CONTENT);

    let (st, v) = call(&app, Method::POST, &format!("/sessions/{id}/tasks/autocomplete"), r#"{"seed": 3}"#).await;
    assert_eq!(st, StatusCode::OK, "{v}");
    assert_eq!(v["summary"]["plan"], json!(["Aug", "Total", "Profit"]));

    let fix = json!({"corrections": [{"cell": {"table": "sales", "row": 6, "col": 5}, "value": 460}]});
    let (st, v) = call(&app, Method::POST, &format!("/sessions/{id}/corrections"), fix.to_string()).await;
    assert_eq!(st, StatusCode::OK, "{v}");
    let filled = v["summary"]["filled"].as_array().unwrap();
    let fixed = filled.iter().find(|f| f["cell"] == json!({"table": "sales", "row": 6, "col": 5})).unwrap();
    assert_eq!(fixed["provenance"], "corrected");
    assert_eq!(v["state"]["document"]["tables"][0]["rows"][5][5], json!(1240));
    assert_eq!(v["state"]["history"].as_array().unwrap().len(), 3);
}

#[tokio::test]
async fn errors_have_a_uniform_body() {
    let app = router(AppState::default());
    let (st, v) = call(&app, Method::GET, "/sessions/nope", "").await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(v["code"], "not_found");
    assert!(v["message"].as_str().unwrap().contains("nope"));
    assert!(v.get("details").is_some());

    let id = open(&app, "sales.vsw.json").await;
    let (st, v) = call(&app, Method::POST, &format!("/sessions/{id}/tasks/select"), "").await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert_eq!(v["code"], "task_role");
    let (st, v) = call(&app, Method::POST, &format!("/sessions/{id}/tasks/dance"), "").await;
    assert_eq!(st, StatusCode::NOT_FOUND, "{v}");
    let (st, v) = call(&app, Method::POST, &format!("/sessions/{id}/tasks/wrangle"), r#"{"bogus": 1}"#).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert_eq!(v["code"], "configuration");
    let (st, v) = call(&app, Method::POST, "/sessions", "{not json").await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert_eq!(v["code"], "invalid_arguments");
    let (st, v) = call(&app, Method::POST, &format!("/sessions/{id}/corrections"), r#"{"corrections": []}"#).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert_eq!(v["code"], "invalid_arguments");
}

#[tokio::test]
async fn infeasible_maps_to_422() {
    let app = router(AppState::default());
    let doc = json!({
        "tables": [{"name": "t", "header": ["a", "b"], "rows": [[1, 2], [2, "?"]]}]
    });
    let (_, v) = call(&app, Method::POST, "/sessions", doc.to_string()).await;
    let id = v["id"].as_str().unwrap();
    let (st, v) = call(&app, Method::POST, &format!("/sessions/{id}/tasks/autocomplete"), "").await;
    assert_eq!(st, StatusCode::UNPROCESSABLE_ENTITY, "{v}");
    assert_eq!(v["code"], "insufficient_data");
}

#[tokio::test]
async fn busy_sessions_reject_mutations_but_serve_reads() {
    let state = AppState::default();
    let app = router(state.clone());
    let id = open(&app, "cities.vsw.json").await;
    let slot = state.slot(&id).unwrap();
    let guard = slot.try_begin().unwrap();
    let (st, v) = call(&app, Method::POST, &format!("/sessions/{id}/tasks/cluster"), "").await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(v["code"], "busy");
    let (st, _) = call(&app, Method::PUT, &format!("/sessions/{id}/sketch"), "{}").await;
    assert_eq!(st, StatusCode::CONFLICT);
    let (st, _) = call(&app, Method::GET, &format!("/sessions/{id}"), "").await;
    assert_eq!(st, StatusCode::OK);
    drop(guard);
    let (st, _) = call(&app, Method::POST, &format!("/sessions/{id}/tasks/cluster"), "").await;
    assert_eq!(st, StatusCode::OK);
}
