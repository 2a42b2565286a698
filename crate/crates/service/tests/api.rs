use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use erpsel_service::{app, Config, ProjectStore, DEFAULT_DATA_DIR, DEFAULT_LISTEN};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = req.body(body.map_or_else(Body::empty, |b| Body::from(b.to_string()))).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, v)
}

async fn raw(app: &Router, method: Method, uri: &str, body: &str) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let resp = app.clone().oneshot(req.body(Body::from(body.to_owned())).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap())
}

fn memory_app() -> Router {
    app(Arc::new(ProjectStore::in_memory()))
}

async fn demo(app: &Router, template: &str) -> (String, Value) {
    let (status, v) = call(app, Method::POST, "/projects", Some(json!({ "template": template }))).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");
    (v["id"].as_str().unwrap().to_owned(), v)
}

fn assert_error_shape(v: &Value) {
    assert!(v["code"].is_string(), "{v}");
    assert!(v["message"].is_string(), "{v}");
    assert!(v.get("path").is_some(), "{v}");
}

#[tokio::test]
async fn create_read_replace() {
    let app = memory_app();
    let (status, created) = call(&app, Method::POST, "/projects", None).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(created["version"], 1);
    let id = created["id"].as_str().unwrap();

    let (status, got) = call(&app, Method::GET, &format!("/projects/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(got, created);

    let mut project = got["project"].clone();
    project["name"] = "renamed".into();
    let (status, put) =
        call(&app, Method::PUT, &format!("/projects/{id}"), Some(json!({ "version": 1, "project": project }))).await;
    assert_eq!(status, StatusCode::OK, "{put}");
    assert_eq!(put["version"], 2);
    assert_eq!(put["project"]["name"], "renamed");

    let (status, list) = call(&app, Method::GET, "/projects", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(list.as_array().unwrap().len(), 1);
    assert_eq!(list[0]["name"], "renamed");
}

#[tokio::test]
async fn stale_versions_conflict() {
    let app = memory_app();
    let (id, created) = demo(&app, "demo").await;
    let uri = format!("/projects/{id}");
    let body = json!({ "version": 1, "project": created["project"] });
    assert_eq!(call(&app, Method::PUT, &uri, Some(body.clone())).await.0, StatusCode::OK);
    let (status, err) = call(&app, Method::PUT, &uri, Some(body)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["code"], "version-conflict");
    assert_error_shape(&err);
    assert_eq!(call(&app, Method::GET, &uri, None).await.1["version"], 2);
}

#[tokio::test]
async fn invalid_projects_are_rejected_without_change() {
    let app = memory_app();
    let (id, created) = demo(&app, "demo").await;
    let uri = format!("/projects/{id}");
    let mut bad = created["project"].clone();
    bad["requirements"][0]["weight"] = 5.0.into();
    let (status, err) = call(&app, Method::PUT, &uri, Some(json!({ "version": 1, "project": bad }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error_shape(&err);
    assert!(!err["violations"].as_array().unwrap().is_empty());
    assert_eq!(call(&app, Method::GET, &uri, None).await.1, created);

    let (status, violations) = call(&app, Method::POST, "/validate", Some(bad)).await;
    assert_eq!(status, StatusCode::OK);
    assert!(!violations.as_array().unwrap().is_empty());
    let (status, violations) = call(&app, Method::POST, "/validate", Some(created["project"].clone())).await;
    assert_eq!((status, violations), (StatusCode::OK, json!([])));

    let mut typo = created["project"].clone();
    typo["candidates"][0]["id"] = 3.into();
    let (status, err) = call(&app, Method::PUT, &uri, Some(json!({ "version": 1, "project": typo }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["path"], "project.candidates[0].id");
    assert_eq!(call(&app, Method::GET, &uri, None).await.1, created);
}

#[tokio::test]
async fn malformed_requests_name_the_problem() {
    let app = memory_app();
    let (status, err) = raw(&app, Method::POST, "/projects", "{ nope").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error_shape(&err);
    let (status, err) = raw(&app, Method::PUT, "/projects/p1", r#"{"version": "x", "project": {}}"#).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["path"], "version");
    let (status, err) = call(&app, Method::GET, "/projects/p99", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&err);
    let (status, err) = call(&app, Method::GET, "/nowhere", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&err);
    let (id, _) = demo(&app, "demo").await;
    let (status, err) = call(&app, Method::GET, &format!("/projects/{id}/ranking?budget=lots"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["path"], "budget");
}

#[tokio::test]
async fn judgments_are_stored_exactly_even_when_inconsistent() {
    let app = memory_app();
    let (id, _) = demo(&app, "demo").await;
    let uri = format!("/projects/{id}/matrices/TP");
    let (status, view) = call(&app, Method::GET, &uri, None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(view["report"]["consistent"], true);
    assert!(view["scale"].is_object());

    let e = view["matrix"]["elements"].as_array().unwrap().clone();
    assert!(e.len() >= 4);
    // e0 above e1 above e2, yet e0 indifferent to e2
    let judgments = json!([
        { "higher": e[0], "lower": e[1], "judgment": "A1" },
        { "higher": e[1], "lower": e[2], "judgment": "A1" },
        { "higher": e[0], "lower": e[2], "judgment": "A0" },
        { "higher": e[2], "lower": e[3], "judgment": "A3-A3" },
    ]);
    let body = json!({ "version": 1, "judgments": judgments });
    let (status, put) = call(&app, Method::PUT, &format!("{uri}/judgments"), Some(body)).await;
    assert_eq!(status, StatusCode::OK, "{put}");
    assert_eq!(put["version"], 2);
    assert_eq!(put["matrix"]["judgments"], judgments);
    let (_, again) = call(&app, Method::GET, &uri, None).await;
    assert_eq!(again["matrix"]["judgments"], judgments);
    assert_eq!(again["report"]["consistent"], false);
    assert!(!again["report"]["conflicts"].as_array().unwrap().is_empty());
    assert!(again["scale"].is_null());
    let (status, err) = call(&app, Method::GET, &format!("/projects/{id}/ranking"), None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(err["code"], "inconsistent-judgments");

    let (status, _) = call(&app, Method::PUT, &format!("{uri}/judgments"), Some(json!({ "version": 1, "judgments": [] }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) =
        call(&app, Method::PUT, &format!("/projects/{id}/matrices/nope/judgments"), Some(json!({ "judgments": [] })))
            .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn what_if_requests_leave_the_project_alone() {
    let app = memory_app();
    let (id, _) = demo(&app, "measured").await;
    let uri = format!("/projects/{id}");
    let (status, stored) = call(&app, Method::POST, &format!("{uri}/candidates/SAP/optimize"), None).await;
    assert_eq!(status, StatusCode::OK, "{stored}");
    let before = call(&app, Method::GET, &uri, None).await.1;
    assert_eq!(before["version"], 1);
    assert!(before["project"]["cache"]["plans"]["SAP"].is_object());

    let (status, what_if) =
        call(&app, Method::POST, &format!("{uri}/candidates/SAP/optimize"), Some(json!({ "budget": 0.0 }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(what_if["budget"], 0.0);
    assert_eq!(what_if["plan"]["total_cost"], 0.0);

    let (status, base) = call(&app, Method::GET, &format!("{uri}/ranking"), None).await;
    assert_eq!(status, StatusCode::OK, "{base}");
    let (_, rich) = call(&app, Method::GET, &format!("{uri}/ranking?budget=1000"), None).await;
    let (_, poor) = call(&app, Method::GET, &format!("{uri}/ranking?budget=0"), None).await;
    assert_ne!(rich, poor);
    assert_eq!(call(&app, Method::GET, &uri, None).await.1, before);
}

#[tokio::test]
async fn derived_views() {
    let app = memory_app();
    let (id, _) = demo(&app, "demo").await;
    let (status, ranking) = call(&app, Method::GET, &format!("/projects/{id}/ranking"), None).await;
    assert_eq!(status, StatusCode::OK);
    let order: Vec<&str> = ranking["entries"].as_array().unwrap().iter().map(|e| e["candidate"].as_str().unwrap()).collect();
    assert_eq!(order, ["SAP", "ORACLE", "MICROSOFT"]);
    let (status, weights) = call(&app, Method::GET, &format!("/projects/{id}/weights"), None).await;
    assert_eq!(status, StatusCode::OK);
    let total: f64 = weights.as_object().unwrap().values().map(|w| w.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() <= 1e-9);
    assert_eq!(call(&app, Method::GET, &format!("/projects/{id}/screening"), None).await.0, StatusCode::OK);
    assert_eq!(call(&app, Method::GET, &format!("/projects/{id}/gap"), None).await.0, StatusCode::OK);
    let (status, err) = call(&app, Method::POST, &format!("/projects/{id}/candidates/NOPE/optimize"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&err);
}

#[tokio::test]
async fn projects_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let first = app(Arc::new(ProjectStore::open(dir.path()).unwrap()));
    let (id, created) = demo(&first, "demo").await;
    let mut project = created["project"].clone();
    project["name"] = "kept".into();
    let (status, put) =
        call(&first, Method::PUT, &format!("/projects/{id}"), Some(json!({ "version": 1, "project": project }))).await;
    assert_eq!(status, StatusCode::OK);

    let second = app(Arc::new(ProjectStore::open(dir.path()).unwrap()));
    let (status, got) = call(&second, Method::GET, &format!("/projects/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(got, put);
    let (_, other) = demo(&second, "demo").await;
    assert_ne!(other, id);
}

#[test]
fn config_from_variables() {
    let c = Config::from_vars(|_| None).unwrap();
    assert_eq!(c.listen, DEFAULT_LISTEN.parse().unwrap());
    assert_eq!(c.data_dir, std::path::PathBuf::from(DEFAULT_DATA_DIR));
    let c = Config::from_vars(|k| match k {
        "ERPSEL_LISTEN" => Some("0.0.0.0:9000".into()),
        "ERPSEL_DATA_DIR" => Some("/srv/erpsel".into()),
        _ => None,
    })
    .unwrap();
    assert_eq!(c.listen.port(), 9000);
    assert_eq!(c.data_dir, std::path::PathBuf::from("/srv/erpsel"));
    assert!(Config::from_vars(|k| (k == "ERPSEL_LISTEN").then(|| "not an address".into())).is_err());
}
