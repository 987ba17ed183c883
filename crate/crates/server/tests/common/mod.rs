#![allow(dead_code)]

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

use tempo_server::{router, ServerConfig, SessionStore};

pub fn app() -> Router {
    router(Arc::new(SessionStore::in_memory()), ServerConfig::default())
}

pub struct Reply {
    pub status: StatusCode,
    pub content_type: String,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| {
            panic!("{e}: {}", String::from_utf8_lossy(&self.body))
        })
    }
}

pub async fn call(app: &Router, method: &str, uri: &str, body: impl Into<Vec<u8>>) -> Reply {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.into()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let content_type = resp
        .headers()
        .get("content-type")
        .map(|v| v.to_str().unwrap().to_string())
        .unwrap_or_default();
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply { status, content_type, body }
}

/// Checks the `{code, message, detail}` error shape.
pub fn assert_error(reply: &Reply, status: StatusCode, code: &str) {
    assert_eq!(reply.status, status, "{}", String::from_utf8_lossy(&reply.body));
    let v = reply.json();
    assert_eq!(v["code"], code, "{v}");
    assert!(v["message"].is_string(), "{v}");
    assert!(v.get("detail").is_some(), "{v}");
    assert_eq!(v.as_object().unwrap().len(), 3, "{v}");
}

/// Small grid for quick round trips: 1 x 5 x 3 x 2 = 30 runs.
pub fn small_generate_body(seed: u64) -> String {
    let mut grid: Value = serde_json::from_str(include_str!("../../../core/data/default_grid.json")).unwrap();
    grid["nWnt"] = serde_json::json!([100]);
    grid["kLrpEndo"] = serde_json::json!([0.005, 0.08]);
    grid["extra"] = serde_json::json!([]);
    serde_json::json!({ "grid": grid, "seed": seed }).to_string()
}
