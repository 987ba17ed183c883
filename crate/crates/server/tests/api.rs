mod common;

use axum::http::StatusCode;
use common::{app, assert_error, call, small_generate_body};
use serde_json::{json, Value};

#[tokio::test]
async fn generate_demo_grid_has_141_runs() {
    let app = app();
    let r = call(&app, "POST", "/scans/generate", json!({"seed": 3}).to_string()).await;
    assert_eq!(r.status, StatusCode::CREATED);
    let v = r.json();
    assert_eq!(v["scan_id"], "scan-1");
    assert_eq!(v["runs"], 141);
    let scan = call(&app, "GET", "/scans/scan-1", "").await;
    assert_eq!(scan.status, StatusCode::OK);
    assert_eq!(scan.content_type, "application/json");
    assert_eq!(scan.json()["runs"].as_array().unwrap().len(), 141);
    let list = call(&app, "GET", "/scans", "").await.json();
    assert_eq!(list.as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn upload_in_every_format() {
    let app = app();
    let csv = "run_id,a,observable,t,value\nr1,1,y,0,0\nr1,1,y,1,2\nr2,3,y,0,1\nr2,3,y,1,1\n";
    let r = call(&app, "POST", "/scans?format=long-csv", csv).await;
    assert_eq!(r.status, StatusCode::CREATED, "{}", String::from_utf8_lossy(&r.body));
    assert_eq!(r.json()["runs"], 2);
    let json_scan = call(&app, "GET", "/scans/scan-1", "").await.body;
    let r = call(&app, "POST", "/scans", json_scan.clone()).await;
    assert_eq!(r.json()["scan_id"], "scan-2");
    assert_eq!(call(&app, "GET", "/scans/scan-2", "").await.body, json_scan);
}

#[tokio::test]
async fn malformed_uploads_report_diagnostics() {
    let app = app();
    let csv = "run_id,a,observable,t,value\nr1,1,y,0,0\nr1,1,y,1,nope\n";
    let r = call(&app, "POST", "/scans?format=long-csv", csv).await;
    assert_error(&r, StatusCode::BAD_REQUEST, "parse_error");
    assert_eq!(r.json()["detail"]["row"], 3);
    assert_eq!(r.json()["detail"]["column"], 5);
    let r = call(&app, "POST", "/scans?format=xlsx", csv).await;
    assert_error(&r, StatusCode::BAD_REQUEST, "unknown_format");
    let r = call(&app, "POST", "/scans/generate", "{not json").await;
    assert_error(&r, StatusCode::BAD_REQUEST, "invalid_json");
}

#[tokio::test]
async fn unknown_ids_and_routes_are_404() {
    let app = app();
    assert_error(&call(&app, "GET", "/scans/scan-9", "").await, StatusCode::NOT_FOUND, "not_found");
    assert_error(&call(&app, "GET", "/nope", "").await, StatusCode::NOT_FOUND, "not_found");
    let r = call(&app, "POST", "/scans/scan-9/cluster", "{}").await;
    assert_error(&r, StatusCode::NOT_FOUND, "not_found");
}

#[tokio::test]
async fn too_many_clusters_is_a_conflict() {
    let app = app();
    call(&app, "POST", "/scans/generate", small_generate_body(1)).await;
    let r = call(&app, "POST", "/scans/scan-1/cluster", json!({"k": 31}).to_string()).await;
    assert_error(&r, StatusCode::CONFLICT, "too_many_clusters");
    assert_eq!(r.json()["detail"]["runs"], 30);
}

#[tokio::test]
async fn clustering_is_deterministic_and_stored() {
    let app = app();
    call(&app, "POST", "/scans/generate", small_generate_body(1)).await;
    assert_error(&call(&app, "GET", "/scans/scan-1/cluster", "").await, StatusCode::CONFLICT, "not_clustered");
    let cfg = json!({"k": 3, "restarts": 2}).to_string();
    let a = call(&app, "POST", "/scans/scan-1/cluster", cfg.clone()).await;
    let b = call(&app, "POST", "/scans/scan-1/cluster", cfg).await;
    assert_eq!(a.status, StatusCode::OK);
    assert_eq!(a.body, b.body);
    assert_eq!(call(&app, "GET", "/scans/scan-1/cluster", "").await.body, a.body);
}

#[tokio::test]
async fn refine_merge_split_move() {
    let app = app();
    call(&app, "POST", "/scans/generate", small_generate_body(2)).await;
    let model = call(&app, "POST", "/scans/scan-1/cluster", json!({"k": 3, "restarts": 1}).to_string()).await.json();
    let clusters = |m: &Value| m["observables"][3]["clusters"].as_array().unwrap().len();
    assert_eq!(clusters(&model), 3);
    let merged = call(
        &app,
        "POST",
        "/scans/scan-1/cluster/refine",
        json!({"op": "merge", "observable": "bCat_nuc", "clusters": [1, 2]}).to_string(),
    )
    .await;
    assert_eq!(merged.status, StatusCode::OK, "{}", String::from_utf8_lossy(&merged.body));
    assert_eq!(clusters(&merged.json()), 2);
    let split = call(
        &app,
        "POST",
        "/scans/scan-1/cluster/refine",
        json!({"op": "split", "observable": "bCat_nuc", "cluster": 0, "k": 2}).to_string(),
    )
    .await;
    assert_eq!(clusters(&split.json()), 3);
    let moved = call(
        &app,
        "POST",
        "/scans/scan-1/cluster/refine",
        json!({"op": "move", "observable": "bCat_nuc", "run_ids": ["run-000"], "target": 7}).to_string(),
    )
    .await
    .json();
    assert_eq!(moved["observables"][3]["assignment"]["run-000"], 7);
    let bad = call(
        &app,
        "POST",
        "/scans/scan-1/cluster/refine",
        json!({"op": "merge", "observable": "bCat_nuc", "clusters": [99]}).to_string(),
    )
    .await;
    assert_error(&bad, StatusCode::UNPROCESSABLE_ENTITY, "unknown_reference");
}

#[tokio::test]
async fn layout_evaluate_and_render() {
    let app = app();
    call(&app, "POST", "/scans/generate", small_generate_body(4)).await;
    assert_error(&call(&app, "POST", "/scans/scan-1/layout", "").await, StatusCode::CONFLICT, "not_clustered");
    call(&app, "POST", "/scans/scan-1/cluster", json!({"k": 2, "restarts": 1}).to_string()).await;

    let layout = call(&app, "POST", "/scans/scan-1/layout", "").await;
    assert_eq!(layout.status, StatusCode::OK);
    assert_eq!(layout.json()["axes"].as_array().unwrap().len(), 8);
    let order = json!({"axis_order": ["bCat_nuc", "nLRP6_lr"]}).to_string();
    let hidden = call(&app, "POST", "/scans/scan-1/layout", order).await.json();
    assert_eq!(hidden["axes"][0]["id"], "bCat_nuc");
    let bad = call(&app, "POST", "/scans/scan-1/layout", json!({"axis_order": ["zz"]}).to_string()).await;
    assert_error(&bad, StatusCode::BAD_REQUEST, "invalid_layout");

    let all = call(&app, "POST", "/scans/scan-1/selection/evaluate", "{}").await.json();
    assert_eq!(all["active"].as_array().unwrap().len(), 30);
    assert_eq!(all["inactive"].as_array().unwrap().len(), 0);
    assert_eq!(all["footprint"]["nWnt"]["values"], json!([100.0]));

    let brush = json!({"brushes": {"nLRP6_lr": {"lo": 1.0, "hi": 1.0}}}).to_string();
    let some = call(&app, "POST", "/scans/scan-1/selection/evaluate", brush.clone()).await.json();
    assert_eq!(some["active"].as_array().unwrap().len(), 6);
    assert_eq!(some["footprint"]["nLRP6_lr"]["min"], 1.0);

    let none = json!({"brushes": {"nLRP6_lr": {"lo": 2.0, "hi": 3.0}}}).to_string();
    let empty = call(&app, "POST", "/scans/scan-1/selection/evaluate", none).await.json();
    assert_eq!(empty["footprint"], Value::Null);

    let stale = json!({"cluster_picks": {"bCat_nuc": [9]}}).to_string();
    let r = call(&app, "POST", "/scans/scan-1/selection/evaluate", stale).await;
    assert_error(&r, StatusCode::CONFLICT, "stale_cluster");
    let r = call(&app, "POST", "/scans/scan-1/selection/evaluate", json!({"brushes": {"x": {"lo": 0, "hi": 1}}}).to_string()).await;
    assert_error(&r, StatusCode::BAD_REQUEST, "invalid_selection");

    let svg = call(&app, "POST", "/scans/scan-1/render", json!({"selection": serde_json::from_str::<Value>(&brush).unwrap()}).to_string()).await;
    assert_eq!(svg.status, StatusCode::OK);
    assert_eq!(svg.content_type, "image/svg+xml");
    let text = String::from_utf8(svg.body).unwrap();
    // the stored layout shows two axes
    assert_eq!(text.matches("class=\"axis\"").count(), 2);
    assert_eq!(text.matches("<polyline class=\"run active\"").count(), 6);
    let bad = call(&app, "POST", "/scans/scan-1/render", json!({"config": {"width": -1}}).to_string()).await;
    assert_error(&bad, StatusCode::BAD_REQUEST, "invalid_render_config");
}

#[tokio::test]
async fn oversized_payloads_are_rejected() {
    let app = tempo_server::router(
        std::sync::Arc::new(tempo_server::SessionStore::in_memory()),
        tempo_server::ServerConfig { body_limit: 1024, ..Default::default() },
    );
    let r = call(&app, "POST", "/scans", vec![b' '; 4096]).await;
    assert_error(&r, StatusCode::PAYLOAD_TOO_LARGE, "payload_rejected");
}

#[tokio::test]
async fn concurrent_reads_during_clustering() {
    let app = app();
    call(&app, "POST", "/scans/generate", small_generate_body(5)).await;
    call(&app, "POST", "/scans/generate", small_generate_body(6)).await;
    let slow = call(&app, "POST", "/scans/scan-1/cluster", json!({"k": 4, "restarts": 8}).to_string());
    let reads = async {
        for _ in 0..5 {
            assert_eq!(call(&app, "GET", "/scans/scan-2", "").await.status, StatusCode::OK);
            let r = call(&app, "GET", "/scans/scan-1/cluster", "").await;
            assert!(r.status == StatusCode::OK || r.status == StatusCode::CONFLICT);
        }
    };
    let (done, ()) = tokio::join!(slow, reads);
    assert_eq!(done.status, StatusCode::OK);
}
