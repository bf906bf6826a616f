use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{header, Request, StatusCode};
use axum::Router;
use serde_json::{json, Value};
use tower::ServiceExt;

use memq_core::eval::{read_log, EngineKind};
use memq_core::gateway::{Gateway, RemoteBackend};
use memq_core::EngineConfig;
use memq_service::http::{router, AppState};
use memq_service::sessions::seeded_assignment;
use memq_service::{build_gateway, BackendKind, Service, SessionBook};

const REF: &str = "2024-06-12T20:00:00Z";
const CARDIO: &str = "How many times did I do cardio at the gym?";
const CARDIO_ANSWER: &str = "You did cardio at the gym 18 times";

fn planted() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/planted")
}

struct Harness {
    app: Router,
    log: PathBuf,
    _dir: tempfile::TempDir,
}

fn harness() -> Harness {
    let dim = EngineConfig::default().embedding_dim;
    let gateway = build_gateway(BackendKind::Scripted, Some(&planted().join("scripted")), dim).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("sessions.jsonl");
    let service = Arc::new(Service::open(gateway, None, None).unwrap());
    let app = router(AppState::new(service, SessionBook::open(&log, 0).unwrap()));
    Harness { app, log, _dir: dir }
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>, String) {
    let body = body.map(|b| Body::from(b.to_string())).unwrap_or_else(Body::empty);
    let req = Request::builder().method(method).uri(uri).body(body).unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let ctype = res
        .headers()
        .get(header::CONTENT_TYPE)
        .map(|v| v.to_str().unwrap().to_string())
        .unwrap_or_default();
    let bytes = to_bytes(res.into_body(), usize::MAX).await.unwrap().to_vec();
    (status, bytes, ctype)
}

async fn json_call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes, _) = call(app, method, uri, body).await;
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn ready(h: &Harness) {
    let corpus = planted().join("corpus");
    let (s, body) = json_call(&h.app, "POST", "/ingest", Some(json!({"corpus": corpus}))).await;
    assert_eq!(s, StatusCode::OK, "{body}");
    assert_eq!(body["memories"], 308);
    assert_eq!(body["merged"], 2);
    let (s, body) = json_call(&h.app, "POST", "/augment", None).await;
    assert_eq!(s, StatusCode::OK, "{body}");
    assert_eq!(body["contexts"], 6);
}

#[tokio::test]
async fn query_answers_with_references_and_is_deterministic() {
    let h = harness();
    ready(&h).await;
    let req = json!({"query": CARDIO, "reference_time": REF});
    let (s, first, _) = call(&h.app, "POST", "/query", Some(req.clone())).await;
    assert_eq!(s, StatusCode::OK);
    let (_, second, _) = call(&h.app, "POST", "/query", Some(req)).await;
    assert_eq!(first, second);

    let body: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(body["engine"], "augmented");
    assert!(body["answer"].as_str().unwrap().starts_with(CARDIO_ANSWER));
    let refs = body["references"].as_array().unwrap();
    assert_eq!(refs.len(), 18);
    for r in refs {
        assert!(r["media_url"].as_str().unwrap().starts_with("/media/"));
        assert!(!r["caption"].as_str().unwrap().is_empty());
        assert!(r["capture_time"].is_string());
    }

    let req = json!({"query": CARDIO, "engine": "baseline", "reference_time": REF});
    let (s, body) = json_call(&h.app, "POST", "/query", Some(req)).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["engine"], "baseline");
}

#[tokio::test]
async fn concurrent_queries_agree() {
    let h = harness();
    ready(&h).await;
    let req = json!({"query": "What social events did I attend during CHI 2024?", "reference_time": REF});
    let calls = (0..8).map(|_| {
        let (app, req) = (h.app.clone(), req.clone());
        async move { call(&app, "POST", "/query", Some(req)).await }
    });
    let results = futures_join(calls).await;
    for (s, bytes, _) in &results {
        assert_eq!(*s, StatusCode::OK);
        assert_eq!(bytes, &results[0].1);
    }
}

async fn futures_join<F: std::future::Future + Send + 'static>(fs: impl Iterator<Item = F>) -> Vec<F::Output>
where
    F::Output: Send + 'static,
{
    let handles: Vec<_> = fs.map(tokio::spawn).collect();
    let mut out = Vec::new();
    for h in handles {
        out.push(h.await.unwrap());
    }
    out
}

#[tokio::test]
async fn query_input_errors() {
    let h = harness();
    // Nothing ingested yet.
    let (s, _) = json_call(&h.app, "POST", "/query", Some(json!({"query": "hello"}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    let (s, _) = json_call(&h.app, "POST", "/augment", None).await;
    assert_eq!(s, StatusCode::CONFLICT);
    let corpus = planted().join("corpus");
    json_call(&h.app, "POST", "/ingest", Some(json!({"corpus": corpus}))).await;
    let (s, _) = json_call(&h.app, "POST", "/query", Some(json!({"query": "hello"}))).await;
    assert_eq!(s, StatusCode::CONFLICT, "ingested but not augmented");

    ready(&h).await;
    for body in [
        json!({"query": "   "}),
        json!({"query": "hello", "engine": "omniscient"}),
        json!({"engine": "baseline"}),
        json!({"query": "hello", "reference_time": "yesterday-ish"}),
    ] {
        let (s, err) = json_call(&h.app, "POST", "/query", Some(body.clone())).await;
        assert_eq!(s, StatusCode::BAD_REQUEST, "{body}");
        assert!(err["error"].is_string());
    }
    let req = Request::builder().method("POST").uri("/query").body(Body::from("{not json")).unwrap();
    assert_eq!(h.app.clone().oneshot(req).await.unwrap().status(), StatusCode::BAD_REQUEST);

    let (s, _) = json_call(&h.app, "POST", "/ingest", Some(json!({"corpus": "/no/such/dir"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[test]
fn unreachable_backend_is_503() {
    // Ingest with fixtures, then answer through a backend nobody listens on.
    let dim = EngineConfig::default().embedding_dim;
    let scripted = build_gateway(BackendKind::Scripted, Some(&planted().join("scripted")), dim).unwrap();
    let warm = Service::open(scripted, None, None).unwrap();
    warm.ingest(&planted().join("corpus")).unwrap();
    warm.augment(memq_core::miner::WindowOrder::Forward).unwrap();
    let store = (*warm.store()).clone();

    let remote = RemoteBackend::new("http://127.0.0.1:9", None).unwrap();
    let service = Arc::new(Service::with_store(Gateway::new(Arc::new(remote), dim), store, None));
    let dir = tempfile::tempdir().unwrap();
    let app = router(AppState::new(service, SessionBook::open(dir.path().join("l"), 0).unwrap()));
    let rt = tokio::runtime::Runtime::new().unwrap();
    for engine in ["baseline", "augmented"] {
        let (s, body) = rt.block_on(json_call(&app, "POST", "/query", Some(json!({"query": "hi", "engine": engine}))));
        assert_eq!(s, StatusCode::SERVICE_UNAVAILABLE, "{engine}: {body}");
    }
    drop(rt);
}

fn engine_of(answer: &str) -> EngineKind {
    if answer.starts_with(CARDIO_ANSWER) {
        EngineKind::Augmented
    } else {
        EngineKind::Baseline
    }
}

#[tokio::test]
async fn compare_is_blind_and_seedable() {
    let h = harness();
    ready(&h).await;
    // ChaCha8 seeded with 1 puts the augmented engine under A, seeded
    // with 2 the baseline.
    let documented = [(1u64, EngineKind::Augmented), (2u64, EngineKind::Baseline)];
    for (seed, a) in documented {
        assert_eq!(seeded_assignment(seed).a, a);
        let req = json!({"query": CARDIO, "seed": seed, "reference_time": REF, "category": "hybrid"});
        let (s, bytes, _) = call(&h.app, "POST", "/compare", Some(req.clone())).await;
        assert_eq!(s, StatusCode::OK);
        let text = String::from_utf8(bytes.clone()).unwrap().to_lowercase();
        for leak in ["augmented", "baseline", "engine", "assignment"] {
            assert!(!text.contains(leak), "compare response mentions {leak}");
        }
        let body: Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(body["answers"][0]["label"], "A");
        assert_eq!(body["answers"][1]["label"], "B");
        assert_eq!(engine_of(body["answers"][0]["answer"].as_str().unwrap()), a);
        assert_eq!(engine_of(body["answers"][1]["answer"].as_str().unwrap()), a.other());

        // Same seed, same assignment; fresh session id.
        let (_, again) = json_call(&h.app, "POST", "/compare", Some(req)).await;
        assert_eq!(again["answers"], body["answers"]);
        assert_ne!(again["session_id"], body["session_id"]);
    }
}

#[tokio::test]
async fn ratings_finalize_once() {
    let h = harness();
    ready(&h).await;
    let (s, _) = json_call(&h.app, "POST", "/sessions/nope/ratings", Some(json!({"side": "A", "upa": 3, "upc": 3}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    let req = json!({"query": CARDIO, "seed": 2, "reference_time": REF, "category": "hybrid"});
    let (_, body) = json_call(&h.app, "POST", "/compare", Some(req)).await;
    let id = body["session_id"].as_str().unwrap().to_string();
    let uri = format!("/sessions/{id}/ratings");

    for bad in [json!({"side": "C", "upa": 3, "upc": 3}), json!({"side": "A", "upa": 6, "upc": 3}), json!({"side": "A"})] {
        let (s, _) = json_call(&h.app, "POST", &uri, Some(bad)).await;
        assert_eq!(s, StatusCode::BAD_REQUEST);
    }

    let (s, bytes, _) = call(&h.app, "POST", &uri, Some(json!({"side": "A", "upa": 1, "upc": 1}))).await;
    assert_eq!(s, StatusCode::OK);
    let text = String::from_utf8(bytes).unwrap();
    assert!(!text.contains("augmented") && !text.contains("baseline"));
    let (_, body) = json_call(&h.app, "POST", &uri, Some(json!({"side": "A", "upa": 2, "upc": 3}))).await;
    assert_eq!(body, json!({"finalized": false, "awaiting": "B"}));
    assert!(read_log(&h.log).unwrap().is_empty());

    let (s, body) = json_call(&h.app, "POST", &uri, Some(json!({"side": "B", "upa": 5, "upc": 5}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["finalized"], true);
    let (s, _) = json_call(&h.app, "POST", &uri, Some(json!({"side": "B", "upa": 1, "upc": 1}))).await;
    assert_eq!(s, StatusCode::CONFLICT);

    let log = read_log(&h.log).unwrap();
    assert_eq!(log.len(), 1);
    let rec = &log[0];
    assert_eq!(rec.session_id, id);
    assert_eq!(rec.assignment.a, EngineKind::Baseline);
    assert_eq!(rec.rating_a.upa(), 2);
    assert!(rec.answer_b.answer.starts_with(CARDIO_ANSWER));
    assert_eq!(rec.answer_b.memory_ids.len(), 18);

    let (s, report) = json_call(&h.app, "GET", "/report", None).await;
    assert_eq!(s, StatusCode::OK);
    let overall = report["rows"].as_array().unwrap().last().unwrap();
    assert_eq!(overall["label"], "overall");
    assert_eq!(overall["sessions"], 1);
    assert_eq!(overall["augmented"]["accuracy"], 1.0);
    let (s, _, ctype) = call(&h.app, "GET", "/report?format=csv", None).await;
    assert_eq!((s, ctype.as_str()), (StatusCode::OK, "text/csv"));
    let (s, _, _) = call(&h.app, "GET", "/report?format=text", None).await;
    assert_eq!(s, StatusCode::OK);
    let (s, _, _) = call(&h.app, "GET", "/report?format=xml", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn browsing_and_media() {
    let h = harness();
    ready(&h).await;
    let (s, body) = json_call(&h.app, "GET", "/memories/P-001", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["memory"]["id"], "P-001");
    assert_eq!(body["media_url"], "/media/media/P-001.png");
    let (s, _) = json_call(&h.app, "GET", "/memories/P-999", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    let (_, contexts) = json_call(&h.app, "GET", "/contexts", None).await;
    assert_eq!(contexts.as_array().unwrap().len(), 6);
    let (_, knowledge) = json_call(&h.app, "GET", "/knowledge", None).await;
    assert_eq!(knowledge.as_array().unwrap().len(), 3);
    let (_, status) = json_call(&h.app, "GET", "/status", None).await;
    assert_eq!(status["memories"], 308);
    assert_eq!(status["duplicates"], 2);

    let (s, bytes, ctype) = call(&h.app, "GET", "/media/media/P-001.png", None).await;
    assert_eq!((s, ctype.as_str()), (StatusCode::OK, "image/png"));
    assert_eq!(bytes, std::fs::read(planted().join("corpus/media/P-001.png")).unwrap());
    for bad in ["/media/../truth.json", "/media/%2e%2e/truth.json", "/media/manifest.jsonl", "/media/media/P-999.png"] {
        let (s, _, _) = call(&h.app, "GET", bad, None).await;
        assert_eq!(s, StatusCode::NOT_FOUND, "{bad}");
    }
}
