use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use techdoc_core::emit::Format;
use techdoc_core::fixtures;
use techdoc_core::pipeline::{generate, GenerationRequest, Mode};
use techdoc_core::realize::{Language, Resources};
use techdoc_service::api::{router, AppState};
use techdoc_service::load::assets_dir;
use tower::ServiceExt;

fn app() -> Router {
    router(Arc::new(AppState::new(fixtures::car(), Resources::bundled())), assets_dir(None))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value)
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, "GET", uri, None).await
}

async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(app, "POST", uri, Some(body)).await
}

/// Span of the first content phrase starting with `text`, from a /generate response.
fn span_of(resp: &Value, lang: &str, text: &str) -> String {
    for item in resp["documents"][lang]["items"].as_array().unwrap() {
        let Some(tokens) = item["tokens"].as_array() else { continue };
        let chars: Vec<char> = item["text"].as_str().unwrap().chars().collect();
        for t in tokens.iter().filter(|t| t["kb"].is_string()) {
            let start = t["start"].as_u64().unwrap() as usize;
            let end = start + text.chars().count();
            if end <= chars.len() && chars[start..end].iter().collect::<String>() == text {
                return format!("{}:{start}-{end}", item["plan"]);
            }
        }
    }
    panic!("no `{text}` in {lang}")
}

#[tokio::test]
async fn plans_for_device() {
    let app = app();
    let (s, v) = get(&app, "/plans?device=car-1").await;
    assert_eq!(s, StatusCode::OK);
    let ids: Vec<&str> = v.as_array().unwrap().iter().map(|p| p["id"].as_str().unwrap()).collect();
    assert!(ids.contains(&"check-oil-level"));
    assert_eq!(get(&app, "/plans?device=ghost").await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn generate_and_query() {
    let app = app();
    let (s, v) = post(&app, "/generate", json!({ "plan": "check-oil-level", "format": "plain" })).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let doc = v["doc"].as_str().unwrap().to_string();
    assert!(v["rendered"]["en"]["body"].as_str().unwrap().starts_with("Checking the engine oil level\n"));
    let digests: Vec<&Value> = ["en", "de", "fr"].iter().map(|l| &v["documents"][l]["digest"]).collect();
    assert!(digests.iter().all(|d| *d == digests[0]));

    // Repeating the request yields the same id and body.
    let (_, again) = post(&app, "/generate", json!({ "plan": "check-oil-level", "format": "plain" })).await;
    assert_eq!(again, v);

    let it = span_of(&v, "en", "it");
    let (s, a) = get(&app, &format!("/query/antecedent?doc={doc}&lang=en&span={it}")).await;
    assert_eq!(s, StatusCode::OK, "{a}");
    assert_eq!(a["referent"], "dipstick-1");
    assert_eq!(a["antecedent"]["text"], "the dipstick");

    let dip = span_of(&v, "en", "the dipstick");
    let (s, _) = get(&app, &format!("/query/antecedent?doc={doc}&span={dip}")).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let (s, al) = get(&app, &format!("/query/align?doc={doc}&lang=en&span={dip}")).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(al["counterparts"]["de"][0]["text"], "den Ölmessstab");
    assert_eq!(al["counterparts"]["fr"][0]["text"], "la jauge");

    // Identical GETs give identical bodies.
    let (_, al2) = get(&app, &format!("/query/align?doc={doc}&lang=en&span={dip}")).await;
    assert_eq!(al, al2);

    assert_eq!(get(&app, &format!("/query/align?doc=nope&span={dip}")).await.0, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, &format!("/query/align?doc={doc}&span=999:0-1")).await.0, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, &format!("/query/align?doc={doc}&span=junk")).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(post(&app, "/generate", json!({ "plan": "nope" })).await.0, StatusCode::NOT_FOUND);
    assert_eq!(post(&app, "/generate", json!({ "plan": "check-oil-level", "languages": [] })).await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn location_and_assets() {
    let app = app();
    let (s, v) = get(&app, "/query/location?instance=dipstick-1").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["region"], json!({ "x": 412.0, "y": 168.0, "w": 64.0, "h": 150.0 }));
    assert_eq!(v["url"], "/assets/engine-bay.svg");
    let res = app.clone().oneshot(Request::get("/assets/engine-bay.svg").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(res.status(), StatusCode::OK);
    assert_eq!(get(&app, "/query/location?instance=ghost").await.0, StatusCode::NOT_FOUND);
}

fn draft() -> Value {
    json!({
        "id": "draft-check",
        "title": { "process": "check", "patient": "oil-level-1" },
        "target_device": "car-1",
        "steps": [
            { "action": { "id": "d-pull", "process": "pull-out", "category": "primitive-motor-action",
                "participants": { "patient": "dipstick-1" } } },
            { "action": { "id": "d-read", "process": "read", "category": "check-attribute", "attribute": "level-state",
                "participants": { "patient": "oil-level-1", "location": "dipstick-1" } } }
        ]
    })
}

#[tokio::test]
async fn draft_plan_lifecycle() {
    let app = app();
    let (s, v) = post(&app, "/draft-plan", json!({ "session": "s1", "plan": draft() })).await;
    assert_eq!(s, StatusCode::OK, "{v}");

    let mut bad = draft();
    bad["steps"][1]["action"]["participants"]["location"] = json!("engine-1");
    let (s, v) = post(&app, "/draft-plan", json!({ "session": "s1", "plan": bad })).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(v["diagnostics"][0]["code"], "participant-type");

    // The draft only exists in its session.
    assert_eq!(post(&app, "/generate", json!({ "plan": "draft-check" })).await.0, StatusCode::NOT_FOUND);
    let (s, v) = post(&app, "/generate", json!({ "plan": "draft-check", "session": "s1", "format": "plain" })).await;
    assert_eq!(s, StatusCode::OK, "{v}");

    // Same documents as generating directly from a knowledge base holding the plan.
    let mut kb = fixtures::car();
    kb.upsert_plan(serde_json::from_value(draft()).unwrap());
    let g = generate(&kb, GenerationRequest { plan: "draft-check", languages: &Language::ALL, mode: Mode::Static }, Resources::bundled())
        .unwrap();
    for l in Language::ALL {
        assert_eq!(v["documents"][l.code()], serde_json::to_value(&g.documents[&l]).unwrap());
        assert_eq!(v["rendered"][l.code()]["body"], g.emit(l, Format::Plain).unwrap().body);
    }

    let (s, v) = post(&app, "/save", json!({ "session": "s1" })).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v["kb"]["plans"].as_array().unwrap().iter().any(|p| p["id"] == "draft-check"));
}

#[tokio::test]
async fn menus_follow_session_state() {
    let app = app();
    let (s, v) = get(&app, "/menu?context=participant&process=read&role=location").await;
    assert_eq!(s, StatusCode::OK);
    assert!(v.as_array().unwrap().iter().any(|o| o["id"] == "dipstick-1"));
    assert_eq!(get(&app, "/menu?context=participant&process=read").await.0, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/menu?context=participant&process=fly&role=location").await.0, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/menu?context=participant&process=read&role=colour").await.0, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/menu?context=bogus").await.0, StatusCode::BAD_REQUEST);

    // A tell in one session changes that session's menus only.
    let uri = "/menu?context=participant&process=read&role=location";
    let ids = |v: &Value| v.as_array().unwrap().iter().map(|o| o["id"].as_str().unwrap().to_string()).collect::<Vec<_>>();
    let (_, before) = get(&app, &format!("{uri}&session=s2")).await;
    assert_eq!(ids(&before), ["coolant-scale-1", "dipstick-1"]);
    let (s, _) = post(&app, "/tell", json!({ "session": "s2", "assertions": [
        { "op": "retract-type", "instance": "coolant-scale-1", "concept": "imprinted-scale" }
    ]})).await;
    assert_eq!(s, StatusCode::OK);
    let (_, after) = get(&app, &format!("{uri}&session=s2")).await;
    assert_eq!(ids(&after), ["dipstick-1"]);
    let (_, base) = get(&app, uri).await;
    assert_eq!(base, before);
}

#[tokio::test]
async fn simulate_with_tells() {
    let app = app();
    let (s, v) = post(&app, "/simulate", json!({ "plan": "check-oil-level" })).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["plan"], "check-oil-level");
    let tell = json!([{ "op": "filler", "instance": "oil-level-1", "role": "level-state", "value": "low" }]);
    assert_eq!(post(&app, "/simulate", json!({ "plan": "check-oil-level", "tell": tell })).await.0, StatusCode::BAD_REQUEST);
    let (s, v) = post(&app, "/simulate", json!({ "plan": "check-oil-level", "tell": tell, "session": "s3" })).await;
    assert_eq!(s, StatusCode::OK);
    let add = v["entries"].as_array().unwrap().iter().find(|e| e["action"] == "add-oil").unwrap();
    assert_eq!(add["status"], "executed");
    assert_eq!(post(&app, "/simulate", json!({ "plan": "nope" })).await.0, StatusCode::NOT_FOUND);
}

#[test]
fn assets_dir_holds_fixture_images() {
    let dir: PathBuf = assets_dir(None);
    assert!(dir.join("engine-bay.svg").is_file());
}
