use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use lexpand_cli::resources::Resources;
use lexpand_cli::service::{router, AppState};
use lexpand_cli::session::{read_log, SessionState, SessionStore};
use lexpand_core::{expand_synonym, SynonymGraph, WordList};
use serde_json::{json, Value};
use tower::ServiceExt;

fn synonyms() -> SynonymGraph {
    let tsv = "happy\tglad\nhappy\tcheerful\nglad\tjoyful\nsad\tunhappy\njoyful\telated\n";
    SynonymGraph::read("toy", tsv.as_bytes()).unwrap()
}

fn app(dir: &std::path::Path) -> Router {
    let resources = Resources {
        synonyms: Some(Arc::new(synonyms())),
        ..Resources::default()
    };
    let sessions = SessionStore::open(dir).unwrap();
    router(Arc::new(AppState { resources, sessions }))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect()
}

#[tokio::test]
async fn methods_report_availability() {
    let dir = tempfile::tempdir().unwrap();
    let (status, body) = call(&app(dir.path()), "GET", "/methods", None).await;
    assert_eq!(status, StatusCode::OK);
    let avail: Vec<(String, bool)> = body["methods"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| (m["id"].as_str().unwrap().to_string(), m["available"].as_bool().unwrap()))
        .collect();
    assert!(avail.contains(&("synonym".into(), true)));
    assert!(avail.contains(&("colex".into(), false)));
    assert!(avail.contains(&("union".into(), false)));
}

#[tokio::test]
async fn expand_matches_core_expansion() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (status, body) = call(&app, "POST", "/expand", Some(json!({"seeds": ["Happy", "sad", "zzz"], "method": "synonym"}))).await;
    assert_eq!(status, StatusCode::OK);

    let seeds = WordList::from_strs("s", ["happy", "sad", "zzz"]).unwrap();
    let oracle = expand_synonym(&synonyms(), &seeds);
    let names = |l: &WordList| l.iter().map(|w| w.to_string()).collect::<Vec<_>>();
    assert_eq!(strings(&body["new_words"]), names(&oracle.new_words));
    assert_eq!(strings(&body["expanded"]), names(&oracle.expanded()));
    assert_eq!(strings(&body["unmatched"]), ["zzz"]);
    assert_eq!(body["expandable"], true);
    assert_eq!(strings(&body["new_words"]), ["cheerful", "glad", "unhappy"]);
}

#[tokio::test]
async fn error_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (s, _) = call(&app, "POST", "/expand", Some(json!({"seeds": ["happy"], "method": "nonsense"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, body) = call(&app, "POST", "/expand", Some(json!({"seeds": ["happy"], "method": "colex"}))).await;
    assert_eq!(s, StatusCode::SERVICE_UNAVAILABLE);
    assert!(body["error"].as_str().unwrap().contains("colex"));
    let (s, _) = call(&app, "POST", "/expand", Some(json!({"seeds": [], "method": "synonym"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(&app, "GET", "/session/doesnotexist", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&app, "GET", "/session/doesnotexist/export", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&app, "POST", "/session/doesnotexist/decide", Some(json!({"word": "glad", "decision": "accept"}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn decide_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (_, body) = call(&app, "POST", "/expand", Some(json!({"seeds": ["happy", "glad"], "method": "synonym"}))).await;
    let id = body["session_id"].as_str().unwrap().to_string();
    assert_eq!(strings(&body["expanded"]), ["happy", "glad", "cheerful", "joyful"]);

    let decide = |word: &str, decision: &str| json!({"word": word, "decision": decision, "rater": "ann"});
    let (s, state) = call(&app, "POST", &format!("/session/{id}/decide"), Some(decide("cheerful", "reject"))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(state["counts"]["rejected"], 1);
    assert_eq!(state["counts"]["pending"], 3);
    call(&app, "POST", &format!("/session/{id}/decide"), Some(decide("joyful", "accept"))).await;

    // A word that is not a candidate is refused and not logged.
    let (s, _) = call(&app, "POST", &format!("/session/{id}/decide"), Some(decide("table", "accept"))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let (s, export) = call(&app, "GET", &format!("/session/{id}/export"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(export["word_list"], "happy\nglad\njoyful\n");
    assert_eq!(
        export["annotations_csv"],
        "word,rater,label\ncheerful,ann,irrelevant\njoyful,ann,relevant\n"
    );

    // Later decisions override earlier ones.
    call(&app, "POST", &format!("/session/{id}/decide"), Some(decide("cheerful", "accept"))).await;
    let (_, export) = call(&app, "GET", &format!("/session/{id}/export"), None).await;
    assert_eq!(export["word_list"], "happy\nglad\ncheerful\njoyful\n");
}

#[tokio::test]
async fn sessions_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    let id;
    let before;
    {
        let app = app(dir.path());
        let (_, body) = call(&app, "POST", "/expand", Some(json!({"seeds": ["happy"], "method": "synonym"}))).await;
        id = body["session_id"].as_str().unwrap().to_string();
        for (word, d) in [("glad", "accept"), ("cheerful", "reject"), ("glad", "reject")] {
            call(&app, "POST", &format!("/session/{id}/decide"), Some(json!({"word": word, "decision": d}))).await;
        }
        before = call(&app, "GET", &format!("/session/{id}/export"), None).await.1;
    }
    let app = app(dir.path());
    let (s, after) = call(&app, "GET", &format!("/session/{id}/export"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(before, after);
    assert_eq!(after["word_list"], "happy\n");
}

#[tokio::test]
async fn scripted_curation_replays_from_log() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (_, body) = call(&app, "POST", "/expand", Some(json!({"seeds": ["happy", "glad", "sad"], "method": "synonym"}))).await;
    let id = body["session_id"].as_str().unwrap().to_string();
    let candidates = strings(&body["expanded"]);

    let mut rejected = std::collections::BTreeSet::new();
    for step in 0..50 {
        let word = &candidates[(step * 7 + 3) % candidates.len()];
        let decision = if (step * 5) % 3 == 0 { "reject" } else { "accept" };
        if decision == "reject" {
            rejected.insert(word.clone());
        } else {
            rejected.remove(word);
        }
        let (s, _) = call(&app, "POST", &format!("/session/{id}/decide"), Some(json!({"word": word, "decision": decision}))).await;
        assert_eq!(s, StatusCode::OK);
    }
    let (_, export) = call(&app, "GET", &format!("/session/{id}/export"), None).await;

    let replayed = SessionState::replay(&read_log(&dir.path().join(format!("{id}.jsonl"))).unwrap()).unwrap();
    let offline = replayed.export().unwrap();
    assert_eq!(export["word_list"].as_str().unwrap(), offline.word_list);
    assert_eq!(export["annotations_csv"].as_str().unwrap(), offline.annotations_csv);
    for line in offline.word_list.lines() {
        assert!(!rejected.contains(line), "{line} was rejected");
    }
    assert_eq!(offline.word_list.lines().count(), candidates.len() - rejected.len());
}
