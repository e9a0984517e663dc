use std::time::Duration;

use reqwest::StatusCode;
use tokio::net::TcpListener;
use uniact_client::{Client, ClientError, CommandOutcome};
use uniact_core::catalog::Catalog;
use uniact_core::session::Runtime;
use uniact_service::{serve_on, ServiceConfig};

async fn start() -> Client {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let config = ServiceConfig {
        bind: addr,
        idle_timeout: Duration::from_secs(600),
        cors_origin: None,
    };
    tokio::spawn(serve_on(
        listener,
        config,
        Catalog::bundled().unwrap(),
        Runtime::default(),
    ));
    Client::new(format!("http://{addr}"))
}

fn status(err: ClientError) -> (StatusCode, String) {
    match err {
        ClientError::Api { status, body } => (status, body.code),
        other => panic!("expected an API error, got {other}"),
    }
}

#[tokio::test]
async fn lists_the_bundled_apps() {
    let client = start().await;
    let apps = client.apps().await.unwrap();
    let names: Vec<&str> = apps.iter().map(|a| a.name.as_str()).collect();
    assert_eq!(names, ["explorer", "notepad", "wordpad"]);
    let wordpad = apps.iter().find(|a| a.name == "wordpad").unwrap();
    assert_eq!(wordpad.pairs, 68);
}

#[tokio::test]
async fn create_session_shows_launch_controls() {
    let client = start().await;
    let a = client.create_session("wordpad").await.unwrap();
    let b = client.create_session("wordpad").await.unwrap();
    assert_ne!(a.id, b.id);
    assert!(a.visible.iter().any(|n| n == "Layout"));

    let err = client.create_session("nosuchapp").await.unwrap_err();
    assert_eq!(status(err), (StatusCode::NOT_FOUND, "UnknownApp".into()));
}

#[tokio::test]
async fn margin_command_executes_and_shows_in_state() {
    let client = start().await;
    let s = client.create_session("wordpad").await.unwrap();
    let other = client.create_session("wordpad").await.unwrap();
    let out = client.command(&s.id, "set the margin to narrow").await.unwrap();
    let CommandOutcome::Executed { message, steps, .. } = &out else {
        panic!("expected execution, got {out:?}");
    };
    assert_eq!(message, "Margins updated Narrow");
    assert_eq!(steps.describe().last().map(String::as_str), Some("Select Narrow"));

    let state = client.state(&s.id).await.unwrap();
    assert_eq!(state.assigned_values.get("margins").map(String::as_str), Some("Narrow"));
    // sessions are isolated
    assert!(client.state(&other.id).await.unwrap().assigned_values.is_empty());
}

#[tokio::test]
async fn ambiguity_round_trip() {
    let client = start().await;
    let s = client.create_session("notepad").await.unwrap();
    let out = client.command(&s.id, "erase the highlighted text").await.unwrap();
    let CommandOutcome::Ambiguous { candidates, .. } = out else {
        panic!("expected ambiguity");
    };
    assert_eq!(candidates.len(), 2);

    let err = client.command(&s.id, "save the file").await.unwrap_err();
    assert_eq!(status(err), (StatusCode::CONFLICT, "PendingChoice".into()));
    let err = client.choose(&s.id, 7).await.unwrap_err();
    assert_eq!(status(err), (StatusCode::BAD_REQUEST, "IndexOutOfRange".into()));

    let out = client.choose(&s.id, 0).await.unwrap();
    let CommandOutcome::Executed { pair, .. } = out else {
        panic!("expected execution");
    };
    assert_eq!(pair.to_string(), "(Delete, none)");

    let err = client.choose(&s.id, 0).await.unwrap_err();
    assert_eq!(status(err), (StatusCode::CONFLICT, "NoPending".into()));

    let transcript = client.transcript(&s.id).await.unwrap();
    assert_eq!(transcript.len(), 2);
    assert_eq!(transcript[1].outcome.status(), "executed");
}

#[tokio::test]
async fn empty_command_is_unresolved() {
    let client = start().await;
    let s = client.create_session("wordpad").await.unwrap();
    let out = client.command(&s.id, "").await.unwrap();
    assert_eq!(out.status(), "unresolved");
}

#[tokio::test]
async fn unknown_session_and_bad_json() {
    let client = start().await;
    let err = client.state("nope").await.unwrap_err();
    assert_eq!(status(err), (StatusCode::NOT_FOUND, "UnknownSession".into()));

    let resp = reqwest::Client::new()
        .post(format!("{}/sessions", client.base_url()))
        .header("content-type", "application/json")
        .body("{not json")
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
    let body: serde_json::Value = resp.json().await.unwrap();
    assert_eq!(body["code"], "BadRequest");
}

#[tokio::test]
async fn stateless_resolve() {
    let client = start().await;
    let r = client.resolve("wordpad", "Set the Margin to Narrow.").await.unwrap();
    assert_eq!(r.top().unwrap().pair.to_string(), "(Margins, Narrow)");
}

#[tokio::test]
async fn concurrent_commands_on_one_session_are_serialized() {
    let client = start().await;
    let s = client.create_session("notepad").await.unwrap();
    let commands = [
        "save the file",
        "zoom out",
        "show the status bar",
        "undo my last change",
        "paste the clipboard",
    ];
    let mut handles = Vec::new();
    for nlc in commands {
        let client = client.clone();
        let id = s.id.clone();
        handles.push(tokio::spawn(async move { client.command(&id, nlc).await }));
    }
    for h in handles {
        assert_eq!(h.await.unwrap().unwrap().status(), "executed");
    }
    let transcript = client.transcript(&s.id).await.unwrap();
    assert_eq!(transcript.len(), commands.len());
}

#[tokio::test]
async fn cors_preflight_is_answered() {
    let client = start().await;
    let resp = reqwest::Client::new()
        .request(reqwest::Method::OPTIONS, format!("{}/sessions", client.base_url()))
        .header("origin", "http://localhost:5173")
        .header("access-control-request-method", "POST")
        .send()
        .await
        .unwrap();
    assert!(resp.status().is_success());
    assert_eq!(resp.headers()["access-control-allow-origin"], "*");
}
