//! Typed async client for the uniact session service.

use reqwest::{Method, StatusCode};
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

pub use uniact_core::resolver::Resolution;
pub use uniact_core::session::{AppSummary, CommandOutcome, ErrorBody, SessionSummary, StateView, TranscriptEntry};
use uniact_core::session::{ChooseCandidate, CreateSession, SubmitCommand};

#[derive(Debug, Error)]
pub enum ClientError {
    /// The service answered with an error body.
    #[error("{status}: {} ({})", body.error, body.code)]
    Api { status: StatusCode, body: ErrorBody },
    #[error("request failed: {0}")]
    Transport(#[from] reqwest::Error),
}

impl ClientError {
    /// The service's error code, if the failure came from the service.
    pub fn code(&self) -> Option<&str> {
        match self {
            ClientError::Api { body, .. } => Some(&body.code),
            ClientError::Transport(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    pub fn new(base_url: impl Into<String>) -> Self {
        Client {
            base: base_url.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    async fn call<B: Serialize, T: DeserializeOwned>(
        &self,
        method: Method,
        path: &str,
        body: Option<&B>,
    ) -> Result<T, ClientError> {
        let mut req = self.http.request(method, format!("{}{}", self.base, path));
        if let Some(body) = body {
            req = req.json(body);
        }
        let resp = req.send().await?;
        let status = resp.status();
        if status.is_success() {
            return Ok(resp.json().await?);
        }
        let text = resp.text().await?;
        let body = serde_json::from_str(&text).unwrap_or(ErrorBody {
            error: text,
            code: status.as_str().to_string(),
        });
        Err(ClientError::Api { status, body })
    }

    pub async fn apps(&self) -> Result<Vec<AppSummary>, ClientError> {
        self.call::<(), _>(Method::GET, "/apps", None).await
    }

    pub async fn create_session(&self, app: &str) -> Result<SessionSummary, ClientError> {
        let body = CreateSession { app: app.to_string() };
        self.call(Method::POST, "/sessions", Some(&body)).await
    }

    pub async fn state(&self, session: &str) -> Result<StateView, ClientError> {
        self.call::<(), _>(Method::GET, &format!("/sessions/{session}/state"), None)
            .await
    }

    pub async fn command(&self, session: &str, nlc: &str) -> Result<CommandOutcome, ClientError> {
        let body = SubmitCommand { nlc: nlc.to_string() };
        self.call(Method::POST, &format!("/sessions/{session}/command"), Some(&body))
            .await
    }

    pub async fn choose(&self, session: &str, index: usize) -> Result<CommandOutcome, ClientError> {
        let body = ChooseCandidate { index };
        self.call(Method::POST, &format!("/sessions/{session}/choose"), Some(&body))
            .await
    }

    pub async fn transcript(&self, session: &str) -> Result<Vec<TranscriptEntry>, ClientError> {
        self.call::<(), _>(Method::GET, &format!("/sessions/{session}/transcript"), None)
            .await
    }

    /// Resolves without a session; nothing is executed.
    pub async fn resolve(&self, app: &str, nlc: &str) -> Result<Resolution, ClientError> {
        let body = SubmitCommand { nlc: nlc.to_string() };
        self.call(Method::POST, &format!("/apps/{app}/resolve"), Some(&body))
            .await
    }
}
