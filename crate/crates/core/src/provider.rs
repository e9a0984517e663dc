//! Remote text-completion provider used by the seed generator and the
//! resolver when `UNIACT_PROVIDER=remote`.
//!
//! Wire contract: `POST <url>` with `{"prompt": <text>, "n": <replies>}` and
//! an optional `Authorization: Bearer <key>` header. The reply is either
//! `{"completions": [<text>...]}` or `{"choices": [{"text": <text>}...]}`.

use std::env;
use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ENV_PROVIDER: &str = "UNIACT_PROVIDER";
pub const ENV_REMOTE_URL: &str = "UNIACT_REMOTE_URL";
pub const ENV_REMOTE_KEY: &str = "UNIACT_REMOTE_KEY";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("provider misconfigured: {0}")]
    Config(String),
    #[error("provider transport failed: {0}")]
    Transport(String),
    #[error("provider reply malformed: {0}")]
    Reply(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    #[default]
    Offline,
    Remote,
}

impl std::str::FromStr for ProviderKind {
    type Err = ProviderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "offline" | "" => Ok(ProviderKind::Offline),
            "remote" => Ok(ProviderKind::Remote),
            other => Err(ProviderError::Config(format!("unknown provider `{other}`"))),
        }
    }
}

impl fmt::Display for ProviderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProviderKind::Offline => "offline",
            ProviderKind::Remote => "remote",
        })
    }
}

/// Single-turn completion returning up to `n` ranked replies.
pub trait CompletionClient: Send + Sync {
    fn complete(&self, prompt: &str, n: usize) -> Result<Vec<String>, ProviderError>;
}

#[derive(Clone)]
pub struct HttpCompletion {
    url: String,
    key: Option<String>,
    agent: ureq::Agent,
}

impl fmt::Debug for HttpCompletion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HttpCompletion")
            .field("url", &self.url)
            .field("key", &self.key.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

impl HttpCompletion {
    pub fn new(url: impl Into<String>, key: Option<String>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        HttpCompletion {
            url: url.into(),
            key,
            agent,
        }
    }

    /// Reads `UNIACT_REMOTE_URL` / `UNIACT_REMOTE_KEY`.
    pub fn from_env() -> Result<Self, ProviderError> {
        let url =
            env::var(ENV_REMOTE_URL).map_err(|_| ProviderError::Config(format!("{ENV_REMOTE_URL} is not set")))?;
        let key = env::var(ENV_REMOTE_KEY).ok().filter(|k| !k.is_empty());
        Ok(HttpCompletion::new(url, key))
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    prompt: &'a str,
    n: usize,
}

#[derive(Deserialize)]
struct Choice {
    text: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CompletionReply {
    Completions { completions: Vec<String> },
    Choices { choices: Vec<Choice> },
}

impl CompletionClient for HttpCompletion {
    fn complete(&self, prompt: &str, n: usize) -> Result<Vec<String>, ProviderError> {
        let mut request = self.agent.post(&self.url);
        if let Some(key) = &self.key {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = request
            .send_json(CompletionRequest { prompt, n })
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        let reply: CompletionReply = response
            .body_mut()
            .read_json()
            .map_err(|e| ProviderError::Reply(e.to_string()))?;
        Ok(match reply {
            CompletionReply::Completions { completions } => completions,
            CompletionReply::Choices { choices } => choices.into_iter().map(|c| c.text).collect(),
        })
    }
}

/// Provider selection from `UNIACT_PROVIDER`, defaulting to offline.
pub fn provider_from_env() -> Result<ProviderKind, ProviderError> {
    match env::var(ENV_PROVIDER) {
        Ok(v) => v.parse(),
        Err(_) => Ok(ProviderKind::Offline),
    }
}
