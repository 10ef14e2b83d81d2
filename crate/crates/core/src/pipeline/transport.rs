//! Chat-completions transports: live HTTP and recorded fixtures.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use base64::Engine;
use serde_json::{json, Value};
use thiserror::Error;

use super::{ImageInput, MllmEndpointConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Role {
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatMessage {
    pub role: Role,
    pub text: String,
}

/// One chat call. `label` names the step (`step1`, `step2a`,
/// `step2b-0-a`, `step3-0-1`) and gets a `.repair` suffix on the
/// corrective follow-up.
#[derive(Debug, Clone)]
pub struct ChatRequest<'a> {
    pub label: String,
    pub messages: Vec<ChatMessage>,
    /// Attached to the first user message.
    pub image: Option<&'a ImageInput>,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TransportError {
    #[error("no API key configured (set REVIS_MLLM_API_KEY)")]
    MissingKey,
    #[error("endpoint returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("network error: {0}")]
    Network(String),
    #[error("malformed endpoint response: {0}")]
    Response(String),
    #[error("no recorded response `{}`", .0.display())]
    MissingFixture(PathBuf),
}

impl TransportError {
    fn retryable(&self) -> bool {
        match self {
            TransportError::Network(_) => true,
            TransportError::Status { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }

    /// Configuration and network problems, as opposed to missing fixtures.
    pub fn is_config(&self) -> bool {
        matches!(self, TransportError::MissingKey)
    }
}

pub trait ChatTransport: Send + Sync {
    /// Returns the assistant message text.
    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, TransportError>;
}

/// Replays responses stored as `<dir>/<label>.txt`.
#[derive(Debug)]
pub struct FixtureTransport {
    dir: PathBuf,
    calls: Mutex<Vec<String>>,
    prompts: Mutex<BTreeMap<String, String>>,
}

impl FixtureTransport {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureTransport { dir: dir.into(), calls: Mutex::new(Vec::new()), prompts: Mutex::new(BTreeMap::new()) }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Labels served so far, in call order.
    pub fn calls(&self) -> Vec<String> {
        self.calls.lock().expect("fixture log").clone()
    }

    /// Last user message text per label.
    pub fn prompts(&self) -> BTreeMap<String, String> {
        self.prompts.lock().expect("fixture log").clone()
    }
}

impl ChatTransport for FixtureTransport {
    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, TransportError> {
        let path = self.dir.join(format!("{}.txt", request.label));
        self.calls.lock().expect("fixture log").push(request.label.clone());
        if let Some(m) = request.messages.iter().rev().find(|m| m.role == Role::User) {
            self.prompts.lock().expect("fixture log").insert(request.label.clone(), m.text.clone());
        }
        std::fs::read_to_string(&path).map_err(|_| TransportError::MissingFixture(path))
    }
}

/// OpenAI-style `POST {base_url}/chat/completions`.
pub struct LiveTransport {
    cfg: MllmEndpointConfig,
    agent: ureq::Agent,
}

impl LiveTransport {
    pub fn new(cfg: MllmEndpointConfig) -> Result<Self, TransportError> {
        if cfg.api_key.as_deref().is_none_or(str::is_empty) {
            return Err(TransportError::MissingKey);
        }
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(cfg.timeout_secs)))
            .build()
            .into();
        Ok(LiveTransport { cfg, agent })
    }

    fn body(&self, request: &ChatRequest<'_>) -> Value {
        let mut image = request.image;
        let messages: Vec<Value> = request
            .messages
            .iter()
            .map(|m| match m.role {
                Role::Assistant => json!({"role": "assistant", "content": m.text}),
                Role::User => {
                    let mut parts = vec![json!({"type": "text", "text": m.text})];
                    if let Some(img) = image.take() {
                        let data = base64::engine::general_purpose::STANDARD.encode(&img.bytes);
                        parts.push(json!({
                            "type": "image_url",
                            "image_url": {"url": format!("data:{};base64,{data}", img.media_type)}
                        }));
                    }
                    json!({"role": "user", "content": parts})
                }
            })
            .collect();
        json!({"model": self.cfg.model, "messages": messages})
    }

    fn once(&self, body: &Value) -> Result<String, TransportError> {
        let url = format!("{}/chat/completions", self.cfg.base_url.trim_end_matches('/'));
        let key = self.cfg.api_key.as_deref().unwrap_or_default();
        let mut resp = self
            .agent
            .post(&url)
            .header("Authorization", &format!("Bearer {key}"))
            .config()
            .http_status_as_error(false)
            .build()
            .send_json(body)
            .map_err(|e| TransportError::Network(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(|e| TransportError::Network(e.to_string()))?;
        if status >= 400 {
            return Err(TransportError::Status { status, body: text });
        }
        let v: Value = serde_json::from_str(&text).map_err(|e| TransportError::Response(e.to_string()))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| TransportError::Response("missing choices[0].message.content".into()))
    }
}

impl ChatTransport for LiveTransport {
    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, TransportError> {
        let body = self.body(request);
        let mut attempt = 0;
        loop {
            match self.once(&body) {
                Err(e) if e.retryable() && attempt < self.cfg.max_retries => {
                    attempt += 1;
                    std::thread::sleep(Duration::from_millis(500 << attempt.min(6)));
                }
                r => return r,
            }
        }
    }
}
