//! Generic chat-completion backend over HTTP. Wire format:
//! request `{ "model": str, "messages": [{"role", "content"}], "temperature": 0 }`,
//! response `{ "choices": [{"message": {"content": str}}] }`.
//! Endpoint and credential come from PLANNER_ENDPOINT / PLANNER_API_KEY.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::prompt::{build_eqa_messages, build_planner_messages};
use super::{BackendError, EqaRequest, PlannerBackend, PlannerRequest};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: MessageContent,
}

/// Message content is either plain text or multipart (text and image parts).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MessageContent {
    Text(String),
    Parts(Vec<ContentPart>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ContentPart {
    Text { text: String },
    ImageUrl { image_url: ImageRef },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRef {
    pub url: String,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    content: String,
}

/// Extract the first choice's content from a chat-completion response body.
pub fn parse_chat_response(bytes: &[u8]) -> Result<String, BackendError> {
    let parsed: ChatResponse = serde_json::from_slice(bytes)
        .map_err(|e| BackendError::Protocol(format!("invalid completion response: {e}")))?;
    parsed
        .choices
        .into_iter()
        .next()
        .map(|c| c.message.content)
        .ok_or_else(|| BackendError::Protocol("response carries no choices".into()))
}

pub struct RemoteBackend {
    endpoint: String,
    api_key: String,
    model: String,
    agent: ureq::Agent,
    /// Per-call deadline, seconds.
    timeout: Duration,
}

impl RemoteBackend {
    pub fn new(endpoint: String, api_key: String, model: String) -> Self {
        let timeout = Duration::from_secs(60);
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build();
        RemoteBackend { endpoint, api_key, model, agent: config.into(), timeout }
    }

    /// Configuration from the environment: PLANNER_ENDPOINT (required),
    /// PLANNER_API_KEY (optional) and PLANNER_MODEL (optional).
    pub fn from_env() -> Result<Self, BackendError> {
        let endpoint = std::env::var("PLANNER_ENDPOINT").map_err(|_| {
            BackendError::Config("PLANNER_ENDPOINT is not set".into())
        })?;
        let api_key = std::env::var("PLANNER_API_KEY").unwrap_or_default();
        let model = std::env::var("PLANNER_MODEL").unwrap_or_else(|_| "default".into());
        Ok(RemoteBackend::new(endpoint, api_key, model))
    }

    pub fn call_timeout(&self) -> Duration {
        self.timeout
    }

    fn complete(&mut self, messages: &[ChatMessage]) -> Result<String, BackendError> {
        let body = serde_json::to_string(&ChatRequest {
            model: &self.model,
            messages,
            temperature: 0.0,
        })
        .expect("request serialization cannot fail");

        let mut request = self
            .agent
            .post(&self.endpoint)
            .header("content-type", "application/json");
        if !self.api_key.is_empty() {
            request = request.header("authorization", &format!("Bearer {}", self.api_key));
        }
        let mut response = request
            .send(&body)
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        parse_chat_response(text.as_bytes())
    }
}

impl PlannerBackend for RemoteBackend {
    fn name(&self) -> &'static str {
        "remote"
    }

    fn plan_text(&mut self, req: &PlannerRequest) -> Result<String, BackendError> {
        self.complete(&build_planner_messages(req))
    }

    fn eqa_text(&mut self, req: &EqaRequest) -> Result<String, BackendError> {
        self.complete(&build_eqa_messages(req))
    }
}
