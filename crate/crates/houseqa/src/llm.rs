//! Pluggable chat-completions backend.
//!
//! The pipeline only needs "send these role/content messages, get text
//! back", expressed by [`ChatClient`]. [`HttpChatClient`] speaks the common
//! chat-completions HTTP JSON shape against any compatible server;
//! [`ScriptedClient`] replays canned replies for tests and offline runs.

use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "system".into(),
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "user".into(),
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: "assistant".into(),
            content: content.into(),
        }
    }
}

/// A blocking chat backend. Implementations must be `Sync` so independent
/// agents can answer concurrently.
pub trait ChatClient: Send + Sync {
    fn chat(&self, messages: &[ChatMessage]) -> Result<String>;
}

/// Connection settings for a chat-completions-style HTTP endpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LlmConfig {
    /// Base URL, e.g. "https://api.openai.com/v1".
    pub base_url: String,
    pub model: String,
    /// Environment variable holding the API key.
    #[serde(default = "default_api_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
    #[serde(default = "default_max_retries")]
    pub max_retries: usize,
    #[serde(default)]
    pub temperature: Option<f64>,
}

fn default_api_key_env() -> String {
    "HOUSEQA_API_KEY".into()
}

fn default_max_in_flight() -> usize {
    4
}

fn default_max_retries() -> usize {
    3
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    #[serde(skip_serializing_if = "Option::is_none")]
    temperature: Option<f64>,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: String,
}

pub struct HttpChatClient {
    config: LlmConfig,
    api_key: String,
    http: reqwest::blocking::Client,
}

impl HttpChatClient {
    /// Reads the API key from the configured environment variable.
    pub fn new(config: LlmConfig) -> Result<Self> {
        let api_key = std::env::var(&config.api_key_env).map_err(|_| {
            Error::ChatBackend(format!(
                "environment variable {} is not set",
                config.api_key_env
            ))
        })?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| Error::ChatBackend(e.to_string()))?;
        Ok(HttpChatClient {
            config,
            api_key,
            http,
        })
    }

    pub fn max_in_flight(&self) -> usize {
        self.config.max_in_flight.max(1)
    }

    fn send_once(&self, messages: &[ChatMessage]) -> Result<String> {
        let url = format!(
            "{}/chat/completions",
            self.config.base_url.trim_end_matches('/')
        );
        let body = ChatRequest {
            model: &self.config.model,
            messages,
            temperature: self.config.temperature,
        };
        let resp = self
            .http
            .post(url)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| Error::ChatBackend(e.to_string()))?;
        let status = resp.status();
        let text = resp
            .text()
            .map_err(|e| Error::ChatBackend(e.to_string()))?;
        if !status.is_success() {
            return Err(Error::ChatBackend(format!("HTTP {status}: {text}")));
        }
        let parsed: ChatResponse = serde_json::from_str(&text)
            .map_err(|e| Error::ChatBackend(format!("bad response body: {e}")))?;
        parsed
            .choices
            .first()
            .map(|c| c.message.content.clone())
            .ok_or_else(|| Error::ChatBackend("response has no choices".into()))
    }
}

impl ChatClient for HttpChatClient {
    fn chat(&self, messages: &[ChatMessage]) -> Result<String> {
        let mut delay = Duration::from_millis(500);
        let mut last = None;
        for _ in 0..=self.config.max_retries {
            match self.send_once(messages) {
                Ok(reply) => return Ok(reply),
                Err(e) => {
                    last = Some(e);
                    std::thread::sleep(delay);
                    delay *= 2;
                }
            }
        }
        Err(last.unwrap_or_else(|| Error::ChatBackend("no attempts made".into())))
    }
}

/// Test double that pops replies in order; errors when exhausted.
pub struct ScriptedClient {
    replies: Mutex<std::collections::VecDeque<String>>,
    pub calls: Mutex<Vec<Vec<ChatMessage>>>,
}

impl ScriptedClient {
    pub fn new<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedClient {
            replies: Mutex::new(replies.into_iter().map(Into::into).collect()),
            calls: Mutex::new(Vec::new()),
        }
    }

    /// A client that always returns the same reply.
    pub fn constant(reply: impl Into<String>) -> ConstantClient {
        ConstantClient {
            reply: reply.into(),
        }
    }
}

impl ChatClient for ScriptedClient {
    fn chat(&self, messages: &[ChatMessage]) -> Result<String> {
        self.calls.lock().unwrap().push(messages.to_vec());
        self.replies
            .lock()
            .unwrap()
            .pop_front()
            .ok_or_else(|| Error::ChatBackend("scripted client exhausted".into()))
    }
}

pub struct ConstantClient {
    reply: String,
}

impl ChatClient for ConstantClient {
    fn chat(&self, _messages: &[ChatMessage]) -> Result<String> {
        Ok(self.reply.clone())
    }
}
