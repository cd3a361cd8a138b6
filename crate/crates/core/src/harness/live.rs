//! Client for OpenAI-compatible chat-completion endpoints.

use std::time::Duration;

use serde_json::{json, Value};

use super::client::{ChatError, ChatRequest, ChatServiceClient};

pub struct HttpChatClient {
    http: reqwest::blocking::Client,
    endpoint: String,
    api_key: String,
}

impl HttpChatClient {
    /// `base_url` is the API root (for example `https://api.openai.com/v1`);
    /// the key is read from the environment variable `key_var` and never
    /// written anywhere.
    pub fn from_env(base_url: &str, key_var: &str) -> Result<Self, ChatError> {
        let api_key = std::env::var(key_var)
            .map_err(|_| ChatError::fatal(format!("environment variable {key_var} is not set")))?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| ChatError::fatal(e.to_string()))?;
        Ok(Self { http, endpoint: format!("{}/chat/completions", base_url.trim_end_matches('/')), api_key })
    }
}

impl ChatServiceClient for HttpChatClient {
    fn send(&self, request: &ChatRequest) -> Result<String, ChatError> {
        let mut body = json!({ "model": request.model, "messages": request.messages });
        if let Some(t) = request.temperature {
            body["temperature"] = json!(t);
        }
        let resp = self
            .http
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| ChatError::transient(e.to_string()))?;
        let status = resp.status();
        if status.as_u16() == 429 {
            let retry_after_ms = resp
                .headers()
                .get("retry-after")
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.parse::<f64>().ok())
                .map(|s| (s * 1000.0) as u64);
            return Err(ChatError::RateLimited { retry_after_ms });
        }
        if status.is_server_error() {
            return Err(ChatError::transient(format!("HTTP {status}")));
        }
        let text = resp.text().map_err(|e| ChatError::transient(e.to_string()))?;
        if !status.is_success() {
            return Err(ChatError::fatal(format!("HTTP {status}: {text}")));
        }
        let doc: Value =
            serde_json::from_str(&text).map_err(|e| ChatError::transient(format!("bad response body: {e}")))?;
        doc["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| ChatError::transient("response without message content"))
    }
}
