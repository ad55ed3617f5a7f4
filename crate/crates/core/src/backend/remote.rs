//! Chat-completions over HTTP.

use std::time::Duration;

use rand::Rng;
use serde_json::{json, Value};

use super::{BackendError, Completion, CompletionBackend, CompletionRequest, DEFAULT_RETRIES};

pub const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";
const BODY_EXCERPT: usize = 512;

#[derive(Clone, Debug)]
pub struct RemoteConfig {
    /// Base URL; `/chat/completions` is appended.
    pub base_url: String,
    pub api_key: Option<String>,
    pub system_prompt: Option<String>,
    pub retries: u32,
    pub backoff_base: Duration,
    pub timeout: Duration,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            base_url: DEFAULT_BASE_URL.into(),
            api_key: None,
            system_prompt: None,
            retries: DEFAULT_RETRIES,
            backoff_base: Duration::from_secs(1),
            timeout: Duration::from_secs(120),
        }
    }
}

pub struct RemoteBackend {
    config: RemoteConfig,
    url: String,
    client: reqwest::blocking::Client,
}

/// Pull `choices[0].message.content` out of a response body.
pub fn parse_chat_response(body: &str) -> Result<String, BackendError> {
    let v: Value = serde_json::from_str(body).map_err(|e| BackendError::BadResponse(e.to_string()))?;
    v.get("choices")
        .and_then(|c| c.get(0))
        .and_then(|c| c.get("message"))
        .and_then(|m| m.get("content"))
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| BackendError::BadResponse("no choices[0].message.content string".into()))
}

fn excerpt(body: &str) -> String {
    match body.char_indices().nth(BODY_EXCERPT) {
        Some((at, _)) => format!("{}...", &body[..at]),
        None => body.to_string(),
    }
}

enum Attempt {
    Done(Result<String, BackendError>),
    Retry(BackendError),
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Result<Self, BackendError> {
        if !(config.base_url.starts_with("http://") || config.base_url.starts_with("https://")) {
            return Err(BackendError::Config(format!("base URL must be http(s): {}", config.base_url)));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| BackendError::Config(e.to_string()))?;
        let url = format!("{}/chat/completions", config.base_url.trim_end_matches('/'));
        Ok(RemoteBackend { config, url, client })
    }

    pub fn request_body(&self, req: &CompletionRequest) -> Value {
        let mut messages = Vec::new();
        if let Some(sys) = &self.config.system_prompt {
            messages.push(json!({"role": "system", "content": sys}));
        }
        messages.push(json!({"role": "user", "content": req.prompt_text}));
        let mut body = json!({
            "model": req.model_id,
            "messages": messages,
            "temperature": req.temperature,
            "max_tokens": req.max_output_tokens,
        });
        if !req.stop_sequences.is_empty() {
            body["stop"] = json!(req.stop_sequences);
        }
        body
    }

    fn attempt(&self, body: &Value) -> Attempt {
        let mut call = self.client.post(&self.url).json(body);
        if let Some(key) = &self.config.api_key {
            call = call.bearer_auth(key);
        }
        let resp = match call.send() {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(BackendError::Transport { attempts: 0, message: e.to_string() }),
        };
        let status = resp.status();
        let text = match resp.text() {
            Ok(t) => t,
            Err(e) => return Attempt::Retry(BackendError::Transport { attempts: 0, message: e.to_string() }),
        };
        if status.is_success() {
            return Attempt::Done(parse_chat_response(&text));
        }
        let err = BackendError::Api { status: status.as_u16(), body: excerpt(&text) };
        if status.is_server_error() || status.as_u16() == 429 {
            Attempt::Retry(err)
        } else {
            Attempt::Done(Err(err))
        }
    }

    fn backoff(&self, attempt: u32) -> Duration {
        let jitter: f64 = rand::rng().random_range(0.5..1.5);
        self.config.backoff_base.mul_f64(2f64.powi(attempt as i32) * jitter)
    }
}

impl CompletionBackend for RemoteBackend {
    fn id(&self) -> String {
        "chat-completions".into()
    }

    fn call(&self, req: &CompletionRequest, _: &str) -> Result<Completion, BackendError> {
        let body = self.request_body(req);
        let attempts = self.config.retries + 1;
        let mut last = None;
        for i in 0..attempts {
            if i > 0 {
                std::thread::sleep(self.backoff(i - 1));
            }
            match self.attempt(&body) {
                Attempt::Done(r) => return r.map(|text| Completion { text, latency_ms: None }),
                Attempt::Retry(e) => {
                    log::warn!("attempt {} of {attempts} failed: {e}", i + 1);
                    last = Some(e);
                }
            }
        }
        Err(match last.expect("at least one attempt") {
            BackendError::Transport { message, .. } => BackendError::Transport { attempts, message },
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_content() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"int a = 1;"}}]}"#;
        assert_eq!(parse_chat_response(body).unwrap(), "int a = 1;");
        assert!(parse_chat_response(r#"{"choices":[]}"#).is_err());
        assert!(parse_chat_response("nope").is_err());
    }

    #[test]
    fn body_shape() {
        let b = RemoteBackend::new(RemoteConfig { system_prompt: Some("sys".into()), ..Default::default() }).unwrap();
        let mut r = CompletionRequest::new("fix", "gpt", super::super::RequestTag { instance_id: "i".into(), kind: None });
        r.stop_sequences = vec!["<END>".into()];
        let v = b.request_body(&r);
        assert_eq!(v["messages"][0]["role"], "system");
        assert_eq!(v["messages"][1]["content"], "fix");
        assert_eq!(v["max_tokens"], 1024);
        assert_eq!(v["stop"][0], "<END>");
        let plain = RemoteBackend::new(RemoteConfig::default()).unwrap();
        assert_eq!(plain.request_body(&r)["messages"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn rejects_non_http_url() {
        assert!(RemoteBackend::new(RemoteConfig { base_url: "ftp://x".into(), ..Default::default() }).is_err());
    }

    #[test]
    fn excerpt_truncates_on_char_boundary() {
        let long = "é".repeat(600);
        assert!(excerpt(&long).ends_with("..."));
        assert_eq!(excerpt("short"), "short");
    }
}
