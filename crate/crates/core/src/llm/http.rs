use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::{ClientError, LlmClient, LlmRequest, LlmResponse, ENV_API_BASE, ENV_API_KEY, ENV_MODEL};

#[derive(Debug, Clone, PartialEq)]
pub struct HttpConfig {
    /// Base URL; `/chat/completions` is appended.
    pub api_base: String,
    pub model: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
    /// Extra attempts after a network failure.
    pub retries: u32,
    pub backoff: Duration,
    pub max_in_flight: usize,
}

impl HttpConfig {
    pub fn new(api_base: impl Into<String>, model: impl Into<String>) -> Self {
        HttpConfig {
            api_base: api_base.into(),
            model: model.into(),
            api_key: None,
            timeout: Duration::from_secs(120),
            retries: 2,
            backoff: Duration::from_millis(500),
            max_in_flight: 4,
        }
    }

    /// Build from `EXPSUM_API_BASE` / `EXPSUM_MODEL` / `EXPSUM_API_KEY`, if a base URL is set.
    pub fn from_env() -> Option<Self> {
        let base = std::env::var(ENV_API_BASE).ok().filter(|s| !s.is_empty())?;
        let model = std::env::var(ENV_MODEL).unwrap_or_default();
        let mut cfg = HttpConfig::new(base, model);
        cfg.api_key = std::env::var(ENV_API_KEY).ok().filter(|s| !s.is_empty());
        Some(cfg)
    }

    pub fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.api_base.trim_end_matches('/'))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportResponse {
    pub status: u16,
    pub body: String,
}

/// Moves one JSON POST over the wire. `Err` means the request never got an HTTP response.
pub trait Transport: Send + Sync {
    fn post_json(
        &self,
        url: &str,
        bearer: Option<&str>,
        body: &str,
        timeout: Duration,
    ) -> Result<TransportResponse, String>;
}

pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new() -> Result<Self, ClientError> {
        let client = reqwest::blocking::Client::builder()
            .build()
            .map_err(|e| ClientError::Network(e.to_string()))?;
        Ok(ReqwestTransport { client })
    }
}

impl Transport for ReqwestTransport {
    fn post_json(
        &self,
        url: &str,
        bearer: Option<&str>,
        body: &str,
        timeout: Duration,
    ) -> Result<TransportResponse, String> {
        let mut req = self
            .client
            .post(url)
            .timeout(timeout)
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(body.to_string());
        if let Some(key) = bearer {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| e.to_string())?;
        let status = resp.status().as_u16();
        let body = resp.text().map_err(|e| e.to_string())?;
        Ok(TransportResponse { status, body })
    }
}

/// Counting gate bounding concurrent in-flight requests.
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'g>(&'g Gate);

impl Gate {
    fn new(limit: usize) -> Self {
        Gate {
            free: Mutex::new(limit.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().expect("gate poisoned");
        while *free == 0 {
            free = self.cv.wait(free).expect("gate poisoned");
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("gate poisoned") += 1;
        self.0.cv.notify_one();
    }
}

pub struct HttpClient<T: Transport = ReqwestTransport> {
    config: HttpConfig,
    transport: T,
    gate: Gate,
    id: String,
}

impl HttpClient<ReqwestTransport> {
    pub fn new(config: HttpConfig) -> Result<Self, ClientError> {
        Ok(Self::with_transport(config, ReqwestTransport::new()?))
    }
}

impl<T: Transport> HttpClient<T> {
    pub fn with_transport(config: HttpConfig, transport: T) -> Self {
        let id = format!("http:{}", config.model);
        HttpClient {
            gate: Gate::new(config.max_in_flight),
            config,
            transport,
            id,
        }
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    /// The chat-completion JSON body for `req`.
    pub fn payload(&self, req: &LlmRequest) -> Value {
        json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": req.system_prompt},
                {"role": "user", "content": req.user_prompt},
            ],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        })
    }

    fn send_once(&self, url: &str, body: &str) -> Result<String, ClientError> {
        let _permit = self.gate.acquire();
        let resp = self
            .transport
            .post_json(url, self.config.api_key.as_deref(), body, self.config.timeout)
            .map_err(ClientError::Network)?;
        if !(200..300).contains(&resp.status) {
            return Err(ClientError::Status {
                status: resp.status,
                body: resp.body,
            });
        }
        first_choice_text(&resp.body)
    }
}

fn first_choice_text(body: &str) -> Result<String, ClientError> {
    let v: Value =
        serde_json::from_str(body).map_err(|e| ClientError::Malformed(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| ClientError::Malformed("missing choices[0].message.content".into()))
}

impl<T: Transport> LlmClient for HttpClient<T> {
    fn backend_id(&self) -> &str {
        &self.id
    }

    fn complete(&self, req: &LlmRequest) -> Result<LlmResponse, ClientError> {
        req.validate()?;
        let url = self.config.endpoint();
        let body = self.payload(req).to_string();
        let start = Instant::now();
        let mut attempt = 0;
        loop {
            match self.send_once(&url, &body) {
                Ok(text) => {
                    return Ok(LlmResponse {
                        text,
                        backend_id: self.id.clone(),
                        latency: start.elapsed(),
                    })
                }
                Err(e) if e.is_network() && attempt < self.config.retries => {
                    log::warn!("llm request failed ({e}); retry {} of {}", attempt + 1, self.config.retries);
                    std::thread::sleep(self.config.backoff * 2u32.pow(attempt));
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}
