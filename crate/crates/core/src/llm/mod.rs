//! Chat-completion clients: a scripted deterministic mock and an HTTP backend.

mod http;
mod mock;

use std::time::Duration;

use thiserror::Error;

pub use http::{HttpClient, HttpConfig, ReqwestTransport, Transport, TransportResponse};
pub use mock::{MockClient, MockRule, MockScript};

pub const ENV_API_KEY: &str = "EXPSUM_API_KEY";
pub const ENV_API_BASE: &str = "EXPSUM_API_BASE";
pub const ENV_MODEL: &str = "EXPSUM_MODEL";

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ClientError {
    #[error("network error: {0}")]
    Network(String),
    #[error("endpoint returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed payload: {0}")]
    Malformed(String),
    #[error("no mock rule matched the prompt")]
    NoMockRule,
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

impl ClientError {
    pub fn is_network(&self) -> bool {
        matches!(self, ClientError::Network(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlmRequest {
    pub system_prompt: String,
    pub user_prompt: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl LlmRequest {
    pub const DEFAULT_MAX_TOKENS: u32 = 512;

    /// Greedy decoding (temperature 0) request.
    pub fn new(
        system_prompt: impl Into<String>,
        user_prompt: impl Into<String>,
    ) -> Result<Self, ClientError> {
        let req = LlmRequest {
            system_prompt: system_prompt.into(),
            user_prompt: user_prompt.into(),
            temperature: 0.0,
            max_tokens: Self::DEFAULT_MAX_TOKENS,
        };
        req.validate()?;
        Ok(req)
    }

    pub fn with_temperature(mut self, temperature: f64) -> Result<Self, ClientError> {
        self.temperature = temperature;
        self.validate()?;
        Ok(self)
    }

    pub fn with_max_tokens(mut self, max_tokens: u32) -> Self {
        self.max_tokens = max_tokens;
        self
    }

    pub fn validate(&self) -> Result<(), ClientError> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(ClientError::InvalidRequest(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if self.system_prompt.trim().is_empty() || self.user_prompt.trim().is_empty() {
            return Err(ClientError::InvalidRequest("prompts must be non-empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlmResponse {
    pub text: String,
    pub backend_id: String,
    pub latency: Duration,
}

pub trait LlmClient: Send + Sync {
    fn backend_id(&self) -> &str;

    fn complete(&self, req: &LlmRequest) -> Result<LlmResponse, ClientError>;
}

impl<C: LlmClient + ?Sized> LlmClient for std::sync::Arc<C> {
    fn backend_id(&self) -> &str {
        (**self).backend_id()
    }

    fn complete(&self, req: &LlmRequest) -> Result<LlmResponse, ClientError> {
        (**self).complete(req)
    }
}
