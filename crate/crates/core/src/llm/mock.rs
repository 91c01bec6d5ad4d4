use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use regex::Regex;
use serde::Deserialize;

use super::{ClientError, LlmClient, LlmRequest, LlmResponse};

#[derive(Debug, Clone)]
enum Matcher {
    Substring(String),
    Pattern(Regex),
}

#[derive(Debug, Clone)]
pub struct MockRule {
    matcher: Matcher,
    response: String,
}

impl MockRule {
    pub fn substring(needle: impl Into<String>, response: impl Into<String>) -> Self {
        MockRule {
            matcher: Matcher::Substring(needle.into()),
            response: response.into(),
        }
    }

    pub fn pattern(pattern: &str, response: impl Into<String>) -> Result<Self, regex::Error> {
        Ok(MockRule {
            matcher: Matcher::Pattern(Regex::new(pattern)?),
            response: response.into(),
        })
    }

    fn matches(&self, prompt: &str) -> bool {
        match &self.matcher {
            Matcher::Substring(s) => prompt.contains(s.as_str()),
            Matcher::Pattern(re) => re.is_match(prompt),
        }
    }
}

/// Ordered response rules over the user prompt; the first match wins.
#[derive(Debug, Clone, Default)]
pub struct MockScript {
    pub rules: Vec<MockRule>,
    pub default: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    #[serde(rename = "match")]
    substring: Option<String>,
    pattern: Option<String>,
    response: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawScript {
    List(Vec<RawRule>),
    Object {
        rules: Vec<RawRule>,
        #[serde(default)]
        default: Option<String>,
    },
}

impl MockScript {
    pub fn new(rules: Vec<MockRule>) -> Self {
        MockScript {
            rules,
            default: None,
        }
    }

    pub fn with_default(mut self, response: impl Into<String>) -> Self {
        self.default = Some(response.into());
        self
    }

    pub fn rule(mut self, rule: MockRule) -> Self {
        self.rules.push(rule);
        self
    }

    /// Parse `[{"match"|"pattern": .., "response": ..}]` or `{"rules": [..], "default": ..}`.
    pub fn from_json(text: &str) -> Result<Self, ClientError> {
        let raw: RawScript = serde_json::from_str(text)
            .map_err(|e| ClientError::Malformed(format!("mock script: {e}")))?;
        let (raw_rules, default) = match raw {
            RawScript::List(rules) => (rules, None),
            RawScript::Object { rules, default } => (rules, default),
        };
        let rules = raw_rules
            .into_iter()
            .map(|r| match (r.substring, r.pattern) {
                (Some(s), None) => Ok(MockRule::substring(s, r.response)),
                (None, Some(p)) => MockRule::pattern(&p, r.response)
                    .map_err(|e| ClientError::Malformed(format!("mock pattern: {e}"))),
                _ => Err(ClientError::Malformed(
                    "mock rule needs exactly one of `match` or `pattern`".into(),
                )),
            })
            .collect::<Result<_, _>>()?;
        Ok(MockScript { rules, default })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ClientError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ClientError::Malformed(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn respond(&self, req: &LlmRequest) -> Result<&str, ClientError> {
        self.rules
            .iter()
            .find(|r| r.matches(&req.user_prompt))
            .map(|r| r.response.as_str())
            .or(self.default.as_deref())
            .ok_or(ClientError::NoMockRule)
    }
}

/// Deterministic scripted backend. Optionally records every request it sees.
#[derive(Debug)]
pub struct MockClient {
    script: MockScript,
    log: Option<Mutex<Vec<LlmRequest>>>,
}

impl MockClient {
    pub fn new(script: MockScript) -> Self {
        MockClient { script, log: None }
    }

    pub fn recording(script: MockScript) -> Self {
        MockClient {
            script,
            log: Some(Mutex::new(Vec::new())),
        }
    }

    /// Requests seen so far; empty unless built with [`MockClient::recording`].
    pub fn requests(&self) -> Vec<LlmRequest> {
        self.log
            .as_ref()
            .map(|l| l.lock().expect("log poisoned").clone())
            .unwrap_or_default()
    }
}

impl LlmClient for MockClient {
    fn backend_id(&self) -> &str {
        "mock"
    }

    fn complete(&self, req: &LlmRequest) -> Result<LlmResponse, ClientError> {
        req.validate()?;
        if let Some(log) = &self.log {
            log.lock().expect("log poisoned").push(req.clone());
        }
        let text = self.script.respond(req)?;
        Ok(LlmResponse {
            text: text.to_string(),
            backend_id: "mock".into(),
            latency: Duration::ZERO,
        })
    }
}
