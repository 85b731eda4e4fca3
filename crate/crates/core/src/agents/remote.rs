use std::fmt;
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};

use super::{AgentBackend, BackendError, ChatMessage, Generation, Usage};

fn default_max_tokens() -> u32 {
    2048
}
fn default_timeout_secs() -> f64 {
    120.0
}
fn default_max_attempts() -> u32 {
    5
}
fn default_backoff_ms() -> u64 {
    1000
}
fn default_concurrency() -> usize {
    8
}

/// Connection settings for an OpenAI-compatible chat-completion endpoint.
///
/// The credential itself is never part of the configuration: only the name
/// of the environment variable holding it is stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemoteModelConfig {
    pub model: String,
    /// Base URL; `/chat/completions` is appended.
    pub base_url: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    /// Sampling temperature; omitted from requests when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: f64,
    /// Total attempts per generation, including the first.
    #[serde(default = "default_max_attempts")]
    pub max_attempts: u32,
    /// Backoff before retry k (1-based) is `backoff_base_ms * 2^(k-1)`.
    #[serde(default = "default_backoff_ms")]
    pub backoff_base_ms: u64,
    /// Upper bound on requests in flight across all agents of this model.
    #[serde(default = "default_concurrency")]
    pub max_concurrency: usize,
    /// USD per million prompt tokens.
    #[serde(default)]
    pub input_price_per_mtok: f64,
    /// USD per million completion tokens.
    #[serde(default)]
    pub output_price_per_mtok: f64,
    /// Date the prices were taken from the provider's price list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price_snapshot: Option<String>,
}

impl RemoteModelConfig {
    pub fn new(model: impl Into<String>, base_url: impl Into<String>, api_key_env: impl Into<String>) -> Self {
        RemoteModelConfig {
            model: model.into(),
            base_url: base_url.into(),
            api_key_env: api_key_env.into(),
            temperature: None,
            max_tokens: default_max_tokens(),
            timeout_secs: default_timeout_secs(),
            max_attempts: default_max_attempts(),
            backoff_base_ms: default_backoff_ms(),
            max_concurrency: default_concurrency(),
            input_price_per_mtok: 0.0,
            output_price_per_mtok: 0.0,
            price_snapshot: None,
        }
    }

    pub fn cost(&self, prompt_tokens: u64, completion_tokens: u64) -> f64 {
        (prompt_tokens as f64 * self.input_price_per_mtok + completion_tokens as f64 * self.output_price_per_mtok) / 1e6
    }
}

/// Counting semaphore bounding concurrent requests.
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a Gate);

impl Gate {
    fn new(n: usize) -> Self {
        Gate {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

/// State shared by all agents talking to one model.
pub(crate) struct RemoteShared {
    cfg: RemoteModelConfig,
    api_key: String,
    client: Client,
    gate: Gate,
}

impl fmt::Debug for RemoteShared {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RemoteShared")
            .field("cfg", &self.cfg)
            .field("api_key", &"<redacted>")
            .finish()
    }
}

impl RemoteShared {
    pub(crate) fn connect(cfg: RemoteModelConfig) -> Result<Arc<Self>, BackendError> {
        let api_key = std::env::var(&cfg.api_key_env).map_err(|_| {
            BackendError::Config(format!("environment variable {} is not set", cfg.api_key_env))
        })?;
        if !(cfg.timeout_secs > 0.0) {
            return Err(BackendError::Config("timeout_secs must be positive".into()));
        }
        let client = Client::builder()
            .timeout(Duration::from_secs_f64(cfg.timeout_secs))
            .build()
            .map_err(|e| BackendError::Config(e.to_string()))?;
        Ok(Arc::new(RemoteShared {
            gate: Gate::new(cfg.max_concurrency),
            cfg,
            api_key,
            client,
        }))
    }

    pub(crate) fn config(&self) -> &RemoteModelConfig {
        &self.cfg
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    #[serde(skip_serializing_if = "Option::is_none")]
    temperature: Option<f64>,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<TokenUsage>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct TokenUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

enum Attempt {
    Done(String, u64, u64),
    Retry(String),
    Fatal(String),
}

/// Chat-completion backend. The history is sent as-is (role-tagged list);
/// the adapter only reads it.
#[derive(Debug, Clone)]
pub struct RemoteAgent {
    shared: Arc<RemoteShared>,
}

impl RemoteAgent {
    pub(crate) fn from_shared(shared: Arc<RemoteShared>) -> Self {
        RemoteAgent { shared }
    }

    fn attempt(&self, history: &[ChatMessage]) -> Attempt {
        let cfg = &self.shared.cfg;
        let url = format!("{}/chat/completions", cfg.base_url.trim_end_matches('/'));
        let body = CompletionRequest {
            model: &cfg.model,
            messages: history,
            temperature: cfg.temperature,
            max_tokens: cfg.max_tokens,
        };
        let response = {
            let _permit = self.shared.gate.acquire();
            self.shared
                .client
                .post(&url)
                .bearer_auth(&self.shared.api_key)
                .json(&body)
                .send()
        };
        let response = match response {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(format!("request failed: {}", e.without_url())),
        };
        let status = response.status();
        if status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error() {
            return Attempt::Retry(format!("HTTP {status}"));
        }
        if !status.is_success() {
            return Attempt::Fatal(format!("HTTP {status}"));
        }
        match response.json::<CompletionResponse>() {
            Ok(parsed) => {
                let text = parsed
                    .choices
                    .into_iter()
                    .next()
                    .and_then(|c| c.message.content)
                    .unwrap_or_default();
                let (p, c) = parsed
                    .usage
                    .map_or((0, 0), |u| (u.prompt_tokens, u.completion_tokens));
                Attempt::Done(text, p, c)
            }
            Err(e) => Attempt::Retry(format!("malformed response body: {}", e.without_url())),
        }
    }
}

pub fn remote_model_agent(cfg: RemoteModelConfig) -> Result<RemoteAgent, BackendError> {
    Ok(RemoteAgent::from_shared(RemoteShared::connect(cfg)?))
}

impl AgentBackend for RemoteAgent {
    fn generate(&self, history: &[ChatMessage]) -> Result<Generation, BackendError> {
        let cfg = &self.shared.cfg;
        let attempts = cfg.max_attempts.max(1);
        let mut last_error = String::new();
        for k in 0..attempts {
            if k > 0 {
                let delay = cfg.backoff_base_ms.saturating_mul(1 << (k - 1).min(20));
                log::warn!("{}: retry {k} after {last_error}; backing off {delay} ms", cfg.model);
                thread::sleep(Duration::from_millis(delay));
            }
            match self.attempt(history) {
                Attempt::Done(text, prompt_tokens, completion_tokens) => {
                    let usage = Usage {
                        requests: u64::from(k + 1),
                        prompt_tokens,
                        completion_tokens,
                        transport_retries: u64::from(k),
                        cost_usd: cfg.cost(prompt_tokens, completion_tokens),
                    };
                    return Ok(Generation { text, usage });
                }
                Attempt::Retry(msg) => last_error = msg,
                Attempt::Fatal(msg) => {
                    return Err(BackendError::Transport {
                        attempts: k + 1,
                        message: msg,
                    })
                }
            }
        }
        Err(BackendError::Transport {
            attempts,
            message: last_error,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_uses_per_million_prices() {
        let mut cfg = RemoteModelConfig::new("m", "http://localhost", "X");
        cfg.input_price_per_mtok = 2.0;
        cfg.output_price_per_mtok = 10.0;
        assert!((cfg.cost(1_000_000, 500_000) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn missing_credential_is_a_startup_error() {
        let cfg = RemoteModelConfig::new("m", "http://localhost", "MESHBENCH_TEST_UNSET_KEY_VARIABLE");
        assert!(matches!(remote_model_agent(cfg), Err(BackendError::Config(_))));
    }

    #[test]
    fn config_holds_no_secret() {
        let cfg = RemoteModelConfig::new("m", "http://localhost", "KEY_VAR");
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains("KEY_VAR"));
        assert!(!json.contains("temperature"));
    }

    #[test]
    fn gate_bounds_permits() {
        let gate = Gate::new(2);
        let a = gate.acquire();
        let _b = gate.acquire();
        assert_eq!(*gate.free.lock().unwrap(), 0);
        drop(a);
        assert_eq!(*gate.free.lock().unwrap(), 1);
    }
}
