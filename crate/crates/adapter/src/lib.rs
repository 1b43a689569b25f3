//! Sends deobfuscation prompts to a chat-completions endpoint and pulls the
//! candidate program out of the reply.

mod extract;
mod http;
mod stub;

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use deobbench_core::dataset::{Condition, Message, Role, TrainingRecord};
use deobbench_core::transforms::TransformKind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use extract::extract_code;
pub use http::HttpModel;
pub use stub::{stub_identity_model, StubIdentityModel};

/// A credential that never shows up in `Debug` output or serialized data.
#[derive(Clone, Default)]
pub struct Secret(String);

impl Secret {
    pub fn new(value: impl Into<String>) -> Secret {
        Secret(value.into())
    }

    pub fn from_env(var: &str) -> Option<Secret> {
        std::env::var(var).ok().filter(|v| !v.is_empty()).map(Secret)
    }

    pub fn expose(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Secret(***)")
    }
}

pub const DEFAULT_API_KEY_ENV: &str = "DEOBBENCH_API_KEY";

#[derive(Debug, Clone)]
pub struct EndpointConfig {
    pub base_url: String,
    pub model_name: String,
    pub api_key: Option<Secret>,
    /// Header sent with the key; `{key}` in the value is replaced by it.
    pub auth_header: (String, String),
    pub timeout: Duration,
    pub max_concurrency: usize,
    pub max_retries: u32,
    /// Delay before the first retry; doubles after each further failure.
    pub initial_backoff: Duration,
}

impl EndpointConfig {
    pub fn new(base_url: &str, model_name: &str) -> EndpointConfig {
        EndpointConfig {
            base_url: base_url.to_string(),
            model_name: model_name.to_string(),
            api_key: None,
            auth_header: ("Authorization".to_string(), "Bearer {key}".to_string()),
            timeout: Duration::from_secs(60),
            max_concurrency: 4,
            max_retries: 3,
            initial_backoff: Duration::from_millis(500),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CallError {
    /// Worth retrying: transport failures, 429 and 5xx responses.
    #[error("transient: {0}")]
    Transient(String),
    #[error("{0}")]
    Fatal(String),
}

/// Anything that can answer a system + user prompt.
pub trait Model: Sync {
    fn name(&self) -> &str;

    fn complete(&self, messages: &[Message]) -> Result<String, CallError>;

    /// Whether wall-clock latency is meaningful; test doubles report 0 so
    /// that their results are reproducible.
    fn timed(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub program_id: String,
    pub kind: TransformKind,
    pub condition: Condition,
    pub model: String,
    pub raw_response: String,
    pub extracted_code: Option<String>,
    pub latency_ms: u64,
    pub attempts: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub initial_backoff: Duration,
}

impl From<&EndpointConfig> for RetryPolicy {
    fn from(cfg: &EndpointConfig) -> Self {
        RetryPolicy {
            max_retries: cfg.max_retries,
            initial_backoff: cfg.initial_backoff,
        }
    }
}

/// The prompt part of a record: everything except the assistant turn.
pub fn prompt_messages(record: &TrainingRecord) -> Vec<Message> {
    record
        .messages
        .iter()
        .filter(|m| m.role != Role::Assistant)
        .cloned()
        .collect()
}

/// Runs one record, retrying transient failures with exponential backoff.
pub fn infer(record: &TrainingRecord, model: &dyn Model, retry: RetryPolicy) -> InferenceResult {
    let messages = prompt_messages(record);
    let start = Instant::now();
    let mut attempts = 0;
    let mut delay = retry.initial_backoff;
    let outcome = loop {
        attempts += 1;
        match model.complete(&messages) {
            Ok(text) => break Ok(text),
            Err(CallError::Transient(e)) if attempts <= retry.max_retries => {
                log::warn!(
                    "{} {}: attempt {attempts} failed ({e}), retrying in {delay:?}",
                    record.program_id,
                    record.kind
                );
                std::thread::sleep(delay);
                delay = delay.saturating_mul(2);
            }
            Err(e) => break Err(e),
        }
    };
    let latency_ms = if model.timed() {
        start.elapsed().as_millis() as u64
    } else {
        0
    };
    let (raw_response, error) = match outcome {
        Ok(text) => (text, None),
        Err(e) => (String::new(), Some(e.to_string())),
    };
    InferenceResult {
        program_id: record.program_id.clone(),
        kind: record.kind,
        condition: record.condition,
        model: model.name().to_string(),
        extracted_code: error.is_none().then(|| extract_code(&raw_response)).flatten(),
        raw_response,
        latency_ms,
        attempts,
        error,
    }
}

/// Runs every record with at most `max_concurrency` calls in flight.
/// Results come back in input order.
pub fn infer_all(
    records: &[TrainingRecord],
    model: &dyn Model,
    retry: RetryPolicy,
    max_concurrency: usize,
) -> Vec<InferenceResult> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<InferenceResult>>> = records.iter().map(|_| Mutex::new(None)).collect();
    let workers = max_concurrency.max(1).min(records.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(record) = records.get(i) else { break };
                let result = infer(record, model, retry);
                *slots[i].lock().expect("result slot") = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("result slot").expect("every record ran"))
        .collect()
}
