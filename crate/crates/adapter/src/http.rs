use deobbench_core::dataset::Message;
use serde::{Deserialize, Serialize};
use ureq::Agent;

use crate::{CallError, EndpointConfig, Model};

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: &'a [Message],
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

/// A chat-completions endpoint reached over HTTP.
pub struct HttpModel {
    cfg: EndpointConfig,
    url: String,
    agent: Agent,
}

impl HttpModel {
    pub fn new(cfg: EndpointConfig) -> HttpModel {
        let base = cfg.base_url.trim_end_matches('/');
        let url = if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        };
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(cfg.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpModel { cfg, url, agent }
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.cfg
    }
}

impl Model for HttpModel {
    fn name(&self) -> &str {
        &self.cfg.model_name
    }

    fn complete(&self, messages: &[Message]) -> Result<String, CallError> {
        let body = ChatRequest {
            model: &self.cfg.model_name,
            messages,
        };
        let mut request = self.agent.post(&self.url);
        if let Some(key) = &self.cfg.api_key {
            let (name, template) = &self.cfg.auth_header;
            request = request.header(name, &template.replace("{key}", key.expose()));
        }
        log::debug!("POST {} ({} messages)", self.url, messages.len());
        let mut response = request
            .send_json(&body)
            .map_err(|e| CallError::Transient(e.to_string()))?;
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| CallError::Transient(e.to_string()))?;
        match status {
            200..=299 => {
                let parsed: ChatResponse = serde_json::from_str(&text)
                    .map_err(|e| CallError::Fatal(format!("unexpected response body: {e}")))?;
                parsed
                    .choices
                    .into_iter()
                    .next()
                    .map(|c| c.message.content)
                    .ok_or_else(|| CallError::Fatal("response has no choices".to_string()))
            }
            429 | 500..=599 => Err(CallError::Transient(format!("HTTP {status}"))),
            _ => Err(CallError::Fatal(format!("HTTP {status}"))),
        }
    }
}
