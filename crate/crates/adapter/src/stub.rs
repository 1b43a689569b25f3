use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use deobbench_core::dataset::{Message, Role, TrainingRecord};

use crate::{CallError, Model};

const USER_PREFIX: &str = "Obfuscated Code:\n";
const ARTIFACT_HEADER: &str = "\n\nKLEE Artifacts:\n";

fn code_of(user: &str) -> &str {
    let code = user.strip_prefix(USER_PREFIX).unwrap_or(user);
    match code.find(ARTIFACT_HEADER) {
        Some(end) => &code[..end],
        None => code,
    }
}

fn fenced(code: &str) -> String {
    if code.is_empty() || code.ends_with('\n') {
        format!("```c\n{code}```\n")
    } else {
        format!("```c\n{code}\n```\n")
    }
}

/// Echoes the record's obfuscated code back in a fenced block.
pub fn stub_identity_model(record: &TrainingRecord) -> String {
    fenced(code_of(record.content(Role::User).unwrap_or_default()))
}

/// [`stub_identity_model`] as a [`Model`], counting concurrent calls.
#[derive(Debug, Default)]
pub struct StubIdentityModel {
    /// Simulated service time per call.
    pub delay: Duration,
    in_flight: AtomicUsize,
    peak: AtomicUsize,
    calls: AtomicUsize,
}

impl StubIdentityModel {
    pub fn new() -> StubIdentityModel {
        StubIdentityModel::default()
    }

    pub fn with_delay(delay: Duration) -> StubIdentityModel {
        StubIdentityModel {
            delay,
            ..StubIdentityModel::default()
        }
    }

    /// Most calls that were ever in progress at once.
    pub fn peak_in_flight(&self) -> usize {
        self.peak.load(Ordering::SeqCst)
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Model for StubIdentityModel {
    fn name(&self) -> &str {
        "stub-identity"
    }

    fn complete(&self, messages: &[Message]) -> Result<String, CallError> {
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak.fetch_max(now, Ordering::SeqCst);
        self.calls.fetch_add(1, Ordering::SeqCst);
        if !self.delay.is_zero() {
            std::thread::sleep(self.delay);
        }
        let user = messages
            .iter()
            .find(|m| m.role == Role::User)
            .map_or("", |m| m.content.as_str());
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
        Ok(fenced(code_of(user)))
    }

    fn timed(&self) -> bool {
        false
    }
}
