use std::path::{Path, PathBuf};
use std::time::Duration;

use deobbench_adapter::{EndpointConfig, Secret, DEFAULT_API_KEY_ENV};
use deobbench_core::artifacts::Smt2Sort;
use deobbench_core::dataset::{BuildOptions, Condition};
use deobbench_core::symexec::ExplorationLimits;
use deobbench_core::transforms::{TransformConfig, TransformKind};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Everything a run depends on. Written next to the outputs as
/// `manifest.toml`, and accepted back through `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunManifest {
    pub corpus: PathBuf,
    pub out: PathBuf,
    pub kinds: Vec<TransformKind>,
    pub conditions: Vec<Condition>,
    pub seed: u64,
    pub jobs: usize,
    /// Estimated tokens allowed per rendered record.
    pub token_budget: usize,
    /// Share of programs held out for inference; 0 runs inference on all.
    pub test_fraction: f64,
    pub smt2_int_sort: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compiler_cmd: Option<String>,
    /// Free-form run label. Never filled in automatically.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub transform: TransformOptions,
    pub limits: ExplorationLimits,
    pub model: ModelSpec,
}

impl Default for RunManifest {
    fn default() -> Self {
        RunManifest {
            corpus: PathBuf::from("corpus"),
            out: PathBuf::from("deobbench-run"),
            kinds: TransformKind::ALL.to_vec(),
            conditions: Condition::ALL.to_vec(),
            seed: 0,
            jobs: 4,
            token_budget: 128_000,
            test_fraction: 0.0,
            smt2_int_sort: false,
            compiler_cmd: None,
            timestamp: None,
            transform: TransformOptions::default(),
            limits: ExplorationLimits::default(),
            model: ModelSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformOptions {
    pub opaque_pool_size: usize,
    pub ae_intensity: f64,
    pub paper_fidelity: bool,
}

impl Default for TransformOptions {
    fn default() -> Self {
        let d = TransformConfig::default();
        TransformOptions {
            opaque_pool_size: d.opaque_pool_size,
            ae_intensity: d.ae_intensity,
            paper_fidelity: d.paper_fidelity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provider {
    Stub,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    pub provider: Provider,
    /// Sent as `model` in requests and used in report condition labels.
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    pub auth_header: String,
    /// `{key}` is replaced by the key.
    pub auth_value: String,
    pub timeout_secs: u64,
    pub max_retries: u32,
    pub backoff_ms: u64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            provider: Provider::Stub,
            name: "stub-identity".to_string(),
            endpoint: None,
            api_key_env: DEFAULT_API_KEY_ENV.to_string(),
            auth_header: "Authorization".to_string(),
            auth_value: "Bearer {key}".to_string(),
            timeout_secs: 60,
            max_retries: 3,
            backoff_ms: 500,
        }
    }
}

impl ModelSpec {
    pub fn endpoint_config(&self, max_concurrency: usize) -> Result<EndpointConfig, CliError> {
        let url = self
            .endpoint
            .as_deref()
            .ok_or_else(|| CliError::Usage("an HTTP model needs an endpoint URL".to_string()))?;
        let mut cfg = EndpointConfig::new(url, &self.name);
        cfg.api_key = Secret::from_env(&self.api_key_env);
        if cfg.api_key.is_none() {
            log::warn!("{} is not set; sending requests without credentials", self.api_key_env);
        }
        cfg.auth_header = (self.auth_header.clone(), self.auth_value.clone());
        cfg.timeout = Duration::from_secs(self.timeout_secs);
        cfg.max_concurrency = max_concurrency.max(1);
        cfg.max_retries = self.max_retries;
        cfg.initial_backoff = Duration::from_millis(self.backoff_ms);
        Ok(cfg)
    }
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<RunManifest, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: &str| Err(CliError::Usage(m.to_string()));
        if self.jobs == 0 {
            return usage("jobs must be at least 1");
        }
        if self.kinds.is_empty() || self.conditions.is_empty() {
            return usage("select at least one transformation and one condition");
        }
        if !(0.0..1.0).contains(&self.test_fraction) {
            return usage("test fraction must be in [0, 1)");
        }
        self.limits
            .validate()
            .map_err(|e| CliError::Usage(format!("limits: {e}")))
    }

    pub fn transform_config(&self) -> TransformConfig {
        TransformConfig {
            seed: self.seed,
            opaque_pool_size: self.transform.opaque_pool_size,
            ae_intensity: self.transform.ae_intensity,
            paper_fidelity: self.transform.paper_fidelity,
        }
    }

    pub fn smt2_sort(&self) -> Smt2Sort {
        if self.smt2_int_sort {
            Smt2Sort::Int
        } else {
            Smt2Sort::BitVec
        }
    }

    pub fn build_options(&self) -> BuildOptions {
        BuildOptions {
            transform: self.transform_config(),
            limits: self.limits.clone(),
            smt2_sort: self.smt2_sort(),
        }
    }
}
