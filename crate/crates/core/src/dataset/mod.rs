//! Baseline and enhanced chat-format training corpora.

mod filter;
mod jsonl;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::artifacts::{ArtifactBundle, Smt2Sort};
use crate::frontend::{parse_checked, pretty_print};
use crate::symexec::{explore, ExplorationLimits};
use crate::transforms::{apply, TransformConfig, TransformKind};

pub use filter::{estimate_tokens, filter_path_explosion, filter_token_budget, DropReason, FilterReport};
pub use jsonl::{read_jsonl, write_jsonl, JSONL_META_SUFFIX};

pub const BASELINE_SYSTEM: &str =
    "You are an expert deobfuscation assistant. Output only valid C code.";
pub const ENHANCED_SYSTEM: &str =
    "You are an expert deobfuscation assistant. Use the provided artifacts when available.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Baseline,
    Enhanced,
}

impl Condition {
    pub const ALL: [Condition; 2] = [Condition::Baseline, Condition::Enhanced];

    pub fn tag(self) -> &'static str {
        match self {
            Condition::Baseline => "baseline",
            Condition::Enhanced => "enhanced",
        }
    }

    pub fn system_text(self) -> &'static str {
        match self {
            Condition::Baseline => BASELINE_SYSTEM,
            Condition::Enhanced => ENHANCED_SYSTEM,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Condition {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Condition::Baseline),
            "enhanced" => Ok(Condition::Enhanced),
            _ => Err(DatasetError::UnknownCondition(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub messages: Vec<Message>,
    pub condition: Condition,
    pub kind: TransformKind,
    pub program_id: String,
}

impl TrainingRecord {
    pub fn content(&self, role: Role) -> Option<&str> {
        self.messages
            .iter()
            .find(|m| m.role == role)
            .map(|m| m.content.as_str())
    }

    /// The obfuscated code embedded in the user message.
    pub fn obfuscated_code(&self) -> Option<&str> {
        let user = self.content(Role::User)?;
        let code = user.strip_prefix(USER_PREFIX)?;
        Some(match code.find(ARTIFACT_HEADER) {
            Some(end) => &code[..end],
            None => code,
        })
    }
}

const USER_PREFIX: &str = "Obfuscated Code:\n";
const ARTIFACT_HEADER: &str = "\n\nKLEE Artifacts:\n";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub program_id: String,
    pub entry: String,
    pub original: String,
    pub variants: BTreeMap<TransformKind, String>,
    /// Artifacts of the original program; absent when exploration hit a limit.
    pub bundle: Option<ArtifactBundle>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{program_id}: {message}")]
    InvalidProgram { program_id: String, message: String },
    #[error("{program_id}: no {kind} variant")]
    MissingVariant {
        program_id: String,
        kind: TransformKind,
    },
    #[error("{0}: enhanced records need symbolic-execution artifacts")]
    MissingBundle(String),
    #[error("unknown condition `{0}` (expected baseline or enhanced)")]
    UnknownCondition(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },
}

/// Settings for turning source files into corpus entries.
#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    pub transform: TransformConfig,
    pub limits: ExplorationLimits,
    pub smt2_sort: Smt2Sort,
}

impl CorpusEntry {
    /// Obfuscates `original` with every kind and explores it. The entry
    /// point is the last function in the file.
    pub fn build(program_id: &str, original: &str, opts: &BuildOptions) -> Result<CorpusEntry, DatasetError> {
        let invalid = |message: String| DatasetError::InvalidProgram {
            program_id: program_id.to_string(),
            message,
        };
        let unit = parse_checked(program_id, original).map_err(|d| {
            invalid(d.first().map(ToString::to_string).unwrap_or_default())
        })?;
        let entry = unit
            .functions
            .last()
            .ok_or_else(|| invalid("no functions".to_string()))?
            .name
            .clone();
        let mut variants = BTreeMap::new();
        for kind in TransformKind::ALL {
            let result = apply(kind, &unit, &opts.transform).map_err(|e| invalid(e.to_string()))?;
            variants.insert(kind, pretty_print(&result.output));
        }
        let x = explore(&unit, &entry, &opts.limits).map_err(|e| invalid(e.to_string()))?;
        let bundle = (!x.hit_limits(&opts.limits))
            .then(|| ArtifactBundle::from_exploration(program_id, &x, opts.smt2_sort));
        Ok(CorpusEntry {
            program_id: program_id.to_string(),
            entry,
            original: original.to_string(),
            variants,
            bundle,
        })
    }
}

pub fn build_record(
    entry: &CorpusEntry,
    kind: TransformKind,
    condition: Condition,
) -> Result<TrainingRecord, DatasetError> {
    let code = entry
        .variants
        .get(&kind)
        .ok_or_else(|| DatasetError::MissingVariant {
            program_id: entry.program_id.clone(),
            kind,
        })?;
    let mut user = format!("{USER_PREFIX}{code}");
    if condition == Condition::Enhanced {
        let bundle = entry
            .bundle
            .as_ref()
            .ok_or_else(|| DatasetError::MissingBundle(entry.program_id.clone()))?;
        user.push_str(ARTIFACT_HEADER);
        user.push_str(&bundle.prompt_section());
    }
    let message = |role, content: &str| Message {
        role,
        content: content.to_string(),
    };
    Ok(TrainingRecord {
        messages: vec![
            message(Role::System, condition.system_text()),
            message(Role::User, &user),
            message(Role::Assistant, &entry.original),
        ],
        condition,
        kind,
        program_id: entry.program_id.clone(),
    })
}

/// File name of the corpus for one transformation and condition.
pub fn corpus_file_name(kind: TransformKind, condition: Condition) -> String {
    format!("{}_{}.jsonl", kind.tag(), condition.tag())
}

/// Splits program ids into (train, test) with a seeded shuffle. At least one
/// program goes to the test side when `fraction > 0` and there are two or more.
pub fn split_programs(ids: &[String], fraction: f64, seed: u64) -> (Vec<String>, Vec<String>) {
    let mut sorted = ids.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut n_test = (sorted.len() as f64 * fraction.clamp(0.0, 1.0)).round() as usize;
    if fraction > 0.0 && n_test == 0 && sorted.len() >= 2 {
        n_test = 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sorted.shuffle(&mut rng);
    let test = sorted.split_off(sorted.len() - n_test);
    let (mut train, mut test) = (sorted, test);
    train.sort();
    test.sort();
    (train, test)
}
