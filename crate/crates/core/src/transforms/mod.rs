//! Seeded, deterministic obfuscating rewrites: control-flow flattening,
//! opaque predicates, arithmetic encoding and branch encoding.

mod arith;
mod branch;
mod cff;
mod names;
mod opaque;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{
    has_errors, parse, render, typecheck, Comment, CommentPlacement, Diagnostic, SourceUnit,
};

pub use opaque::OPAQUE_TEMPLATES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    AE,
    BE,
    CFF,
    OP,
}

impl TransformKind {
    pub const ALL: [TransformKind; 4] = [
        TransformKind::AE,
        TransformKind::BE,
        TransformKind::CFF,
        TransformKind::OP,
    ];

    /// Lowercase tag used in file names and on the command line.
    pub fn tag(self) -> &'static str {
        match self {
            TransformKind::AE => "ae",
            TransformKind::BE => "be",
            TransformKind::CFF => "cff",
            TransformKind::OP => "op",
        }
    }

    /// Name used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            TransformKind::AE => "ARITHMETIC",
            TransformKind::BE => "BRANCH",
            TransformKind::CFF => "FLATTEN",
            TransformKind::OP => "OPAQUE",
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown transformation `{0}` (expected ae, be, cff or op)")]
pub struct UnknownKind(pub String);

impl FromStr for TransformKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ae" | "arithmetic" => Ok(TransformKind::AE),
            "be" | "branch" => Ok(TransformKind::BE),
            "cff" | "flatten" => Ok(TransformKind::CFF),
            "op" | "opaque" => Ok(TransformKind::OP),
            _ => Err(UnknownKind(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformConfig {
    pub seed: u64,
    /// How many templates of [`OPAQUE_TEMPLATES`] are eligible, from the front.
    pub opaque_pool_size: usize,
    /// Fraction of eligible arithmetic sites that get rewritten.
    pub ae_intensity: f64,
    /// Reproduce the published listings instead of the exact encodings.
    pub paper_fidelity: bool,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig {
            seed: 0,
            opaque_pool_size: 2,
            ae_intensity: 1.0,
            paper_fidelity: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RewriteEntry {
    pub site: String,
    pub rule: String,
}

impl RewriteEntry {
    fn new(site: impl Into<String>, rule: impl Into<String>) -> Self {
        RewriteEntry {
            site: site.into(),
            rule: rule.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformResult {
    pub output: SourceUnit,
    pub kind: TransformKind,
    pub seed: u64,
    pub rewrite_log: Vec<RewriteEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("input does not typecheck: {}", first_message(.0))]
    IllTyped(Vec<Diagnostic>),
    #[error("transformation produced an ill-typed program: {}", first_message(.0))]
    Internal(Vec<Diagnostic>),
}

fn first_message(diags: &[Diagnostic]) -> String {
    diags.first().map(ToString::to_string).unwrap_or_default()
}

/// A trailing comment to attach to the `stmt`-th statement (pre-order) of
/// function `func` in the rewritten unit.
#[derive(Debug, Clone)]
struct Annotation {
    func: usize,
    stmt: usize,
    text: String,
}

/// Output of one rewrite before it is normalized.
struct Rewritten {
    unit: SourceUnit,
    annotations: Vec<Annotation>,
    log: Vec<RewriteEntry>,
}

pub fn apply(
    kind: TransformKind,
    unit: &SourceUnit,
    cfg: &TransformConfig,
) -> Result<TransformResult, TransformError> {
    let diags = typecheck(unit);
    if has_errors(&diags) {
        return Err(TransformError::IllTyped(
            diags.into_iter().filter(Diagnostic::is_error).collect(),
        ));
    }
    let rewritten = match kind {
        TransformKind::AE => arith::encode(unit, cfg),
        TransformKind::BE => branch::encode(unit, cfg),
        TransformKind::CFF => cff::flatten(unit),
        TransformKind::OP => opaque::insert(unit, cfg),
    };
    let output = normalize(rewritten.unit, &rewritten.annotations)?;
    Ok(TransformResult {
        output,
        kind,
        seed: cfg.seed,
        rewrite_log: rewritten.log,
    })
}

pub fn flatten_control_flow(
    unit: &SourceUnit,
    cfg: &TransformConfig,
) -> Result<TransformResult, TransformError> {
    apply(TransformKind::CFF, unit, cfg)
}

pub fn insert_opaque_predicates(
    unit: &SourceUnit,
    cfg: &TransformConfig,
) -> Result<TransformResult, TransformError> {
    apply(TransformKind::OP, unit, cfg)
}

pub fn encode_arithmetic(
    unit: &SourceUnit,
    cfg: &TransformConfig,
) -> Result<TransformResult, TransformError> {
    apply(TransformKind::AE, unit, cfg)
}

pub fn encode_branches(
    unit: &SourceUnit,
    cfg: &TransformConfig,
) -> Result<TransformResult, TransformError> {
    apply(TransformKind::BE, unit, cfg)
}

/// Attaches annotations, prints, and reparses so comment placement and
/// line maps match the canonical text exactly.
fn normalize(mut unit: SourceUnit, annotations: &[Annotation]) -> Result<SourceUnit, TransformError> {
    unit.comments.clear();
    unit.lines = Default::default();
    let (_, layout) = render(&unit);
    for a in annotations {
        let Some(&line) = layout.get(a.func).and_then(|l| l.get(a.stmt)) else {
            continue;
        };
        unit.comments.push(Comment {
            lines: (0, 0),
            text: a.text.clone(),
            placement: CommentPlacement::Trailing(line),
        });
    }
    let text = crate::frontend::pretty_print(&unit);
    let reparsed = parse(&unit.source_name, &text).map_err(TransformError::Internal)?;
    let diags = typecheck(&reparsed);
    if has_errors(&diags) {
        return Err(TransformError::Internal(diags));
    }
    Ok(reparsed)
}

/// Per-function RNG so that rewriting one function never shifts the random
/// choices made for another.
fn function_rng(seed: u64, function: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ names::fnv1a(function.as_bytes()))
}
