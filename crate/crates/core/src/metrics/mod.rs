//! Scores for candidate deobfuscations: does it compile, does it explore
//! like the original, and does it read well. Plus a concrete equivalence
//! oracle.

mod equivalence;
mod quality;
mod semantic;
mod syntax;

use thiserror::Error;

pub use equivalence::{check_equivalence, Equivalence, EquivalenceGrid};
pub use quality::{is_meaningful, score_quality, QualityBreakdown, QualityScore};
pub use semantic::{score_semantics, score_semantics_text, semantic_value, SemanticScore};
pub use syntax::{score_syntax, SyntaxMethod, SyntaxMode, SyntaxScore};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("compiler command `{command}` could not be run: {source}")]
    CommandUnavailable {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("empty compiler command")]
    EmptyCommand,
    #[error("scratch file: {0}")]
    Scratch(#[source] std::io::Error),
    #[error("cannot compare: {0}")]
    Incomparable(String),
}

/// Rounds half away from zero to two decimals.
pub fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}
