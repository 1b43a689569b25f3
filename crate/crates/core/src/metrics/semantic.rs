use serde::{Deserialize, Serialize};

use super::round2;
use crate::frontend::{parse_checked, SourceUnit};
use crate::symexec::{count_tests, explore, ExplorationLimits};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticScore {
    pub n_original: u64,
    pub n_deobfuscated: u64,
    pub value: f64,
    /// Why the score is 0 without a comparison, if it is.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
}

/// 100 when both counts are 0, else `100 (1 - |a - b| / max(a, b))` to two decimals.
pub fn semantic_value(n_original: u64, n_deobfuscated: u64) -> f64 {
    let max = n_original.max(n_deobfuscated);
    if max == 0 {
        return 100.0;
    }
    let diff = n_original.abs_diff(n_deobfuscated);
    round2(100.0 * (1.0 - diff as f64 / max as f64))
}

pub fn score_semantics(
    original: &SourceUnit,
    candidate: &SourceUnit,
    entry: &str,
    limits: &ExplorationLimits,
) -> SemanticScore {
    let failed = |n_original, reason: String| SemanticScore {
        n_original,
        n_deobfuscated: 0,
        value: 0.0,
        reason: Some(reason),
    };
    let base = match explore(original, entry, limits) {
        Ok(x) => x,
        Err(e) => return failed(0, format!("original: {e}")),
    };
    let n_original = count_tests(&base.records) as u64;
    let arity = base.params.len();
    match candidate.function(entry) {
        None => return failed(n_original, format!("candidate has no function `{entry}`")),
        Some(f) if f.params.len() != arity => {
            return failed(
                n_original,
                format!("candidate `{entry}` takes {} argument(s), expected {arity}", f.params.len()),
            )
        }
        Some(_) => {}
    }
    match explore(candidate, entry, limits) {
        Ok(x) => {
            let n_deobfuscated = count_tests(&x.records) as u64;
            SemanticScore {
                n_original,
                n_deobfuscated,
                value: semantic_value(n_original, n_deobfuscated),
                reason: None,
            }
        }
        Err(e) => failed(n_original, format!("candidate: {e}")),
    }
}

/// Like [`score_semantics`] for candidate source text, which may not parse.
pub fn score_semantics_text(
    original: &SourceUnit,
    candidate: &str,
    entry: &str,
    limits: &ExplorationLimits,
) -> SemanticScore {
    match parse_checked("candidate.c", candidate) {
        Ok(unit) => score_semantics(original, &unit, entry, limits),
        Err(diags) => {
            let n_original = explore(original, entry, limits)
                .map(|x| count_tests(&x.records) as u64)
                .unwrap_or(0);
            SemanticScore {
                n_original,
                n_deobfuscated: 0,
                value: 0.0,
                reason: Some(format!(
                    "candidate does not compile: {}",
                    diags.first().map(ToString::to_string).unwrap_or_default()
                )),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_cases() {
        assert_eq!(semantic_value(0, 0), 100.0);
        assert_eq!(semantic_value(4, 2), 50.0);
        assert_eq!(semantic_value(2, 4), 50.0);
        assert_eq!(semantic_value(3, 0), 0.0);
        assert_eq!(semantic_value(3, 2), 66.67);
    }
}
