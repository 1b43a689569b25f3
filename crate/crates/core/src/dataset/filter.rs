use serde::{Deserialize, Serialize};

use super::{build_record, Condition, CorpusEntry, TrainingRecord};
use crate::frontend::parse_checked;
use crate::symexec::{explore, ExplorationLimits};
use crate::transforms::TransformKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    PathExplosion,
    TokenBudget,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub kept: usize,
    pub dropped_path_explosion: usize,
    pub dropped_token_budget: usize,
    pub reasons: Vec<(String, DropReason)>,
}

impl FilterReport {
    fn drop(&mut self, program_id: &str, reason: DropReason) {
        match reason {
            DropReason::PathExplosion => self.dropped_path_explosion += 1,
            DropReason::TokenBudget => self.dropped_token_budget += 1,
        }
        self.reasons.push((program_id.to_string(), reason));
    }

    /// Combines the reports of two filters applied one after the other.
    pub fn then(mut self, next: FilterReport) -> FilterReport {
        self.kept = next.kept;
        self.dropped_path_explosion += next.dropped_path_explosion;
        self.dropped_token_budget += next.dropped_token_budget;
        self.reasons.extend(next.reasons);
        self
    }
}

/// Drops entries whose original program exhausts an exploration limit.
pub fn filter_path_explosion(
    entries: Vec<CorpusEntry>,
    limits: &ExplorationLimits,
) -> (Vec<CorpusEntry>, FilterReport) {
    let mut report = FilterReport::default();
    let mut kept = Vec::new();
    for e in entries {
        let exploded = match parse_checked(&e.program_id, &e.original) {
            Ok(unit) => match explore(&unit, &e.entry, limits) {
                Ok(x) => x.hit_limits(limits),
                Err(_) => true,
            },
            Err(_) => true,
        };
        if exploded {
            report.drop(&e.program_id, DropReason::PathExplosion);
        } else {
            kept.push(e);
        }
    }
    report.kept = kept.len();
    (kept, report)
}

/// `ceil(chars / 4)` over all message contents.
pub fn estimate_tokens(record: &TrainingRecord) -> usize {
    let chars: usize = record.messages.iter().map(|m| m.content.chars().count()).sum();
    chars.div_ceil(4)
}

/// Drops entries for which any transformation's record in `condition` is
/// estimated above `budget`. Entries without artifacts cannot produce
/// enhanced records and count as path-explosion drops there.
pub fn filter_token_budget(
    entries: Vec<CorpusEntry>,
    budget: usize,
    condition: Condition,
) -> (Vec<CorpusEntry>, FilterReport) {
    let mut report = FilterReport::default();
    let mut kept = Vec::new();
    for e in entries {
        let mut largest = 0;
        let mut missing = false;
        for kind in TransformKind::ALL {
            match build_record(&e, kind, condition) {
                Ok(r) => largest = largest.max(estimate_tokens(&r)),
                Err(_) => missing = true,
            }
        }
        if missing {
            report.drop(&e.program_id, DropReason::PathExplosion);
        } else if largest > budget {
            report.drop(&e.program_id, DropReason::TokenBudget);
        } else {
            kept.push(e);
        }
    }
    report.kept = kept.len();
    (kept, report)
}
