//! Textual KLEE-style artifacts: SMT-LIB constraints, KQuery, run statistics
//! and concrete test cases.

mod istats;
mod kquery;
mod ktest;
mod smt2;

use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symexec::{Exploration, PathRecord, PathStatus, SymExpr};

pub use istats::{emit_istats, parse_istats};
pub use kquery::{emit_kquery, parse_kquery, KQueryFile};
pub use ktest::{emit_ktest, parse_ktest, parse_ktest_indexed};
pub use smt2::{emit_smt2, Smt2Sort};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

impl FormatError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> FormatError {
        FormatError {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactBundle {
    pub program_id: String,
    pub smt2: String,
    pub kquery: String,
    pub istats: String,
    pub ktests: Vec<String>,
}

impl ArtifactBundle {
    pub fn from_exploration(program_id: &str, x: &Exploration, sort: Smt2Sort) -> ArtifactBundle {
        let ktests = x
            .records
            .iter()
            .filter_map(|r| r.witness.as_ref())
            .enumerate()
            .map(|(i, tc)| emit_ktest(tc, i))
            .collect();
        ArtifactBundle {
            program_id: program_id.to_string(),
            smt2: emit_smt2(&x.records, &x.params, sort),
            kquery: emit_kquery(&x.records, &x.params),
            istats: emit_istats(&x.stats),
            ktests,
        }
    }

    /// The artifact section of an enhanced prompt.
    pub fn prompt_section(&self) -> String {
        format!(
            "SMT2: {}\nKQuery: {}\niStats: {}\nKTest: {}",
            self.smt2.trim_end(),
            self.kquery.trim_end(),
            self.istats.trim_end(),
            self.ktests.iter().map(|k| k.trim_end()).collect::<Vec<_>>().join("\n"),
        )
    }

    /// Writes `<id>.smt2`, `<id>.kquery`, `<id>.istats` and `<id>.ktest.<i>`.
    pub fn write_to(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let id = &self.program_id;
        let mut files = vec![
            (dir.join(format!("{id}.smt2")), &self.smt2),
            (dir.join(format!("{id}.kquery")), &self.kquery),
            (dir.join(format!("{id}.istats")), &self.istats),
        ];
        for (i, k) in self.ktests.iter().enumerate() {
            files.push((dir.join(format!("{id}.ktest.{i}")), k));
        }
        let mut written = Vec::with_capacity(files.len());
        for (path, text) in files {
            std::fs::write(&path, text)
                .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Paths whose constraints go into the constraint files.
fn reported(records: &[PathRecord]) -> impl Iterator<Item = &PathRecord> {
    records
        .iter()
        .filter(|r| matches!(r.status, PathStatus::Completed | PathStatus::Error))
}

/// Whether the term denotes a truth value rather than a 32-bit word.
fn is_predicate(e: &SymExpr) -> bool {
    match e {
        SymExpr::Unary(op, _) => *op == crate::frontend::UnaryOp::LogNot,
        SymExpr::Binary(op, ..) => {
            op.is_comparison()
                || matches!(op, crate::frontend::BinaryOp::LogAnd | crate::frontend::BinaryOp::LogOr)
        }
        _ => false,
    }
}
