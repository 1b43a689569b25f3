//! Desk-scale symbolic execution of mini-C entry functions.
//!
//! Exploration is depth-first and false-branch-first. Paths are explored by
//! re-executing the function with a prefix of recorded branch decisions, so
//! no interpreter state needs to be cloned at forks.

mod expr;
mod machine;
mod solver;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{has_errors, typecheck, RuntimeError, SourceUnit};

pub use expr::{falsy, fold_constants, truthy, SymExpr};
pub use solver::Failure as SolveFailure;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExplorationLimits {
    pub max_paths: usize,
    /// How often one path may pass the same symbolic branch site.
    pub max_loop_unroll: usize,
    /// Inclusive range searched for every input.
    pub domain: (i32, i32),
    /// Candidate evaluations per variable group and query.
    pub solver_budget: u64,
    /// Statements, loop iterations and calls allowed on one path.
    pub max_steps: u64,
    /// Largest branch condition or return value, counted as an unshared tree.
    pub max_term_nodes: u64,
}

impl Default for ExplorationLimits {
    fn default() -> Self {
        ExplorationLimits {
            max_paths: 2000,
            max_loop_unroll: 64,
            domain: (-1024, 1023),
            solver_budget: 200_000,
            max_steps: 100_000,
            max_term_nodes: 20_000,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LimitsError {
    #[error("limits must be positive")]
    NotPositive,
    #[error("empty domain {0}..{1}")]
    EmptyDomain(i32, i32),
}

impl ExplorationLimits {
    pub fn validate(&self) -> Result<(), LimitsError> {
        if self.max_paths == 0 || self.max_loop_unroll == 0 || self.solver_budget == 0 || self.max_steps == 0
            || self.max_term_nodes == 0
        {
            return Err(LimitsError::NotPositive);
        }
        if self.domain.0 > self.domain.1 {
            return Err(LimitsError::EmptyDomain(self.domain.0, self.domain.1));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TestCase {
    pub objects: Vec<(String, i32)>,
}

impl TestCase {
    pub fn values(&self) -> Vec<i32> {
        self.objects.iter().map(|(_, v)| *v).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathStatus {
    Completed,
    Error,
    PrunedInfeasible,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathRecord {
    /// Conjunction; each term is satisfied when it evaluates to nonzero.
    pub constraints: Vec<SymExpr>,
    pub status: PathStatus,
    pub witness: Option<TestCase>,
    pub return_value: Option<i32>,
    /// Set for error paths.
    pub error: Option<RuntimeError>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecStats {
    pub paths_explored: u64,
    pub tests_generated: u64,
    pub solver_calls: u64,
    pub timeouts: u64,
    pub max_depth_reached: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exploration {
    pub params: Vec<String>,
    pub records: Vec<PathRecord>,
    pub stats: ExecStats,
}

impl Exploration {
    /// True when some path hit a limit.
    pub fn hit_limits(&self, limits: &ExplorationLimits) -> bool {
        self.stats.paths_explored >= limits.max_paths as u64
            || self
                .records
                .iter()
                .any(|r| r.status == PathStatus::BudgetExhausted)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExploreError {
    #[error("no function named `{0}`")]
    UnknownEntry(String),
    #[error("program is not well-typed: {0}")]
    IllTyped(String),
    #[error(transparent)]
    Limits(#[from] LimitsError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Sat(TestCase),
    UnsatWithinDomain,
    BudgetExceeded,
}

pub fn solve(constraints: &[SymExpr], params: &[String], limits: &ExplorationLimits) -> SolveOutcome {
    let arcs: Vec<Arc<SymExpr>> = constraints.iter().cloned().map(Arc::new).collect();
    match solver::solve_model(&arcs, params.len(), limits) {
        Ok(model) => SolveOutcome::Sat(test_case(params, &model)),
        Err(SolveFailure::Unsat) => SolveOutcome::UnsatWithinDomain,
        Err(SolveFailure::BudgetExceeded) => SolveOutcome::BudgetExceeded,
    }
}

fn test_case(params: &[String], model: &[i32]) -> TestCase {
    TestCase {
        objects: params.iter().cloned().zip(model.iter().copied()).collect(),
    }
}

pub fn explore(
    unit: &SourceUnit,
    entry: &str,
    limits: &ExplorationLimits,
) -> Result<Exploration, ExploreError> {
    limits.validate()?;
    let diags = typecheck(unit);
    if has_errors(&diags) {
        let first = diags.iter().find(|d| d.is_error()).map(ToString::to_string);
        return Err(ExploreError::IllTyped(first.unwrap_or_default()));
    }
    let func = unit
        .function(entry)
        .ok_or_else(|| ExploreError::UnknownEntry(entry.to_string()))?;
    Ok(machine::explore(unit, func, limits))
}

/// Records that carry a witness: completed and error paths.
pub fn count_tests(records: &[PathRecord]) -> usize {
    records.iter().filter(|r| r.witness.is_some()).count()
}
