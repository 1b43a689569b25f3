use serde::{Deserialize, Serialize};

use super::round2;
use crate::frontend::{count_loc, parse, print_function, BinaryOp, Expr, FunctionDef, Stmt};

const CC_THRESHOLD: u32 = 10;
const NESTING_THRESHOLD: u32 = 4;
const LENGTH_THRESHOLD: f64 = 50.0;
const TARGET_COMMENT_DENSITY: f64 = 0.10;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QualityBreakdown {
    pub identifiers_total: usize,
    pub identifiers_meaningful: usize,
    /// Cyclomatic complexity per function, in file order.
    pub cyclomatic: Vec<(String, u32)>,
    pub max_nesting: u32,
    /// Mean canonical line count per function.
    pub avg_function_length: f64,
    pub comment_lines: usize,
    pub total_lines: usize,
    pub comment_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityScore {
    pub naming: f64,
    pub structure: f64,
    pub documentation: f64,
    pub value: f64,
    pub breakdown: QualityBreakdown,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
}

fn has_vowel(name: &str) -> bool {
    name.chars().any(|c| "aeiouAEIOU".contains(c))
}

/// Length at least 2, contains a vowel, and is not a vowel-less run of 4 or more.
pub fn is_meaningful(name: &str) -> bool {
    let len = name.chars().count();
    len >= 2 && has_vowel(name) && !(len >= 4 && !has_vowel(name))
}

/// (declared name, declared as a `for` initializer)
fn declarations(func: &FunctionDef) -> Vec<(&str, bool)> {
    let mut out = vec![(func.name.as_str(), false)];
    out.extend(func.params.iter().map(|p| (p.as_str(), false)));
    let mut loop_inits: Vec<*const Stmt> = Vec::new();
    func.walk_stmts(&mut |s| {
        if let Stmt::For { init: Some(init), .. } = s {
            loop_inits.push(&**init as *const Stmt);
        }
    });
    func.walk_stmts(&mut |s| {
        if let Stmt::Decl { name, .. } = s {
            out.push((name.as_str(), loop_inits.contains(&(s as *const Stmt))));
        }
    });
    out
}

fn cyclomatic(func: &FunctionDef) -> u32 {
    let mut decisions = 0;
    func.walk_stmts(&mut |s| {
        decisions += match s {
            Stmt::If { .. } | Stmt::While { .. } | Stmt::For { .. } => 1,
            Stmt::Switch { cases, .. } => cases.len() as u32,
            _ => 0,
        };
    });
    func.walk_exprs(&mut |e| {
        decisions += match e {
            Expr::Binary(BinaryOp::LogAnd | BinaryOp::LogOr, ..) | Expr::Ternary(..) => 1,
            _ => 0,
        };
    });
    1 + decisions
}

/// Deepest nesting of if/while/for/switch; an `else if` stays at its chain's level.
fn nesting(stmts: &[Stmt], depth: u32) -> u32 {
    stmts.iter().map(|s| stmt_nesting(s, depth)).max().unwrap_or(depth)
}

fn stmt_nesting(s: &Stmt, depth: u32) -> u32 {
    match s {
        Stmt::Block(inner) => nesting(inner, depth),
        Stmt::If {
            then_branch,
            else_branch,
            ..
        } => {
            let mut d = stmt_nesting(then_branch, depth + 1);
            match else_branch.as_deref() {
                Some(Stmt::Block(inner)) if matches!(inner.as_slice(), [Stmt::If { .. }]) => {
                    d = d.max(stmt_nesting(&inner[0], depth));
                }
                Some(e) => d = d.max(stmt_nesting(e, depth + 1)),
                None => {}
            }
            d
        }
        Stmt::While { body, .. } | Stmt::For { body, .. } => stmt_nesting(body, depth + 1),
        Stmt::Switch { cases, default, .. } => cases
            .iter()
            .map(|c| nesting(&c.body, depth + 1))
            .chain(default.iter().map(|d| nesting(d, depth + 1)))
            .max()
            .unwrap_or(depth + 1),
        _ => depth,
    }
}

pub fn score_quality(candidate: &str) -> QualityScore {
    let unit = match parse("candidate.c", candidate) {
        Ok(u) => u,
        Err(diags) => {
            return QualityScore {
                naming: 0.0,
                structure: 0.0,
                documentation: 0.0,
                value: 0.0,
                breakdown: QualityBreakdown::default(),
                reason: Some(format!(
                    "candidate does not parse: {}",
                    diags.first().map(ToString::to_string).unwrap_or_default()
                )),
            }
        }
    };
    let mut b = QualityBreakdown::default();
    for func in &unit.functions {
        for (name, loop_var) in declarations(func) {
            b.identifiers_total += 1;
            let short_loop = loop_var && matches!(name, "i" | "j" | "k");
            b.identifiers_meaningful += usize::from(short_loop || is_meaningful(name));
        }
        b.cyclomatic.push((func.name.clone(), cyclomatic(func)));
        b.max_nesting = b.max_nesting.max(nesting(&func.body, 0));
    }
    if !unit.functions.is_empty() {
        let lines: usize = unit
            .functions
            .iter()
            .map(|f| print_function(f).lines().count())
            .sum();
        b.avg_function_length = lines as f64 / unit.functions.len() as f64;
    }
    let loc = count_loc(candidate);
    b.comment_lines = loc.comment_lines;
    b.total_lines = loc.total_lines;
    if loc.total_lines > 0 {
        b.comment_density = loc.comment_lines as f64 / loc.total_lines as f64;
    }

    let naming = if b.identifiers_total == 0 {
        100.0
    } else {
        100.0 * b.identifiers_meaningful as f64 / b.identifiers_total as f64
    };
    let cc_penalty: u32 = b
        .cyclomatic
        .iter()
        .map(|(_, cc)| cc.saturating_sub(CC_THRESHOLD))
        .sum();
    let nest_penalty = b.max_nesting.saturating_sub(NESTING_THRESHOLD);
    let length_penalty = ((b.avg_function_length - LENGTH_THRESHOLD).max(0.0) / 5.0).floor();
    let structure =
        (100.0 - 2.0 * f64::from(cc_penalty) - 5.0 * f64::from(nest_penalty) - length_penalty).max(0.0);
    let documentation = (b.comment_density / TARGET_COMMENT_DENSITY * 100.0).min(100.0);
    let (naming, structure, documentation) = (round2(naming), round2(structure), round2(documentation));
    QualityScore {
        naming,
        structure,
        documentation,
        value: round2(0.4 * naming + 0.4 * structure + 0.2 * documentation),
        breakdown: b,
        reason: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meaningful_names() {
        assert!(is_meaningful("state"));
        assert!(is_meaningful("cond"));
        assert!(!is_meaningful("x"));
        assert!(!is_meaningful("tmp"));
        assert!(!is_meaningful("xyzw"));
        assert!(is_meaningful("io"));
    }

    #[test]
    fn loop_counters_are_exempt_only_in_for_init() {
        let q = score_quality("int sum(int n) { int s = 0; for (int i = 0; i < n; i++) s += i; int j = 1; return s + j; }");
        // sum, n, s, i, j: sum and the loop counter i count
        assert_eq!(q.breakdown.identifiers_total, 5);
        assert_eq!(q.breakdown.identifiers_meaningful, 2);
    }

    #[test]
    fn else_if_chain_is_flat() {
        let q = score_quality(
            "int f(int x) { if (x < 0) return 0; else if (x < 5) return 1; else if (x < 9) return 2; return 3; }",
        );
        assert_eq!(q.breakdown.max_nesting, 1);
        assert_eq!(q.breakdown.cyclomatic, vec![("f".to_string(), 4)]);
    }
}
