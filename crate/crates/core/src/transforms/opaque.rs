use rand::Rng;

use super::{function_rng, Annotation, RewriteEntry, Rewritten, TransformConfig};
use crate::frontend::{BinaryOp, Expr, ReturnKind, SourceUnit, Stmt};

/// Always-true predicate templates over a variable `v`, in pool order.
pub const OPAQUE_TEMPLATES: [&str; 4] = [
    "((v * v - v * v) + 1) > 0",
    "((2 * v) % 2) == 0",
    "(v ^ v) == 0",
    "((v * (v + 1)) % 2) == 0",
];

/// Operand used when a function has no parameters.
const LITERAL_OPERAND: i32 = 7;

fn build(template: usize, v: &Expr) -> Expr {
    use BinaryOp::*;
    let b = Expr::binary;
    let lit = Expr::IntLit;
    match template {
        0 => {
            let square = || b(Mul, v.clone(), v.clone());
            b(Gt, b(Add, b(Sub, square(), square()), lit(1)), lit(0))
        }
        1 => b(Eq, b(Rem, b(Mul, lit(2), v.clone()), lit(2)), lit(0)),
        2 => b(Eq, b(BitXor, v.clone(), v.clone()), lit(0)),
        _ => b(
            Eq,
            b(Rem, b(Mul, v.clone(), b(Add, v.clone(), lit(1))), lit(2)),
            lit(0),
        ),
    }
}

pub(super) fn insert(unit: &SourceUnit, cfg: &TransformConfig) -> Rewritten {
    let pool = cfg.opaque_pool_size.clamp(1, OPAQUE_TEMPLATES.len());
    let mut out = unit.clone();
    let mut annotations = Vec::new();
    let mut log = Vec::new();
    for (fi, func) in out.functions.iter_mut().enumerate() {
        let mut rng = function_rng(cfg.seed, &func.name);
        let (template, operand) = if cfg.paper_fidelity {
            (0, func.params.first().map(|p| Expr::var(p)))
        } else {
            let t = rng.random_range(0..pool);
            let p = (!func.params.is_empty())
                .then(|| Expr::var(&func.params[rng.random_range(0..func.params.len())]));
            (t, p)
        };
        let operand_text = match &operand {
            Some(Expr::Var(name)) => name.clone(),
            _ => LITERAL_OPERAND.to_string(),
        };
        let operand = operand.unwrap_or(Expr::IntLit(LITERAL_OPERAND));
        let fallback = match func.return_kind {
            ReturnKind::Int => Stmt::Return(Some(Expr::IntLit(0))),
            ReturnKind::Void => Stmt::Return(None),
        };
        let body = std::mem::take(&mut func.body);
        func.body = vec![Stmt::if_else(build(template, &operand), body, Some(vec![fallback]))];
        let mut count = 0;
        func.walk_stmts(&mut |_| count += 1);
        annotations.push(Annotation {
            func: fi,
            stmt: 0,
            text: "// always true".to_string(),
        });
        annotations.push(Annotation {
            func: fi,
            stmt: count - 1,
            text: "// unreachable".to_string(),
        });
        log.push(RewriteEntry::new(
            format!("function {}", func.name),
            format!(
                "opaque predicate {} with v = {operand_text}",
                OPAQUE_TEMPLATES[template]
            ),
        ));
    }
    Rewritten {
        unit: out,
        annotations,
        log,
    }
}
