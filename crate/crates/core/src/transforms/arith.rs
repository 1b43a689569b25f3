use rand::seq::SliceRandom;
use rand::Rng;

use super::{function_rng, Annotation, RewriteEntry, Rewritten, TransformConfig};
use crate::frontend::{print_expr, BinaryOp, Expr, SourceUnit, Stmt, UnaryOp};

/// Visits statements in [`Stmt::walk`] pre-order with their index, mutably.
pub(super) fn for_each_stmt_mut(stmts: &mut [Stmt], index: &mut usize, f: &mut impl FnMut(&mut Stmt, usize)) {
    for s in stmts {
        visit_stmt_mut(s, index, f);
    }
}

fn visit_stmt_mut(s: &mut Stmt, index: &mut usize, f: &mut impl FnMut(&mut Stmt, usize)) {
    f(s, *index);
    *index += 1;
    match s {
        Stmt::Block(stmts) => for_each_stmt_mut(stmts, index, f),
        Stmt::If {
            then_branch,
            else_branch,
            ..
        } => {
            visit_stmt_mut(then_branch, index, f);
            if let Some(e) = else_branch {
                visit_stmt_mut(e, index, f);
            }
        }
        Stmt::While { body, .. } => visit_stmt_mut(body, index, f),
        Stmt::For { init, body, .. } => {
            if let Some(i) = init {
                visit_stmt_mut(i, index, f);
            }
            visit_stmt_mut(body, index, f);
        }
        Stmt::Switch { cases, default, .. } => {
            for case in cases {
                for_each_stmt_mut(&mut case.body, index, f);
            }
            if let Some(d) = default {
                for_each_stmt_mut(d, index, f);
            }
        }
        Stmt::Return(_) | Stmt::Expr(_) | Stmt::Decl { .. } | Stmt::Break | Stmt::Continue => {}
    }
}

/// Mutable counterpart of [`Stmt::own_exprs`], same order.
fn own_exprs_mut(s: &mut Stmt) -> Vec<&mut Expr> {
    match s {
        Stmt::If { cond, .. } | Stmt::While { cond, .. } => vec![cond],
        Stmt::For { cond, step, .. } => cond.iter_mut().chain(step.iter_mut()).collect(),
        Stmt::Switch { scrutinee, .. } => vec![scrutinee],
        Stmt::Return(e) => e.iter_mut().collect(),
        Stmt::Expr(e) => vec![e],
        Stmt::Decl { init, .. } => init.iter_mut().collect(),
        Stmt::Block(_) | Stmt::Break | Stmt::Continue => Vec::new(),
    }
}

/// An eligible site `x op c`, normalized so the variable comes first.
fn site(e: &Expr) -> Option<(BinaryOp, String, i32)> {
    match e {
        Expr::Binary(op @ (BinaryOp::Add | BinaryOp::Mul), a, b) => match (&**a, &**b) {
            (Expr::Var(x), Expr::IntLit(c)) | (Expr::IntLit(c), Expr::Var(x)) => {
                Some((*op, x.clone(), *c))
            }
            _ => None,
        },
        Expr::Binary(BinaryOp::Sub, a, b) => match (&**a, &**b) {
            (Expr::Var(x), Expr::IntLit(c)) => Some((BinaryOp::Sub, x.clone(), *c)),
            _ => None,
        },
        _ => None,
    }
}

/// Visits every eligible site in pre-order; `f` may replace it.
fn visit_sites(e: &mut Expr, f: &mut impl FnMut(&mut Expr)) {
    if site(e).is_some() {
        f(e);
        return;
    }
    match e {
        Expr::IntLit(_) | Expr::Var(_) => {}
        Expr::Unary(_, a) | Expr::Assign(_, a) => visit_sites(a, f),
        Expr::Binary(_, a, b) => {
            visit_sites(a, f);
            visit_sites(b, f);
        }
        Expr::Ternary(c, t, x) => {
            visit_sites(c, f);
            visit_sites(t, f);
            visit_sites(x, f);
        }
        Expr::Call(_, args) => args.iter_mut().for_each(|a| visit_sites(a, f)),
    }
}

/// Exact rewrites under 32-bit wrapping arithmetic.
fn encode_exact(op: BinaryOp, x: &str, c: i32, variant: usize) -> (Expr, &'static str) {
    use BinaryOp::*;
    let b = Expr::binary;
    let v = || Expr::var(x);
    let lit = Expr::IntLit;
    let not_x = || Expr::unary(UnaryOp::BitNot, v());
    match (op, variant) {
        (Add, 0) => (
            b(Add, b(BitXor, v(), lit(c)), b(Mul, lit(2), b(BitAnd, v(), lit(c)))),
            "x + c -> (x ^ c) + 2 * (x & c)",
        ),
        (Add, _) => (
            b(Add, b(BitOr, v(), lit(c)), b(BitAnd, v(), lit(c))),
            "x + c -> (x | c) + (x & c)",
        ),
        (Sub, 0) => (
            b(Sub, b(BitXor, v(), lit(c)), b(Mul, lit(2), b(BitAnd, not_x(), lit(c)))),
            "x - c -> (x ^ c) - 2 * (~x & c)",
        ),
        (Sub, _) => (
            b(
                Sub,
                b(BitAnd, v(), Expr::unary(UnaryOp::BitNot, lit(c))),
                b(BitAnd, not_x(), lit(c)),
            ),
            "x - c -> (x & ~c) - (~x & c)",
        ),
        (_, 0) => (
            b(Add, b(Mul, v(), lit(c.wrapping_sub(1))), v()),
            "x * c -> x * (c - 1) + x",
        ),
        (_, _) => (
            b(Sub, b(Mul, v(), lit(c.wrapping_add(1))), v()),
            "x * c -> x * (c + 1) - x",
        ),
    }
}

/// The published scaling template; not exact once `4 * x` overflows.
fn encode_scaled(op: BinaryOp, x: &str, c: i32) -> (Expr, &'static str) {
    use BinaryOp::*;
    let scaled = Expr::binary(Mul, Expr::var(x), Expr::IntLit(4));
    let inner = Expr::binary(op, scaled, Expr::IntLit(c.wrapping_mul(4)));
    let rule = if op == Add {
        "x + c -> (x * 4 + 4c) / 4"
    } else {
        "x - c -> (x * 4 - 4c) / 4"
    };
    (Expr::binary(Div, inner, Expr::IntLit(4)), rule)
}

fn site_count(stmts: &mut [Stmt]) -> usize {
    let mut n = 0;
    for_each_stmt_mut(stmts, &mut 0, &mut |s, _| {
        for e in own_exprs_mut(s) {
            visit_sites(e, &mut |_| n += 1);
        }
    });
    n
}

pub(super) fn encode(unit: &SourceUnit, cfg: &TransformConfig) -> Rewritten {
    let mut out = unit.clone();
    let mut annotations = Vec::new();
    let mut log = Vec::new();
    let intensity = cfg.ae_intensity.clamp(0.0, 1.0);
    for (fi, func) in out.functions.iter_mut().enumerate() {
        let mut rng = function_rng(cfg.seed, &func.name);
        let n = site_count(&mut func.body);
        if n == 0 || intensity == 0.0 {
            continue;
        }
        let k = ((intensity * n as f64).round() as usize).clamp(1, n);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut chosen = vec![false; n];
        order[..k].iter().for_each(|&i| chosen[i] = true);
        let variants: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();

        let mut site_index = 0;
        let func_name = func.name.clone();
        for_each_stmt_mut(&mut func.body, &mut 0, &mut |s, stmt_index| {
            let mut notes = Vec::new();
            for e in own_exprs_mut(s) {
                visit_sites(e, &mut |e| {
                    let i = site_index;
                    site_index += 1;
                    if !chosen[i] {
                        return;
                    }
                    let (op, x, c) = site(e).expect("visit_sites yields sites");
                    let original = print_expr(e);
                    let (encoded, rule) = if cfg.paper_fidelity && op != BinaryOp::Mul {
                        encode_scaled(op, &x, c)
                    } else {
                        encode_exact(op, &x, c, variants[i])
                    };
                    log.push(RewriteEntry::new(format!("{func_name}: {original}"), rule));
                    notes.push(original);
                    *e = encoded;
                });
            }
            if !notes.is_empty() {
                annotations.push(Annotation {
                    func: fi,
                    stmt: stmt_index,
                    text: format!("// equivalent to {}", notes.join("; ")),
                });
            }
        });
    }
    Rewritten {
        unit: out,
        annotations,
        log,
    }
}
