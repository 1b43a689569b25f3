use std::collections::HashMap;

use super::names::FreshNames;
use super::{Annotation, RewriteEntry, Rewritten, TransformConfig};
use crate::frontend::{print_expr, BinaryOp, Expr, SourceUnit, Stmt, UnaryOp};

struct Encoder<'a> {
    names: FreshNames,
    fidelity: bool,
    function: &'a str,
    log: Vec<RewriteEntry>,
    /// Decls that hold an encoded condition, with their annotation.
    encoded: HashMap<String, &'static str>,
}

fn sign_bit(e: Expr) -> Expr {
    Expr::binary(
        BinaryOp::BitAnd,
        Expr::binary(BinaryOp::Shr, e, Expr::IntLit(31)),
        Expr::IntLit(1),
    )
}

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::IntLit(0))
}

/// 1 when `a < b` as signed 32-bit values, without overflow.
fn less_than(a: &Expr, b: &Expr) -> Expr {
    use BinaryOp::*;
    if is_zero(b) {
        return sign_bit(a.clone());
    }
    if is_zero(a) {
        // 0 < b: both -b and ~b are negative exactly when b > 0.
        let neg = Expr::unary(UnaryOp::Neg, b.clone());
        let not = Expr::unary(UnaryOp::BitNot, b.clone());
        return sign_bit(Expr::binary(BitAnd, neg, not));
    }
    let d = || Expr::binary(Sub, a.clone(), b.clone());
    let operands_differ = Expr::binary(BitXor, a.clone(), b.clone());
    let result_flipped = Expr::binary(BitXor, d(), a.clone());
    sign_bit(Expr::binary(
        BitXor,
        d(),
        Expr::binary(BitAnd, operands_differ, result_flipped),
    ))
}

/// 1 when `a != b`.
fn not_equal(a: &Expr, b: &Expr) -> Expr {
    let d = if is_zero(b) {
        a.clone()
    } else {
        Expr::binary(BinaryOp::BitXor, a.clone(), b.clone())
    };
    let neg = Expr::unary(UnaryOp::Neg, d.clone());
    sign_bit(Expr::binary(BinaryOp::BitOr, d, neg))
}

fn is_atom(e: &Expr) -> bool {
    matches!(e, Expr::Var(_) | Expr::IntLit(_))
}

impl Encoder<'_> {
    fn rewrite_list(&mut self, stmts: Vec<Stmt>, wrap_expansions: bool) -> Vec<Stmt> {
        let mut out = Vec::with_capacity(stmts.len());
        for s in stmts {
            let expanded = self.rewrite(s);
            if wrap_expansions && expanded.len() > 1 {
                out.push(Stmt::Block(expanded));
            } else {
                out.extend(expanded);
            }
        }
        out
    }

    fn rewrite_body(&mut self, body: Stmt) -> Stmt {
        match body {
            Stmt::Block(stmts) => Stmt::Block(self.rewrite_list(stmts, false)),
            other => Stmt::Block(self.rewrite(other)),
        }
    }

    fn rewrite(&mut self, s: Stmt) -> Vec<Stmt> {
        match s {
            Stmt::Block(stmts) => vec![Stmt::Block(self.rewrite_list(stmts, false))],
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let then_branch = Box::new(self.rewrite_body(*then_branch));
                let else_branch = else_branch.map(|e| Box::new(self.rewrite_body(*e)));
                let (mut prefix, cond) = self.encode_condition(cond);
                prefix.push(Stmt::If {
                    cond,
                    then_branch,
                    else_branch,
                });
                prefix
            }
            Stmt::While { cond, body } => vec![Stmt::While {
                cond,
                body: Box::new(self.rewrite_body(*body)),
            }],
            Stmt::For {
                init,
                cond,
                step,
                body,
            } => vec![Stmt::For {
                init,
                cond,
                step,
                body: Box::new(self.rewrite_body(*body)),
            }],
            Stmt::Switch {
                scrutinee,
                cases,
                default,
            } => {
                let cases = cases
                    .into_iter()
                    .map(|mut c| {
                        c.body = self.rewrite_list(c.body, true);
                        c
                    })
                    .collect();
                let default = default.map(|d| self.rewrite_list(d, true));
                vec![Stmt::Switch {
                    scrutinee,
                    cases,
                    default,
                }]
            }
            other => vec![other],
        }
    }

    /// Declarations to place before the `if`, and the replacement condition.
    fn encode_condition(&mut self, cond: Expr) -> (Vec<Stmt>, Expr) {
        let site = format!("{}: if ({})", self.function, print_expr(&cond));
        match cond {
            Expr::Binary(op, lhs, rhs)
                if op.is_comparison()
                    && !(self.fidelity && matches!(op, BinaryOp::Eq | BinaryOp::Ne)) =>
            {
                let mut decls = Vec::new();
                let (a, b) = if self.fidelity || (is_atom(&lhs) && is_atom(&rhs)) {
                    (*lhs, *rhs)
                } else {
                    let mut hoist = |e: Expr, names: &mut FreshNames| {
                        if matches!(e, Expr::IntLit(_)) {
                            return e;
                        }
                        let name = names.fresh("cond");
                        decls.push(Stmt::decl(&name, Some(e)));
                        Expr::Var(name)
                    };
                    let a = hoist(*lhs, &mut self.names);
                    let b = hoist(*rhs, &mut self.names);
                    (a, b)
                };
                let (test, rule) = self.encode_comparison(op, a, b, &mut decls);
                self.log.push(RewriteEntry::new(site, rule));
                (decls, test)
            }
            Expr::Binary(BinaryOp::LogAnd | BinaryOp::LogOr, ..)
                if !self.fidelity && pure_comparison_tree(&cond) =>
            {
                let mut decls = Vec::new();
                let test = self.encode_tree(cond, &mut decls);
                self.log.push(RewriteEntry::new(site, "each comparison encoded eagerly"));
                (decls, test)
            }
            other => {
                self.log.push(RewriteEntry::new(site, "not encodable, left unchanged"));
                (Vec::new(), other)
            }
        }
    }

    /// Replaces every comparison leaf of a pure `&&`/`||` tree. The leaves
    /// cannot trap or write, so computing them all up front is safe.
    fn encode_tree(&mut self, e: Expr, decls: &mut Vec<Stmt>) -> Expr {
        match e {
            Expr::Binary(op @ (BinaryOp::LogAnd | BinaryOp::LogOr), a, b) => {
                let a = self.encode_tree(*a, decls);
                let b = self.encode_tree(*b, decls);
                Expr::binary(op, a, b)
            }
            Expr::Binary(op, a, b) => self.encode_comparison(op, *a, *b, decls).0,
            other => other,
        }
    }

    /// Declares the encoded bit of `a op b` and returns the test on it.
    fn encode_comparison(
        &mut self,
        op: BinaryOp,
        a: Expr,
        b: Expr,
        decls: &mut Vec<Stmt>,
    ) -> (Expr, &'static str) {
        use BinaryOp::*;
        let (value, expected, rule, note) = if self.fidelity {
            let d = if is_zero(&b) {
                a
            } else {
                Expr::binary(Sub, a, b)
            };
            let expected = if matches!(op, Lt | Le) { 1 } else { 0 };
            (sign_bit(d), expected, "sign bit of the difference", "// encodes sign")
        } else {
            match op {
                Lt => (less_than(&a, &b), 1, "signed less-than bit", "// encodes sign"),
                Gt => (less_than(&b, &a), 1, "signed less-than bit, swapped", "// encodes sign"),
                Le => (less_than(&b, &a), 0, "negated swapped less-than bit", "// encodes sign"),
                Ge => (less_than(&a, &b), 0, "negated less-than bit", "// encodes sign"),
                Eq => (not_equal(&a, &b), 0, "negated nonzero bit", "// encodes equality"),
                _ => (not_equal(&a, &b), 1, "nonzero bit", "// encodes equality"),
            }
        };
        let name = self.names.fresh("cond");
        decls.push(Stmt::decl(&name, Some(value)));
        self.encoded.insert(name.clone(), note);
        (Expr::binary(Eq, Expr::Var(name), Expr::IntLit(expected)), rule)
    }
}

fn pure_comparison_tree(e: &Expr) -> bool {
    match e {
        Expr::Binary(BinaryOp::LogAnd | BinaryOp::LogOr, a, b) => {
            pure_comparison_tree(a) && pure_comparison_tree(b)
        }
        Expr::Binary(op, a, b) => op.is_comparison() && a.is_pure() && b.is_pure(),
        _ => false,
    }
}

pub(super) fn encode(unit: &SourceUnit, cfg: &TransformConfig) -> Rewritten {
    let mut out = unit.clone();
    let mut annotations = Vec::new();
    let mut log = Vec::new();
    for (fi, func) in out.functions.iter_mut().enumerate() {
        let mut enc = Encoder {
            names: FreshNames::for_function(unit, &unit.functions[fi]),
            fidelity: cfg.paper_fidelity,
            function: &unit.functions[fi].name,
            log: Vec::new(),
            encoded: HashMap::new(),
        };
        let body = std::mem::take(&mut func.body);
        func.body = enc.rewrite_list(body, false);
        let mut index = 0;
        func.walk_stmts(&mut |s| {
            if let Stmt::Decl { name, .. } = s {
                if let Some(note) = enc.encoded.get(name) {
                    annotations.push(Annotation {
                        func: fi,
                        stmt: index,
                        text: note.to_string(),
                    });
                }
            }
            index += 1;
        });
        log.append(&mut enc.log);
    }
    Rewritten {
        unit: out,
        annotations,
        log,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{evaluate_concrete, parse, Outcome, DEFAULT_FUEL};

    const EDGES: [i32; 9] = [i32::MIN, i32::MIN + 1, -5, -1, 0, 1, 5, i32::MAX - 1, i32::MAX];

    fn eval2(e: &Expr, a: i32, b: i32) -> i32 {
        let src = format!("int t(int a, int b) {{ return {}; }}", print_expr(e));
        let unit = parse("t.c", &src).unwrap();
        match evaluate_concrete(&unit, "t", &[a, b], DEFAULT_FUEL).unwrap() {
            Outcome::Returned(Some(v)) => v,
            other => panic!("{other}"),
        }
    }

    #[test]
    fn bit_encodings_are_exact_at_the_edges() {
        let (a, b) = (Expr::var("a"), Expr::var("b"));
        let zero = Expr::IntLit(0);
        for &x in &EDGES {
            for &y in &EDGES {
                assert_eq!(eval2(&less_than(&a, &b), x, y), i32::from(x < y), "{x} < {y}");
                assert_eq!(eval2(&not_equal(&a, &b), x, y), i32::from(x != y), "{x} != {y}");
            }
            assert_eq!(eval2(&less_than(&a, &zero), x, 0), i32::from(x < 0));
            assert_eq!(eval2(&less_than(&zero, &a), x, 0), i32::from(0 < x));
            assert_eq!(eval2(&not_equal(&a, &zero), x, 0), i32::from(x != 0));
        }
    }
}
