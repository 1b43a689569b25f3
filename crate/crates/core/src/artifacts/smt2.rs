use std::collections::BTreeSet;

use super::{is_predicate, reported};
use crate::frontend::{BinaryOp, UnaryOp};
use crate::symexec::{PathRecord, SymExpr};

/// Sort used for the symbolic inputs.
///
/// `BitVec` is exact for 32-bit semantics. `Int` renders comparisons and
/// arithmetic with the integer theory (`(assert (> x 0))`) and bitwise
/// operators as declared uninterpreted functions; it ignores wraparound.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Smt2Sort {
    #[default]
    BitVec,
    Int,
}

pub fn emit_smt2(records: &[PathRecord], params: &[String], sort: Smt2Sort) -> String {
    let mut blocks = String::new();
    let mut helpers = BTreeSet::new();
    for (i, r) in reported(records).enumerate() {
        blocks.push_str(&format!("; path {i}\n(push 1)\n"));
        for c in &r.constraints {
            let mut w = Writer {
                sort,
                params,
                helpers: &mut helpers,
                out: String::new(),
            };
            w.predicate(c);
            blocks.push_str(&format!("(assert {})\n", w.out));
        }
        blocks.push_str("(check-sat)\n(pop 1)\n");
    }
    let mut out = String::new();
    match sort {
        Smt2Sort::BitVec => out.push_str("(set-logic QF_BV)\n"),
        Smt2Sort::Int => out.push_str("(set-logic ALL)\n"),
    }
    for p in params {
        match sort {
            Smt2Sort::BitVec => out.push_str(&format!("(declare-fun {p} () (_ BitVec 32))\n")),
            Smt2Sort::Int => out.push_str(&format!("(declare-fun {p} () Int)\n")),
        }
    }
    for (name, arity) in helpers {
        let args = vec!["Int"; arity].join(" ");
        out.push_str(&format!("(declare-fun {name} ({args}) Int)\n"));
    }
    out.push_str(&blocks);
    out
}

struct Writer<'a> {
    sort: Smt2Sort,
    params: &'a [String],
    helpers: &'a mut BTreeSet<(&'static str, usize)>,
    out: String,
}

impl Writer<'_> {
    fn app(&mut self, head: &str, args: &[&SymExpr], pred_args: bool) {
        self.out.push('(');
        self.out.push_str(head);
        for a in args {
            self.out.push(' ');
            if pred_args {
                self.predicate(a);
            } else {
                self.term(a);
            }
        }
        self.out.push(')');
    }

    fn zero(&self) -> &'static str {
        match self.sort {
            Smt2Sort::BitVec => "#x00000000",
            Smt2Sort::Int => "0",
        }
    }

    /// Renders `e` as a Bool-sorted formula.
    fn predicate(&mut self, e: &SymExpr) {
        if !is_predicate(e) {
            self.out.push_str("(not (= ");
            self.term(e);
            self.out.push(' ');
            self.out.push_str(self.zero());
            self.out.push_str("))");
            return;
        }
        let bv = self.sort == Smt2Sort::BitVec;
        match e {
            SymExpr::Unary(_, a) => self.app("not", &[a], true),
            SymExpr::Binary(op, a, b) => {
                let head = match op {
                    BinaryOp::LogAnd => return self.app("and", &[a, b], true),
                    BinaryOp::LogOr => return self.app("or", &[a, b], true),
                    BinaryOp::Eq => "=",
                    BinaryOp::Ne => "distinct",
                    BinaryOp::Lt if bv => "bvslt",
                    BinaryOp::Gt if bv => "bvsgt",
                    BinaryOp::Le if bv => "bvsle",
                    BinaryOp::Ge if bv => "bvsge",
                    BinaryOp::Lt => "<",
                    BinaryOp::Gt => ">",
                    BinaryOp::Le => "<=",
                    BinaryOp::Ge => ">=",
                    _ => unreachable!("not a predicate operator"),
                };
                self.app(head, &[a, b], false);
            }
            _ => unreachable!("atoms are never predicates"),
        }
    }

    /// Renders `e` as a value of the input sort.
    fn term(&mut self, e: &SymExpr) {
        if is_predicate(e) {
            self.out.push_str("(ite ");
            self.predicate(e);
            match self.sort {
                Smt2Sort::BitVec => self.out.push_str(" #x00000001 #x00000000)"),
                Smt2Sort::Int => self.out.push_str(" 1 0)"),
            }
            return;
        }
        match (self.sort, e) {
            (Smt2Sort::BitVec, SymExpr::Const(v)) => self.out.push_str(&format!("#x{:08x}", *v as u32)),
            (Smt2Sort::Int, SymExpr::Const(v)) if *v < 0 => {
                self.out.push_str(&format!("(- {})", i64::from(*v).unsigned_abs()))
            }
            (Smt2Sort::Int, SymExpr::Const(v)) => self.out.push_str(&v.to_string()),
            (_, SymExpr::Var(i)) => self.out.push_str(&self.params[*i]),
            (Smt2Sort::BitVec, SymExpr::Unary(op, a)) => {
                let head = match op {
                    UnaryOp::Neg => "bvneg",
                    _ => "bvnot",
                };
                self.app(head, &[a], false);
            }
            (Smt2Sort::Int, SymExpr::Unary(op, a)) => {
                let head = match op {
                    UnaryOp::Neg => "-",
                    _ => self.helper("int_not", 1),
                };
                self.app(head, &[a], false);
            }
            (Smt2Sort::BitVec, SymExpr::Binary(op, a, b)) => {
                let head = match op {
                    BinaryOp::Add => "bvadd",
                    BinaryOp::Sub => "bvsub",
                    BinaryOp::Mul => "bvmul",
                    BinaryOp::Div => "bvsdiv",
                    BinaryOp::Rem => "bvsrem",
                    BinaryOp::BitAnd => "bvand",
                    BinaryOp::BitOr => "bvor",
                    BinaryOp::BitXor => "bvxor",
                    BinaryOp::Shl => return self.shift("bvshl", a, b),
                    BinaryOp::Shr => return self.shift("bvashr", a, b),
                    _ => unreachable!("predicate operators handled above"),
                };
                self.app(head, &[a, b], false);
            }
            (Smt2Sort::Int, SymExpr::Binary(op, a, b)) => {
                let head = match op {
                    BinaryOp::Add => "+",
                    BinaryOp::Sub => "-",
                    BinaryOp::Mul => "*",
                    BinaryOp::Div => "div",
                    BinaryOp::Rem => "mod",
                    BinaryOp::BitAnd => self.helper("int_and", 2),
                    BinaryOp::BitOr => self.helper("int_or", 2),
                    BinaryOp::BitXor => self.helper("int_xor", 2),
                    BinaryOp::Shl => self.helper("int_shl", 2),
                    BinaryOp::Shr => self.helper("int_shr", 2),
                    _ => unreachable!("predicate operators handled above"),
                };
                self.app(head, &[a, b], false);
            }
        }
    }

    fn helper(&mut self, name: &'static str, arity: usize) -> &'static str {
        self.helpers.insert((name, arity));
        name
    }

    /// Shift counts are taken modulo 32.
    fn shift(&mut self, head: &str, a: &SymExpr, b: &SymExpr) {
        self.out.push('(');
        self.out.push_str(head);
        self.out.push(' ');
        self.term(a);
        self.out.push(' ');
        match b {
            SymExpr::Const(c) => self.out.push_str(&format!("#x{:08x}", c & 31)),
            _ => {
                self.out.push_str("(bvand ");
                self.term(b);
                self.out.push_str(" #x0000001f)");
            }
        }
        self.out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexec::PathStatus;

    fn record(constraints: Vec<SymExpr>) -> PathRecord {
        PathRecord {
            constraints,
            status: PathStatus::Completed,
            witness: None,
            return_value: None,
            error: None,
        }
    }

    #[test]
    fn word_used_as_condition_compares_with_zero() {
        let x = SymExpr::Var(0);
        let text = emit_smt2(&[record(vec![x])], &["x".into()], Smt2Sort::BitVec);
        assert!(text.contains("(assert (not (= x #x00000000)))"));
    }

    #[test]
    fn bitwise_ops_in_int_mode_are_declared() {
        let e = SymExpr::binary(
            BinaryOp::Eq,
            SymExpr::binary(BinaryOp::BitAnd, SymExpr::Var(0), SymExpr::Const(-2)),
            SymExpr::Const(0),
        );
        let text = emit_smt2(&[record(vec![e])], &["x".into()], Smt2Sort::Int);
        assert!(text.contains("(declare-fun int_and (Int Int) Int)"));
        assert!(text.contains("(assert (= (int_and x (- 2)) 0))"));
    }

    #[test]
    fn shift_counts_are_masked() {
        let e = SymExpr::binary(
            BinaryOp::Shl,
            SymExpr::Var(0),
            SymExpr::Var(0),
        );
        let text = emit_smt2(&[record(vec![e])], &["x".into()], Smt2Sort::BitVec);
        assert!(text.contains("(bvshl x (bvand x #x0000001f))"));
    }
}
