use std::collections::HashMap;
use std::sync::Arc;

use crate::frontend::semantics::{eval_binary_total, eval_unary};
use crate::frontend::{print_expr, BinaryOp, Expr, UnaryOp};

/// A 32-bit bit-vector term over the entry function's parameters.
///
/// `Var(i)` is the `i`-th parameter. Division and remainder by zero follow
/// SMT-LIB `bvsdiv`/`bvsrem`; explored paths never reach them because the
/// engine forks on zero divisors first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SymExpr {
    Const(i32),
    Var(usize),
    Unary(UnaryOp, Arc<SymExpr>),
    Binary(BinaryOp, Arc<SymExpr>, Arc<SymExpr>),
}

impl SymExpr {
    pub fn unary(op: UnaryOp, a: SymExpr) -> SymExpr {
        SymExpr::Unary(op, Arc::new(a))
    }

    pub fn binary(op: BinaryOp, a: SymExpr, b: SymExpr) -> SymExpr {
        SymExpr::Binary(op, Arc::new(a), Arc::new(b))
    }

    pub fn as_const(&self) -> Option<i32> {
        match self {
            SymExpr::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn eval(&self, env: &[i32]) -> i32 {
        match self {
            SymExpr::Const(v) => *v,
            SymExpr::Var(i) => env[*i],
            SymExpr::Unary(op, a) => eval_unary(*op, a.eval(env)),
            SymExpr::Binary(op, a, b) => eval_binary_total(*op, a.eval(env), b.eval(env)),
        }
    }

    /// Node count of the term written out as a tree, saturating at `cap + 1`.
    /// Shared subterms are visited once.
    pub fn tree_size(&self, cap: u64) -> u64 {
        fn go(e: &SymExpr, cap: u64, memo: &mut HashMap<*const SymExpr, u64>) -> u64 {
            let key = e as *const SymExpr;
            if let Some(&n) = memo.get(&key) {
                return n;
            }
            let n = match e {
                SymExpr::Const(_) | SymExpr::Var(_) => 1,
                SymExpr::Unary(_, a) => 1 + go(a, cap, memo),
                SymExpr::Binary(_, a, b) => 1 + go(a, cap, memo) + go(b, cap, memo),
            }
            .min(cap + 1);
            memo.insert(key, n);
            n
        }
        go(self, cap, &mut HashMap::new())
    }

    /// Whether the value is always 0 or 1.
    pub fn is_boolean(&self) -> bool {
        match self {
            SymExpr::Const(v) => *v == 0 || *v == 1,
            SymExpr::Unary(UnaryOp::LogNot, _) => true,
            SymExpr::Binary(op, ..) => {
                op.is_comparison() || matches!(op, BinaryOp::LogAnd | BinaryOp::LogOr)
            }
            _ => false,
        }
    }

    /// Indices of the variables that occur in the term, ascending.
    pub fn vars(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<usize>) {
        match self {
            SymExpr::Const(_) => {}
            SymExpr::Var(i) => out.push(*i),
            SymExpr::Unary(_, a) => a.collect_vars(out),
            SymExpr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn constants(&self, out: &mut Vec<i32>) {
        match self {
            SymExpr::Const(v) => out.push(*v),
            SymExpr::Var(_) => {}
            SymExpr::Unary(_, a) => a.constants(out),
            SymExpr::Binary(_, a, b) => {
                a.constants(out);
                b.constants(out);
            }
        }
    }

    /// C-style rendering with parameter names and minimal parentheses.
    pub fn display(&self, params: &[String]) -> String {
        print_expr(&self.to_expr(params))
    }

    pub fn to_expr(&self, params: &[String]) -> Expr {
        match self {
            SymExpr::Const(v) => Expr::IntLit(*v),
            SymExpr::Var(i) => Expr::Var(params.get(*i).cloned().unwrap_or_else(|| format!("arg{i}"))),
            SymExpr::Unary(op, a) => Expr::Unary(*op, Box::new(a.to_expr(params))),
            SymExpr::Binary(op, a, b) => {
                Expr::Binary(*op, Box::new(a.to_expr(params)), Box::new(b.to_expr(params)))
            }
        }
    }
}

/// Truth of `e` as a constraint: `e` itself when boolean, else `e != 0`.
pub fn truthy(e: &Arc<SymExpr>) -> Arc<SymExpr> {
    if e.is_boolean() {
        e.clone()
    } else {
        Arc::new(SymExpr::Binary(BinaryOp::Ne, e.clone(), Arc::new(SymExpr::Const(0))))
    }
}

/// Negation of `e` as a constraint.
pub fn falsy(e: &Arc<SymExpr>) -> Arc<SymExpr> {
    if e.is_boolean() {
        Arc::new(SymExpr::Unary(UnaryOp::LogNot, e.clone()))
    } else {
        Arc::new(SymExpr::Binary(BinaryOp::Eq, e.clone(), Arc::new(SymExpr::Const(0))))
    }
}

/// Builds a unary node, evaluating it when the operand is constant.
pub fn mk_unary(op: UnaryOp, a: Arc<SymExpr>) -> Arc<SymExpr> {
    match *a {
        SymExpr::Const(v) => Arc::new(SymExpr::Const(eval_unary(op, v))),
        _ => Arc::new(SymExpr::Unary(op, a)),
    }
}

/// Builds a binary node, evaluating it when both operands are constant.
pub fn mk_binary(op: BinaryOp, a: Arc<SymExpr>, b: Arc<SymExpr>) -> Arc<SymExpr> {
    match (&*a, &*b) {
        (SymExpr::Const(x), SymExpr::Const(y)) => {
            Arc::new(SymExpr::Const(eval_binary_total(op, *x, *y)))
        }
        _ => Arc::new(SymExpr::Binary(op, a, b)),
    }
}

/// Bottom-up constant folding plus a few algebraic identities that hold
/// under wrapping 32-bit arithmetic, notably `E - E -> 0`.
pub fn fold_constants(e: &SymExpr) -> SymExpr {
    let mut folder = Folder::default();
    let arc = Arc::new(e.clone());
    (*folder.fold(&arc)).clone()
}

pub(crate) fn fold_arc(e: &Arc<SymExpr>) -> Arc<SymExpr> {
    Folder::default().fold(e)
}

/// Folding memoizes on node identity so shared subterms are visited once.
#[derive(Default)]
struct Folder {
    memo: HashMap<*const SymExpr, Arc<SymExpr>>,
}

fn konst(v: i32) -> Arc<SymExpr> {
    Arc::new(SymExpr::Const(v))
}

fn is_plus_one_of(candidate: &SymExpr, e: &SymExpr) -> bool {
    match candidate {
        SymExpr::Binary(BinaryOp::Add, a, b) => {
            (**a == *e && b.as_const() == Some(1)) || (**b == *e && a.as_const() == Some(1))
        }
        _ => false,
    }
}

impl Folder {
    fn fold(&mut self, e: &Arc<SymExpr>) -> Arc<SymExpr> {
        let key = Arc::as_ptr(e);
        if let Some(done) = self.memo.get(&key) {
            return done.clone();
        }
        let out = match &**e {
            SymExpr::Const(_) | SymExpr::Var(_) => e.clone(),
            SymExpr::Unary(op, a) => {
                let a = self.fold(a);
                simplify_unary(*op, a)
            }
            SymExpr::Binary(op, a, b) => {
                let a = self.fold(a);
                let b = self.fold(b);
                simplify_binary(*op, a, b)
            }
        };
        self.memo.insert(key, out.clone());
        out
    }
}

fn simplify_unary(op: UnaryOp, a: Arc<SymExpr>) -> Arc<SymExpr> {
    match (&*a, op) {
        (SymExpr::Const(v), _) => konst(eval_unary(op, *v)),
        (SymExpr::Unary(UnaryOp::Neg, inner), UnaryOp::Neg)
        | (SymExpr::Unary(UnaryOp::BitNot, inner), UnaryOp::BitNot) => inner.clone(),
        _ => Arc::new(SymExpr::Unary(op, a)),
    }
}

fn simplify_binary(op: BinaryOp, a: Arc<SymExpr>, b: Arc<SymExpr>) -> Arc<SymExpr> {
    use BinaryOp::*;
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        return konst(eval_binary_total(op, x, y));
    }
    if a == b {
        match op {
            Sub | BitXor | Ne | Lt | Gt => return konst(0),
            Eq | Le | Ge => return konst(1),
            BitAnd | BitOr => return a,
            _ => {}
        }
    }
    let (ca, cb) = (a.as_const(), b.as_const());
    match (op, ca, cb) {
        (Add | BitOr | BitXor, Some(0), _) | (Mul, Some(1), _) => return b,
        (Add | Sub | BitOr | BitXor | Shl | Shr, _, Some(0)) | (Mul | Div, _, Some(1)) => return a,
        (Mul | BitAnd, Some(0), _) | (Mul | BitAnd, _, Some(0)) | (Rem, _, Some(1 | -1)) => {
            return konst(0)
        }
        _ => {}
    }
    // Reassociate chains of constant offsets: (E + c1) + c2 -> E + (c1 + c2).
    if let (Add | Sub, Some(c2)) = (op, cb) {
        if let SymExpr::Binary(inner @ (Add | Sub), e, c1) = &*a {
            if let Some(c1) = c1.as_const() {
                let sign = |o: BinaryOp, v: i32| if o == Add { v } else { v.wrapping_neg() };
                let total = sign(*inner, c1).wrapping_add(sign(op, c2));
                return simplify_binary(Add, e.clone(), konst(total));
            }
        }
    }
    if op == Rem {
        if let Some(m) = cb {
            if m > 0 && (m as u32).is_power_of_two() {
                if let SymExpr::Binary(Mul, x, y) = &*a {
                    let scaled = [x.as_const(), y.as_const()]
                        .into_iter()
                        .flatten()
                        .any(|c| c % m == 0);
                    let consecutive = m == 2 && (is_plus_one_of(y, x) || is_plus_one_of(x, y));
                    if scaled || consecutive {
                        return konst(0);
                    }
                }
            }
        }
    }
    Arc::new(SymExpr::Binary(op, a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: usize) -> SymExpr {
        SymExpr::Var(i)
    }

    fn c(x: i32) -> SymExpr {
        SymExpr::Const(x)
    }

    #[test]
    fn opaque_template_folds_to_one() {
        use BinaryOp::*;
        let sq = || SymExpr::binary(Mul, v(0), v(0));
        let e = SymExpr::binary(Add, SymExpr::binary(Sub, sq(), sq()), c(1));
        assert_eq!(fold_constants(&e), c(1));
        let guard = SymExpr::binary(Gt, e, c(0));
        assert_eq!(fold_constants(&guard), c(1));
    }

    #[test]
    fn fixpoints_and_constant_subtrees() {
        use BinaryOp::*;
        assert_eq!(fold_constants(&v(0)), v(0));
        let e = SymExpr::binary(Add, SymExpr::binary(Mul, c(3), c(4)), v(0));
        assert_eq!(fold_constants(&e), SymExpr::binary(Add, c(12), v(0)));
    }

    #[test]
    fn offset_chains_collapse() {
        use BinaryOp::*;
        let mut e = v(0);
        for _ in 0..5 {
            e = SymExpr::binary(Sub, e, c(3));
        }
        assert_eq!(fold_constants(&e), SymExpr::binary(Add, v(0), c(-15)));
    }

    #[test]
    fn parity_templates_fold() {
        use BinaryOp::*;
        let doubled = SymExpr::binary(Rem, SymExpr::binary(Mul, c(2), v(0)), c(2));
        assert_eq!(fold_constants(&doubled), c(0));
        let consecutive = SymExpr::binary(
            Rem,
            SymExpr::binary(Mul, v(0), SymExpr::binary(Add, v(0), c(1))),
            c(2),
        );
        assert_eq!(fold_constants(&consecutive), c(0));
        let not_parity = SymExpr::binary(Rem, SymExpr::binary(Mul, c(3), v(0)), c(2));
        assert!(fold_constants(&not_parity).as_const().is_none());
    }
}
