//! Name resolution, arity, placement and return-path checks.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::semantics::{eval_binary, eval_unary};

struct FnSig {
    arity: usize,
    return_kind: ReturnKind,
}

pub fn typecheck(unit: &SourceUnit) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut sigs: HashMap<&str, FnSig> = HashMap::new();
    for (i, f) in unit.functions.iter().enumerate() {
        if sigs.contains_key(f.name.as_str()) {
            diags.push(Diagnostic::error(
                unit.lines.function_line(i),
                format!("redefinition of function `{}`", f.name),
            ));
            continue;
        }
        sigs.insert(
            &f.name,
            FnSig {
                arity: f.params.len(),
                return_kind: f.return_kind,
            },
        );
    }

    for (i, f) in unit.functions.iter().enumerate() {
        let mut checker = Checker {
            sigs: &sigs,
            lines: &unit.lines,
            func_index: i,
            func: f,
            scopes: vec![HashSet::new()],
            loop_depth: 0,
            breakable_depth: 0,
            stmt_index: 0,
            current_line: unit.lines.function_line(i),
            diags: &mut diags,
        };
        checker.check_function();
    }
    diags
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

struct Checker<'a> {
    sigs: &'a HashMap<&'a str, FnSig>,
    lines: &'a LineMap,
    func_index: usize,
    func: &'a FunctionDef,
    scopes: Vec<HashSet<String>>,
    loop_depth: usize,
    breakable_depth: usize,
    stmt_index: usize,
    current_line: usize,
    diags: &'a mut Vec<Diagnostic>,
}

impl Checker<'_> {
    fn error(&mut self, message: String) {
        self.diags.push(Diagnostic::error(self.current_line, message));
    }

    fn check_function(&mut self) {
        let func = self.func;
        for p in &func.params {
            if !self.scopes[0].insert(p.clone()) {
                self.error(format!("duplicate parameter `{p}` in `{}`", func.name));
            }
        }
        // Parameters and top-level locals share one scope, as in C.
        self.check_list(&func.body);
        if func.return_kind == ReturnKind::Int && list_completes(&func.body) {
            self.diags.push(Diagnostic::error(
                self.lines.function_line(self.func_index),
                format!(
                    "control reaches the end of int function `{}` without a return",
                    func.name
                ),
            ));
        }
    }

    fn check_list(&mut self, stmts: &[Stmt]) {
        for s in stmts {
            self.check_stmt(s);
        }
    }

    fn scoped(&mut self, f: impl FnOnce(&mut Self)) {
        self.scopes.push(HashSet::new());
        f(self);
        self.scopes.pop();
    }

    fn visit(&mut self) {
        self.current_line = self.lines.stmt_line(self.func_index, self.stmt_index);
        self.stmt_index += 1;
    }

    fn check_stmt(&mut self, s: &Stmt) {
        self.visit();
        match s {
            Stmt::Block(stmts) => self.scoped(|c| c.check_list(stmts)),
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                self.check_expr(cond, true);
                self.check_stmt(then_branch);
                if let Some(e) = else_branch {
                    self.check_stmt(e);
                }
            }
            Stmt::While { cond, body } => {
                self.check_expr(cond, true);
                self.in_loop(|c| c.check_stmt(body));
            }
            Stmt::For {
                init,
                cond,
                step,
                body,
            } => self.scoped(|c| {
                if let Some(init) = init {
                    c.check_stmt(init);
                }
                let line = c.current_line;
                if let Some(cond) = cond {
                    c.check_expr(cond, true);
                }
                if let Some(step) = step {
                    c.check_expr(step, false);
                }
                c.current_line = line;
                c.in_loop(|c| c.check_stmt(body));
            }),
            Stmt::Switch {
                scrutinee,
                cases,
                default,
            } => {
                self.check_expr(scrutinee, true);
                let mut seen = HashSet::new();
                for case in cases {
                    if !seen.insert(case.label) {
                        self.error(format!("duplicate case label {}", case.label));
                    }
                }
                self.breakable_depth += 1;
                // All arms share one scope, as in C.
                self.scoped(|c| {
                    for case in cases {
                        c.check_list(&case.body);
                    }
                    if let Some(d) = default {
                        c.check_list(d);
                    }
                });
                self.breakable_depth -= 1;
            }
            Stmt::Return(value) => match (self.func.return_kind, value) {
                (ReturnKind::Int, Some(e)) => self.check_expr(e, true),
                (ReturnKind::Int, None) => {
                    self.error(format!("`return;` in int function `{}`", self.func.name))
                }
                (ReturnKind::Void, Some(e)) => {
                    self.check_expr(e, true);
                    self.error(format!(
                        "`return` with a value in void function `{}`",
                        self.func.name
                    ));
                }
                (ReturnKind::Void, None) => {}
            },
            Stmt::Expr(e) => self.check_expr(e, false),
            Stmt::Decl { name, init } => {
                if let Some(e) = init {
                    self.check_expr(e, true);
                }
                let scope = self.scopes.last_mut().expect("scope stack is never empty");
                if !scope.insert(name.clone()) {
                    self.error(format!("redeclaration of `{name}`"));
                }
            }
            Stmt::Break => {
                if self.breakable_depth == 0 {
                    self.error("`break` outside of a loop or switch".to_string());
                }
            }
            Stmt::Continue => {
                if self.loop_depth == 0 {
                    self.error("`continue` outside of a loop".to_string());
                }
            }
        }
    }

    fn in_loop(&mut self, f: impl FnOnce(&mut Self)) {
        self.loop_depth += 1;
        self.breakable_depth += 1;
        f(self);
        self.loop_depth -= 1;
        self.breakable_depth -= 1;
    }

    fn is_variable(&self, name: &str) -> bool {
        self.scopes.iter().any(|s| s.contains(name))
    }

    fn check_name(&mut self, name: &str) {
        if self.is_variable(name) {
            return;
        }
        if self.sigs.contains_key(name) {
            self.error(format!("function `{name}` used as a value"));
        } else {
            self.error(format!("use of undeclared identifier `{name}`"));
        }
    }

    fn check_expr(&mut self, e: &Expr, value_needed: bool) {
        match e {
            Expr::IntLit(_) => {}
            Expr::Var(name) => self.check_name(name),
            Expr::Unary(_, operand) => self.check_expr(operand, true),
            Expr::Binary(_, a, b) => {
                self.check_expr(a, true);
                self.check_expr(b, true);
            }
            Expr::Assign(name, value) => {
                self.check_expr(value, true);
                self.check_name(name);
            }
            Expr::Ternary(c, t, f) => {
                self.check_expr(c, true);
                self.check_expr(t, true);
                self.check_expr(f, true);
            }
            Expr::Call(name, args) => {
                for a in args {
                    self.check_expr(a, true);
                }
                match self.sigs.get(name.as_str()) {
                    None => self.error(format!("call to undeclared function `{name}`")),
                    Some(sig) => {
                        let (arity, kind) = (sig.arity, sig.return_kind);
                        if arity != args.len() {
                            self.error(format!(
                                "`{name}` expects {arity} argument(s), got {}",
                                args.len()
                            ));
                        }
                        if value_needed && kind == ReturnKind::Void {
                            self.error(format!("void function `{name}` used as a value"));
                        }
                    }
                }
            }
        }
    }
}

/// Value of an expression built only from literals and operators, if it has one.
pub fn const_value(e: &Expr) -> Option<i32> {
    match e {
        Expr::IntLit(v) => Some(*v),
        Expr::Unary(op, a) => Some(eval_unary(*op, const_value(a)?)),
        Expr::Binary(BinaryOp::LogAnd, a, b) => {
            let a = const_value(a)?;
            if a == 0 {
                Some(0)
            } else {
                Some(i32::from(const_value(b)? != 0))
            }
        }
        Expr::Binary(BinaryOp::LogOr, a, b) => {
            let a = const_value(a)?;
            if a != 0 {
                Some(1)
            } else {
                Some(i32::from(const_value(b)? != 0))
            }
        }
        Expr::Binary(op, a, b) => eval_binary(*op, const_value(a)?, const_value(b)?).ok(),
        Expr::Ternary(c, t, f) => {
            if const_value(c)? != 0 {
                const_value(t)
            } else {
                const_value(f)
            }
        }
        Expr::Var(_) | Expr::Assign(..) | Expr::Call(..) => None,
    }
}

fn always_true(cond: Option<&Expr>) -> bool {
    cond.is_none_or(|c| const_value(c).is_some_and(|v| v != 0))
}

/// Whether control can fall off the end of the statement list.
pub fn list_completes(stmts: &[Stmt]) -> bool {
    stmts.iter().all(stmt_completes)
}

fn stmt_completes(s: &Stmt) -> bool {
    match s {
        Stmt::Block(stmts) => list_completes(stmts),
        Stmt::If {
            then_branch,
            else_branch,
            ..
        } => stmt_completes(then_branch) || else_branch.as_deref().is_none_or(stmt_completes),
        Stmt::While { cond, body } => !always_true(Some(cond)) || breaks_out(body),
        Stmt::For { cond, body, .. } => !always_true(cond.as_ref()) || breaks_out(body),
        Stmt::Switch { cases, default, .. } => match default {
            None => true,
            Some(d) => {
                cases.iter().any(|c| c.body.iter().any(breaks_out)) || d.iter().any(breaks_out)
                    || list_completes(d)
            }
        },
        Stmt::Return(_) | Stmt::Break | Stmt::Continue => false,
        Stmt::Expr(_) | Stmt::Decl { .. } => true,
    }
}

/// Whether a `break` inside `s` targets the statement enclosing `s`.
fn breaks_out(s: &Stmt) -> bool {
    match s {
        Stmt::Break => true,
        Stmt::Block(stmts) => stmts.iter().any(breaks_out),
        Stmt::If {
            then_branch,
            else_branch,
            ..
        } => breaks_out(then_branch) || else_branch.as_deref().is_some_and(breaks_out),
        Stmt::While { .. } | Stmt::For { .. } | Stmt::Switch { .. } => false,
        Stmt::Return(_) | Stmt::Expr(_) | Stmt::Decl { .. } | Stmt::Continue => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    fn check(src: &str) -> Vec<Diagnostic> {
        typecheck(&parse("t.c", src).unwrap())
    }

    #[test]
    fn textbook_branching_function_is_clean() {
        let src = "int f(int x) {\n    if (x > 0) {\n        return x + 1;\n    } else {\n        return x - 1;\n    }\n}\n";
        assert_eq!(check(src), vec![]);
    }

    #[test]
    fn undeclared_callee() {
        let diags = check("int f(int x) {\n    return g2(x);\n}\n");
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("g2"));
        assert_eq!(diags[0].line, 2);
    }

    #[test]
    fn missing_return_path() {
        let diags = check("int f(int x) {\n    if (x > 0) {\n        return 1;\n    }\n}\n");
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("without a return"));
        assert_eq!(diags[0].line, 1);
    }

    #[test]
    fn infinite_dispatch_loop_needs_no_trailing_return() {
        let src = "int f(int x) { int state = 0; while (1) { switch (state) { case 0: state = x > 0 ? 1 : 2; break; case 1: return x + 1; case 2: return x - 1; } } }";
        assert_eq!(check(src), vec![]);
    }

    #[test]
    fn loop_with_break_can_fall_through() {
        let diags = check("int f(int x) { while (1) { if (x) break; } }");
        assert_eq!(diags.len(), 1);
    }

    #[test]
    fn placement_and_arity_errors() {
        let diags = check(
            "void v(int a) { return; }\nint f(int x) {\n break;\n continue;\n x = v(1);\n v(1, 2);\n y = 3;\n return f;\n}\n",
        );
        let lines: Vec<_> = diags.iter().map(|d| d.line).collect();
        assert_eq!(lines, vec![3, 4, 5, 6, 7, 8]);
    }

    #[test]
    fn duplicate_labels_and_scoping() {
        let diags = check(
            "int f(int x) { switch (x) { case 1: return 1; case 1: return 2; } { int t = 1; } return t; }",
        );
        assert_eq!(diags.len(), 2);
    }

    #[test]
    fn shadowing_in_nested_scope_is_allowed() {
        assert_eq!(
            check("int f(int x) { int y = x; { int y = 2; x = y; } return y; }"),
            vec![]
        );
        assert_eq!(check("int f(int x) { int x = 1; return x; }").len(), 1);
    }

    #[test]
    fn const_value_folds_literal_expressions() {
        let unit = parse("t.c", "int f(void) { return (7 * 7 - 7 * 7 + 1) > 0 && 1 / 1; }").unwrap();
        let Stmt::Return(Some(e)) = &unit.functions[0].body[0] else {
            panic!()
        };
        assert_eq!(const_value(e), Some(1));
    }
}
