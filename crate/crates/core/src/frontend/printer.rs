//! Canonical pretty-printer: 4-space indent, one statement per line,
//! minimal parentheses.

use super::ast::*;

const INDENT: &str = "    ";

pub fn pretty_print(unit: &SourceUnit) -> String {
    render(unit).0
}

/// Printed text plus, per function, the 0-based code-line index of each
/// statement in [`Stmt::walk`] pre-order.
pub fn render(unit: &SourceUnit) -> (String, Vec<Vec<usize>>) {
    let mut p = Printer::default();
    let mut layout = Vec::with_capacity(unit.functions.len());
    let mut starts = Vec::with_capacity(unit.functions.len());
    for func in &unit.functions {
        starts.push(p.lines.len());
        p.stmt_lines.clear();
        p.function(func);
        layout.push(std::mem::take(&mut p.stmt_lines));
    }
    (merge_comments(&p.lines, &starts, &unit.comments), layout)
}

pub fn print_function(func: &FunctionDef) -> String {
    let mut p = Printer::default();
    p.function(func);
    let mut out = String::new();
    for (indent, text) in &p.lines {
        push_line(&mut out, *indent, text);
    }
    out
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

fn push_line(out: &mut String, indent: usize, text: &str) {
    for _ in 0..indent {
        out.push_str(INDENT);
    }
    out.push_str(text);
    out.push('\n');
}

fn merge_comments(lines: &[(usize, String)], fn_starts: &[usize], comments: &[Comment]) -> String {
    let mut before: Vec<Vec<&str>> = vec![Vec::new(); lines.len() + 1];
    let mut trailing: Vec<Vec<&str>> = vec![Vec::new(); lines.len()];
    for c in comments {
        match c.placement {
            CommentPlacement::Trailing(i) if i < lines.len() => trailing[i].push(&c.text),
            CommentPlacement::Before(i) | CommentPlacement::Trailing(i) => {
                before[i.min(lines.len())].push(&c.text)
            }
        }
    }
    let mut out = String::new();
    for (i, (indent, text)) in lines.iter().enumerate() {
        if i > 0 && fn_starts.contains(&i) {
            out.push('\n');
        }
        for c in &before[i] {
            push_line(&mut out, *indent, c);
        }
        if trailing[i].is_empty() {
            push_line(&mut out, *indent, text);
        } else {
            let joined = format!("{text} {}", trailing[i].join(" "));
            push_line(&mut out, *indent, &joined);
        }
    }
    for c in &before[lines.len()] {
        push_line(&mut out, 0, c);
    }
    out
}

#[derive(Default)]
struct Printer {
    lines: Vec<(usize, String)>,
    stmt_lines: Vec<usize>,
    indent: usize,
}

impl Printer {
    fn emit(&mut self, text: String) {
        self.lines.push((self.indent, text));
    }

    fn mark(&mut self) {
        self.stmt_lines.push(self.lines.len());
    }

    fn mark_last(&mut self) {
        self.stmt_lines.push(self.lines.len().saturating_sub(1));
    }

    fn function(&mut self, func: &FunctionDef) {
        let ret = match func.return_kind {
            ReturnKind::Int => "int",
            ReturnKind::Void => "void",
        };
        let params = if func.params.is_empty() {
            "void".to_string()
        } else {
            func.params
                .iter()
                .map(|p| format!("int {p}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        self.emit(format!("{ret} {}({params}) {{", func.name));
        self.indent += 1;
        for s in &func.body {
            self.stmt(s);
        }
        self.indent -= 1;
        self.emit("}".to_string());
    }

    /// Prints the contents of a body block; the braces belong to the caller's line.
    fn body(&mut self, body: &Stmt) {
        self.mark_last();
        self.indent += 1;
        match body {
            Stmt::Block(stmts) => stmts.iter().for_each(|s| self.stmt(s)),
            other => self.stmt(other),
        }
        self.indent -= 1;
    }

    fn stmt(&mut self, s: &Stmt) {
        self.mark();
        match s {
            Stmt::Block(stmts) => {
                self.emit("{".to_string());
                self.indent += 1;
                stmts.iter().for_each(|s| self.stmt(s));
                self.indent -= 1;
                self.emit("}".to_string());
            }
            Stmt::If { .. } => {
                self.stmt_lines.pop();
                self.if_chain(s, "");
            }
            Stmt::While { cond, body } => {
                self.emit(format!("while ({}) {{", print_expr(cond)));
                self.body(body);
                self.emit("}".to_string());
            }
            Stmt::For {
                init,
                cond,
                step,
                body,
            } => {
                let init_text = init.as_deref().map(simple_stmt_text).unwrap_or_default();
                let mut header = format!("for ({init_text};");
                if let Some(c) = cond {
                    header.push(' ');
                    header.push_str(&print_expr(c));
                }
                header.push(';');
                if let Some(st) = step {
                    header.push(' ');
                    header.push_str(&print_expr(st));
                }
                header.push_str(") {");
                self.emit(header);
                if init.is_some() {
                    self.mark_last();
                }
                self.body(body);
                self.emit("}".to_string());
            }
            Stmt::Switch {
                scrutinee,
                cases,
                default,
            } => {
                self.emit(format!("switch ({}) {{", print_expr(scrutinee)));
                self.indent += 1;
                for case in cases {
                    self.emit(format!("case {}:", case.label));
                    self.indent += 1;
                    case.body.iter().for_each(|s| self.stmt(s));
                    self.indent -= 1;
                }
                if let Some(d) = default {
                    self.emit("default:".to_string());
                    self.indent += 1;
                    d.iter().for_each(|s| self.stmt(s));
                    self.indent -= 1;
                }
                self.indent -= 1;
                self.emit("}".to_string());
            }
            other => {
                let text = simple_stmt_text(other);
                self.emit(format!("{text};"));
            }
        }
    }

    fn if_chain(&mut self, s: &Stmt, prefix: &str) {
        let Stmt::If {
            cond,
            then_branch,
            else_branch,
        } = s
        else {
            unreachable!("if_chain on non-if")
        };
        self.emit(format!("{prefix}if ({}) {{", print_expr(cond)));
        self.mark_last();
        self.body(then_branch);
        match else_branch.as_deref() {
            None => self.emit("}".to_string()),
            Some(Stmt::Block(inner)) if matches!(inner.as_slice(), [Stmt::If { .. }]) => {
                // `else if`: the wrapping block and the nested if share a line.
                self.mark();
                self.if_chain(&inner[0], "} else ");
            }
            Some(other) => {
                self.emit("} else {".to_string());
                self.body(other);
                self.emit("}".to_string());
            }
        }
    }
}

/// Text of a statement that fits on one line, without the trailing `;`.
fn simple_stmt_text(s: &Stmt) -> String {
    match s {
        Stmt::Decl { name, init: None } => format!("int {name}"),
        Stmt::Decl {
            name,
            init: Some(e),
        } => format!("int {name} = {}", print_expr(e)),
        Stmt::Expr(e) => print_expr(e),
        Stmt::Return(None) => "return".to_string(),
        Stmt::Return(Some(e)) => format!("return {}", print_expr(e)),
        Stmt::Break => "break".to_string(),
        Stmt::Continue => "continue".to_string(),
        other => unreachable!("not a simple statement: {other:?}"),
    }
}

fn expr_precedence(e: &Expr) -> u8 {
    match e {
        Expr::IntLit(v) if *v < 0 => 13,
        Expr::IntLit(_) | Expr::Var(_) | Expr::Call(..) => 14,
        Expr::Unary(..) => 13,
        Expr::Binary(op, ..) => op.precedence(),
        Expr::Ternary(..) => 2,
        Expr::Assign(..) => 1,
    }
}

fn write_expr(out: &mut String, e: &Expr, min_prec: u8) {
    let parens = expr_precedence(e) < min_prec;
    if parens {
        out.push('(');
    }
    match e {
        Expr::IntLit(v) => out.push_str(&v.to_string()),
        Expr::Var(name) => out.push_str(name),
        Expr::Unary(op, operand) => {
            out.push_str(op.symbol());
            // `-5` would reparse as a literal and `--x` as a decrement.
            let guard = *op == UnaryOp::Neg
                && matches!(**operand, Expr::IntLit(_) | Expr::Unary(UnaryOp::Neg, _));
            if guard {
                out.push('(');
                write_expr(out, operand, 0);
                out.push(')');
            } else {
                write_expr(out, operand, 13);
            }
        }
        Expr::Binary(op, a, b) => {
            let p = op.precedence();
            write_expr(out, a, p);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_expr(out, b, p + 1);
        }
        Expr::Assign(name, value) => {
            out.push_str(name);
            out.push_str(" = ");
            write_expr(out, value, 1);
        }
        Expr::Ternary(c, t, f) => {
            write_expr(out, c, 3);
            out.push_str(" ? ");
            write_expr(out, t, 1);
            out.push_str(" : ");
            write_expr(out, f, 2);
        }
        Expr::Call(name, args) => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, 1);
            }
            out.push(')');
        }
    }
    if parens {
        out.push(')');
    }
}
