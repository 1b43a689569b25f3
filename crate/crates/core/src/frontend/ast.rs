//! Typed AST for the mini-C subset.
//!
//! Every value is a 32-bit two's-complement integer. Bodies of `if`, `while`
//! and `for` are always [`Stmt::Block`]s: the parser wraps single statements,
//! which keeps `parse(print(ast)) == ast` exact.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReturnKind {
    Int,
    Void,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnaryOp {
    Neg,
    LogNot,
    BitNot,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::LogNot => "!",
            UnaryOp::BitNot => "~",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Shl,
    Shr,
    BitAnd,
    BitOr,
    BitXor,
    LogAnd,
    LogOr,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl BinaryOp {
    pub const ALL: [BinaryOp; 18] = [
        BinaryOp::Add,
        BinaryOp::Sub,
        BinaryOp::Mul,
        BinaryOp::Div,
        BinaryOp::Rem,
        BinaryOp::Shl,
        BinaryOp::Shr,
        BinaryOp::BitAnd,
        BinaryOp::BitOr,
        BinaryOp::BitXor,
        BinaryOp::LogAnd,
        BinaryOp::LogOr,
        BinaryOp::Eq,
        BinaryOp::Ne,
        BinaryOp::Lt,
        BinaryOp::Gt,
        BinaryOp::Le,
        BinaryOp::Ge,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Rem => "%",
            BinaryOp::Shl => "<<",
            BinaryOp::Shr => ">>",
            BinaryOp::BitAnd => "&",
            BinaryOp::BitOr => "|",
            BinaryOp::BitXor => "^",
            BinaryOp::LogAnd => "&&",
            BinaryOp::LogOr => "||",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Gt => ">",
            BinaryOp::Le => "<=",
            BinaryOp::Ge => ">=",
        }
    }

    /// Binding strength; larger binds tighter. Assignment is 1, ternary 2.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::LogOr => 3,
            BinaryOp::LogAnd => 4,
            BinaryOp::BitOr => 5,
            BinaryOp::BitXor => 6,
            BinaryOp::BitAnd => 7,
            BinaryOp::Eq | BinaryOp::Ne => 8,
            BinaryOp::Lt | BinaryOp::Gt | BinaryOp::Le | BinaryOp::Ge => 9,
            BinaryOp::Shl | BinaryOp::Shr => 10,
            BinaryOp::Add | BinaryOp::Sub => 11,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem => 12,
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Gt | BinaryOp::Le | BinaryOp::Ge
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expr {
    IntLit(i32),
    Var(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Assign(String, Box<Expr>),
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn unary(op: UnaryOp, operand: Expr) -> Expr {
        Expr::Unary(op, Box::new(operand))
    }

    pub fn assign(name: &str, value: Expr) -> Expr {
        Expr::Assign(name.to_string(), Box::new(value))
    }

    pub fn ternary(cond: Expr, then: Expr, otherwise: Expr) -> Expr {
        Expr::Ternary(Box::new(cond), Box::new(then), Box::new(otherwise))
    }

    /// True when evaluating the expression cannot assign, call, or trap.
    pub fn is_pure(&self) -> bool {
        match self {
            Expr::IntLit(_) | Expr::Var(_) => true,
            Expr::Unary(_, e) => e.is_pure(),
            Expr::Binary(op, a, b) => {
                !matches!(op, BinaryOp::Div | BinaryOp::Rem) && a.is_pure() && b.is_pure()
            }
            Expr::Ternary(c, t, e) => c.is_pure() && t.is_pure() && e.is_pure(),
            Expr::Assign(..) | Expr::Call(..) => false,
        }
    }

    /// Visits this expression and every subexpression in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::IntLit(_) | Expr::Var(_) => {}
            Expr::Unary(_, e) | Expr::Assign(_, e) => e.walk(f),
            Expr::Binary(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Expr::Ternary(c, t, e) => {
                c.walk(f);
                t.walk(f);
                e.walk(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.walk(f)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SwitchCase {
    pub label: i32,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stmt {
    Block(Vec<Stmt>),
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        else_branch: Option<Box<Stmt>>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    For {
        /// Either a `Decl` or an `Expr` statement.
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        step: Option<Expr>,
        body: Box<Stmt>,
    },
    Switch {
        scrutinee: Expr,
        cases: Vec<SwitchCase>,
        /// Always the last arm.
        default: Option<Vec<Stmt>>,
    },
    Return(Option<Expr>),
    Expr(Expr),
    Decl {
        name: String,
        init: Option<Expr>,
    },
    Break,
    Continue,
}

impl Stmt {
    pub fn if_else(cond: Expr, then: Vec<Stmt>, otherwise: Option<Vec<Stmt>>) -> Stmt {
        Stmt::If {
            cond,
            then_branch: Box::new(Stmt::Block(then)),
            else_branch: otherwise.map(|b| Box::new(Stmt::Block(b))),
        }
    }

    pub fn decl(name: &str, init: Option<Expr>) -> Stmt {
        Stmt::Decl {
            name: name.to_string(),
            init,
        }
    }

    /// Visits this statement and all nested statements in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        match self {
            Stmt::Block(stmts) => stmts.iter().for_each(|s| s.walk(f)),
            Stmt::If {
                then_branch,
                else_branch,
                ..
            } => {
                then_branch.walk(f);
                if let Some(e) = else_branch {
                    e.walk(f);
                }
            }
            Stmt::While { body, .. } => body.walk(f),
            Stmt::For { init, body, .. } => {
                if let Some(i) = init {
                    i.walk(f);
                }
                body.walk(f);
            }
            Stmt::Switch { cases, default, .. } => {
                for case in cases {
                    case.body.iter().for_each(|s| s.walk(f));
                }
                if let Some(d) = default {
                    d.iter().for_each(|s| s.walk(f));
                }
            }
            Stmt::Return(_)
            | Stmt::Expr(_)
            | Stmt::Decl { .. }
            | Stmt::Break
            | Stmt::Continue => {}
        }
    }

    /// Expressions owned directly by this statement (not by nested statements).
    pub fn own_exprs(&self) -> Vec<&Expr> {
        match self {
            Stmt::If { cond, .. } | Stmt::While { cond, .. } => vec![cond],
            Stmt::For { cond, step, .. } => cond.iter().chain(step.iter()).collect(),
            Stmt::Switch { scrutinee, .. } => vec![scrutinee],
            Stmt::Return(e) => e.iter().collect(),
            Stmt::Expr(e) => vec![e],
            Stmt::Decl { init, .. } => init.iter().collect(),
            Stmt::Block(_) | Stmt::Break | Stmt::Continue => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
    pub return_kind: ReturnKind,
}

impl FunctionDef {
    pub fn walk_stmts<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        self.body.iter().for_each(|s| s.walk(f));
    }

    /// Every expression in the body, including nested subexpressions.
    pub fn walk_exprs<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        self.walk_stmts(&mut |s| {
            for e in s.own_exprs() {
                e.walk(f);
            }
        });
    }

    pub fn contains_if(&self) -> bool {
        let mut found = false;
        self.walk_stmts(&mut |s| found |= matches!(s, Stmt::If { .. }));
        found
    }
}

/// Where a comment sits relative to the code lines of the printed program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CommentPlacement {
    /// On its own line(s), before the code line with this 0-based index.
    Before(usize),
    /// At the end of the code line with this 0-based index.
    Trailing(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Comment {
    /// 1-based inclusive line span in the text this unit was parsed from.
    pub lines: (usize, usize),
    /// Raw comment text including the `//` or `/* */` delimiters.
    pub text: String,
    pub placement: CommentPlacement,
}

/// Source lines of functions and statements, recorded by the parser.
///
/// `stmts[i][k]` is the line of the `k`-th statement of function `i` in
/// [`Stmt::walk`] pre-order. Empty for units built in memory.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineMap {
    pub functions: Vec<usize>,
    pub stmts: Vec<Vec<usize>>,
    pub total_lines: usize,
}

impl LineMap {
    pub fn function_line(&self, func: usize) -> usize {
        self.functions.get(func).copied().unwrap_or(1)
    }

    pub fn stmt_line(&self, func: usize, index: usize) -> usize {
        self.stmts
            .get(func)
            .and_then(|lines| lines.get(index))
            .copied()
            .unwrap_or_else(|| self.function_line(func))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceUnit {
    pub source_name: String,
    pub functions: Vec<FunctionDef>,
    pub comments: Vec<Comment>,
    #[serde(default)]
    pub lines: LineMap,
}

impl SourceUnit {
    pub fn new(source_name: impl Into<String>, functions: Vec<FunctionDef>) -> Self {
        SourceUnit {
            source_name: source_name.into(),
            functions,
            comments: Vec::new(),
            lines: LineMap::default(),
        }
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// Structural equality of the code, ignoring comments and the source name.
    pub fn same_code(&self, other: &SourceUnit) -> bool {
        self.functions == other.functions
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn error(line: usize, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            line: line.max(1),
            message: message.into(),
        }
    }

    pub fn warning(line: usize, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            line: line.max(1),
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "line {}: {}: {}", self.line, sev, self.message)
    }
}
