//! Recursive-descent parser for mini-C.
//!
//! Desugarings: `x op= e` becomes `x = x op e`; `++x`, `x++` (statement
//! position only) become `x = x + 1`; `-<literal>` is a single negative
//! literal; `int a, b;` becomes two declarations; `;` is an empty block.

use super::ast::*;
use super::lexer::{lex, Token, TokenKind};

const MAX_NESTING: usize = 256;

pub fn parse(source_name: &str, src: &str) -> Result<SourceUnit, Vec<Diagnostic>> {
    let lexed = lex(src).map_err(|d| vec![d])?;
    let mut parser = Parser {
        tokens: &lexed.tokens,
        pos: 0,
        depth: 0,
        stmt_lines: Vec::new(),
    };
    let mut functions = Vec::new();
    let mut lines = LineMap {
        total_lines: lexed.total_lines,
        ..LineMap::default()
    };
    while !parser.at_eof() {
        lines.functions.push(parser.line());
        let func = parser.function().map_err(|d| vec![d])?;
        lines.stmts.push(std::mem::take(&mut parser.stmt_lines));
        functions.push(func);
    }

    let mut code_lines: Vec<usize> = lexed
        .tokens
        .iter()
        .filter(|t| t.kind != TokenKind::Eof)
        .map(|t| t.line)
        .collect();
    code_lines.dedup();
    let comments = lexed
        .comments
        .into_iter()
        .map(|c| {
            let placement = if c.trailing {
                CommentPlacement::Trailing(code_lines.partition_point(|&l| l < c.start_line))
            } else {
                CommentPlacement::Before(code_lines.partition_point(|&l| l < c.start_line))
            };
            Comment {
                lines: (c.start_line, c.end_line),
                text: c.text,
                placement,
            }
        })
        .collect();

    Ok(SourceUnit {
        source_name: source_name.to_string(),
        functions,
        comments,
        lines,
    })
}

/// Parses arbitrary bytes; invalid UTF-8 is reported as a diagnostic.
pub fn parse_bytes(source_name: &str, bytes: &[u8]) -> Result<SourceUnit, Vec<Diagnostic>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(source_name, text),
        Err(e) => {
            let line = 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count();
            Err(vec![Diagnostic::error(line, "source is not valid UTF-8")])
        }
    }
}

type PResult<T> = Result<T, Diagnostic>;

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    depth: usize,
    stmt_lines: Vec<usize>,
}

fn describe(kind: &TokenKind) -> String {
    match kind {
        TokenKind::Ident(name) => format!("identifier `{name}`"),
        TokenKind::Number(n) => format!("number {n}"),
        TokenKind::Punct(p) => format!("`{p}`"),
        TokenKind::Eof => "end of file".to_string(),
        kw => format!("keyword `{}`", format!("{kw:?}").trim_start_matches("Kw").to_lowercase()),
    }
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn peek_at(&self, offset: usize) -> &TokenKind {
        let idx = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[idx].kind
    }

    fn line(&self) -> usize {
        self.tokens[self.pos].line
    }

    fn at_eof(&self) -> bool {
        *self.peek() == TokenKind::Eof
    }

    fn bump(&mut self) -> &TokenKind {
        let kind = &self.tokens[self.pos].kind;
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        kind
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), TokenKind::Punct(q) if *q == p)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(Diagnostic::error(
            self.line(),
            format!("expected {expected}, found {}", describe(self.peek())),
        ))
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.error(&format!("`{p}`"))
        }
    }

    fn expect_kw(&mut self, kw: TokenKind) -> PResult<()> {
        if *self.peek() == kw {
            self.bump();
            Ok(())
        } else {
            self.error(&describe(&kw))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            TokenKind::Ident(name) => {
                let name = name.clone();
                self.bump();
                Ok(name)
            }
            _ => self.error("identifier"),
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(Diagnostic::error(self.line(), "nesting too deep"));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn function(&mut self) -> PResult<FunctionDef> {
        let return_kind = match self.peek() {
            TokenKind::KwInt => ReturnKind::Int,
            TokenKind::KwVoid => ReturnKind::Void,
            _ => return self.error("`int` or `void` function definition"),
        };
        self.bump();
        let name = self.ident()?;
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if *self.peek() == TokenKind::KwVoid && matches!(self.peek_at(1), TokenKind::Punct(")")) {
            self.bump();
        } else if !self.is_punct(")") {
            loop {
                self.expect_kw(TokenKind::KwInt)?;
                params.push(self.ident()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        let body = self.block_contents()?;
        Ok(FunctionDef {
            name,
            params,
            body,
            return_kind,
        })
    }

    /// `{ stmt* }`, returning the statements.
    fn block_contents(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.is_punct("}") {
            if self.at_eof() {
                return self.error("`}`");
            }
            self.statement(&mut stmts)?;
        }
        self.bump();
        Ok(stmts)
    }

    /// Body of `if`/`while`/`for`: always a block.
    fn body(&mut self) -> PResult<Box<Stmt>> {
        self.stmt_lines.push(self.line());
        let stmts = if self.is_punct("{") {
            self.block_contents()?
        } else {
            let mut stmts = Vec::new();
            self.statement(&mut stmts)?;
            stmts
        };
        Ok(Box::new(Stmt::Block(stmts)))
    }

    fn statement(&mut self, out: &mut Vec<Stmt>) -> PResult<()> {
        self.enter()?;
        let result = self.statement_inner(out);
        self.leave();
        result
    }

    fn statement_inner(&mut self, out: &mut Vec<Stmt>) -> PResult<()> {
        let line = self.line();
        if *self.peek() == TokenKind::KwInt {
            return self.declaration(out);
        }
        self.stmt_lines.push(line);
        let stmt = match self.peek().clone() {
            TokenKind::Punct("{") => Stmt::Block(self.block_contents()?),
            TokenKind::Punct(";") => {
                self.bump();
                Stmt::Block(Vec::new())
            }
            TokenKind::KwIf => {
                self.bump();
                self.expect_punct("(")?;
                let cond = self.expr()?;
                self.expect_punct(")")?;
                let then_branch = self.body()?;
                let else_branch = if *self.peek() == TokenKind::KwElse {
                    self.bump();
                    Some(self.body()?)
                } else {
                    None
                };
                Stmt::If {
                    cond,
                    then_branch,
                    else_branch,
                }
            }
            TokenKind::KwWhile => {
                self.bump();
                self.expect_punct("(")?;
                let cond = self.expr()?;
                self.expect_punct(")")?;
                Stmt::While {
                    cond,
                    body: self.body()?,
                }
            }
            TokenKind::KwFor => self.for_statement()?,
            TokenKind::KwSwitch => self.switch_statement()?,
            TokenKind::KwReturn => {
                self.bump();
                let value = if self.is_punct(";") {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect_punct(";")?;
                Stmt::Return(value)
            }
            TokenKind::KwBreak => {
                self.bump();
                self.expect_punct(";")?;
                Stmt::Break
            }
            TokenKind::KwContinue => {
                self.bump();
                self.expect_punct(";")?;
                Stmt::Continue
            }
            TokenKind::KwVoid => {
                return Err(Diagnostic::error(line, "`void` locals are not supported"));
            }
            _ => {
                let e = self.discarded_expr(";")?;
                self.expect_punct(";")?;
                Stmt::Expr(e)
            }
        };
        out.push(stmt);
        Ok(())
    }

    fn declaration(&mut self, out: &mut Vec<Stmt>) -> PResult<()> {
        self.expect_kw(TokenKind::KwInt)?;
        loop {
            self.stmt_lines.push(self.line());
            let name = self.ident()?;
            let init = if self.eat_punct("=") {
                Some(self.assignment()?)
            } else {
                None
            };
            out.push(Stmt::Decl { name, init });
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(";")
    }

    fn for_statement(&mut self) -> PResult<Stmt> {
        self.bump();
        self.expect_punct("(")?;
        let init = if self.eat_punct(";") {
            None
        } else if *self.peek() == TokenKind::KwInt {
            self.bump();
            self.stmt_lines.push(self.line());
            let name = self.ident()?;
            let init = if self.eat_punct("=") {
                Some(self.assignment()?)
            } else {
                None
            };
            if self.is_punct(",") {
                return Err(Diagnostic::error(
                    self.line(),
                    "only one declaration is supported in a for initializer",
                ));
            }
            self.expect_punct(";")?;
            Some(Box::new(Stmt::Decl { name, init }))
        } else {
            self.stmt_lines.push(self.line());
            let e = self.discarded_expr(";")?;
            self.expect_punct(";")?;
            Some(Box::new(Stmt::Expr(e)))
        };
        let cond = if self.is_punct(";") {
            None
        } else {
            Some(self.expr()?)
        };
        self.expect_punct(";")?;
        let step = if self.is_punct(")") {
            None
        } else {
            Some(self.discarded_expr(")")?)
        };
        self.expect_punct(")")?;
        Ok(Stmt::For {
            init,
            cond,
            step,
            body: self.body()?,
        })
    }

    fn switch_statement(&mut self) -> PResult<Stmt> {
        self.bump();
        self.expect_punct("(")?;
        let scrutinee = self.expr()?;
        self.expect_punct(")")?;
        self.expect_punct("{")?;
        let mut cases: Vec<SwitchCase> = Vec::new();
        let mut default: Option<Vec<Stmt>> = None;
        loop {
            match self.peek() {
                TokenKind::Punct("}") => {
                    self.bump();
                    break;
                }
                TokenKind::KwCase => {
                    if default.is_some() {
                        return Err(Diagnostic::error(
                            self.line(),
                            "`default` must be the last switch label",
                        ));
                    }
                    self.bump();
                    let label = self.case_label()?;
                    self.expect_punct(":")?;
                    cases.push(SwitchCase {
                        label,
                        body: Vec::new(),
                    });
                }
                TokenKind::KwDefault => {
                    if default.is_some() {
                        return Err(Diagnostic::error(self.line(), "duplicate `default` label"));
                    }
                    self.bump();
                    self.expect_punct(":")?;
                    default = Some(Vec::new());
                }
                TokenKind::Eof => return self.error("`}`"),
                _ => {
                    let target = match (&mut default, cases.last_mut()) {
                        (Some(d), _) => d,
                        (None, Some(case)) => &mut case.body,
                        (None, None) => return self.error("`case` or `default`"),
                    };
                    let mut stmts = std::mem::take(target);
                    let result = self.statement(&mut stmts);
                    let target = match (&mut default, cases.last_mut()) {
                        (Some(d), _) => d,
                        (None, Some(case)) => &mut case.body,
                        (None, None) => unreachable!(),
                    };
                    *target = stmts;
                    result?;
                }
            }
        }
        Ok(Stmt::Switch {
            scrutinee,
            cases,
            default,
        })
    }

    fn case_label(&mut self) -> PResult<i32> {
        let negative = self.eat_punct("-");
        match *self.peek() {
            TokenKind::Number(n) => {
                self.bump();
                self.literal_value(n, negative)
            }
            _ => self.error("integer case label"),
        }
    }

    fn literal_value(&self, magnitude: u64, negative: bool) -> PResult<i32> {
        let value = if negative {
            -(magnitude as i64)
        } else {
            magnitude as i64
        };
        i32::try_from(value).map_err(|_| {
            Diagnostic::error(
                self.line(),
                format!("integer literal {value} out of int32 range"),
            )
        })
    }

    /// An expression whose value is discarded: the only place `x++` is accepted.
    fn discarded_expr(&mut self, terminator: &str) -> PResult<Expr> {
        if let (TokenKind::Ident(name), TokenKind::Punct(op @ ("++" | "--")), TokenKind::Punct(t)) =
            (self.peek(), self.peek_at(1), self.peek_at(2))
        {
            if *t == terminator {
                let name = name.clone();
                let op = if *op == "++" {
                    BinaryOp::Add
                } else {
                    BinaryOp::Sub
                };
                self.bump();
                self.bump();
                return Ok(increment(&name, op));
            }
        }
        self.expr()
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.assignment()
    }

    fn assignment(&mut self) -> PResult<Expr> {
        if let (TokenKind::Ident(name), TokenKind::Punct(op)) = (self.peek(), self.peek_at(1)) {
            let compound = match *op {
                "=" => Some(None),
                "+=" => Some(Some(BinaryOp::Add)),
                "-=" => Some(Some(BinaryOp::Sub)),
                "*=" => Some(Some(BinaryOp::Mul)),
                "/=" => Some(Some(BinaryOp::Div)),
                "%=" => Some(Some(BinaryOp::Rem)),
                "&=" => Some(Some(BinaryOp::BitAnd)),
                "|=" => Some(Some(BinaryOp::BitOr)),
                "^=" => Some(Some(BinaryOp::BitXor)),
                "<<=" => Some(Some(BinaryOp::Shl)),
                ">>=" => Some(Some(BinaryOp::Shr)),
                _ => None,
            };
            if let Some(op) = compound {
                let name = name.clone();
                self.bump();
                self.bump();
                self.enter()?;
                let value = self.assignment();
                self.leave();
                let value = value?;
                let value = match op {
                    None => value,
                    Some(op) => Expr::binary(op, Expr::Var(name.clone()), value),
                };
                return Ok(Expr::Assign(name, Box::new(value)));
            }
        }
        self.ternary()
    }

    fn ternary(&mut self) -> PResult<Expr> {
        let cond = self.binary(3)?;
        if !self.eat_punct("?") {
            return Ok(cond);
        }
        self.enter()?;
        let result = (|| {
            let then = self.expr()?;
            self.expect_punct(":")?;
            let otherwise = self.ternary()?;
            Ok(Expr::ternary(cond, then, otherwise))
        })();
        self.leave();
        result
    }

    fn binary_op(&self) -> Option<BinaryOp> {
        let TokenKind::Punct(p) = self.peek() else {
            return None;
        };
        BinaryOp::ALL.into_iter().find(|op| op.symbol() == *p)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            self.enter()?;
            let rhs = self.binary(prec + 1);
            self.leave();
            lhs = Expr::binary(op, lhs, rhs?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        self.enter()?;
        let result = self.unary_inner();
        self.leave();
        result
    }

    fn unary_inner(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            TokenKind::Punct("-") => {
                self.bump();
                if let TokenKind::Number(n) = *self.peek() {
                    self.bump();
                    return Ok(Expr::IntLit(self.literal_value(n, true)?));
                }
                Ok(Expr::unary(UnaryOp::Neg, self.unary()?))
            }
            TokenKind::Punct("!") => {
                self.bump();
                Ok(Expr::unary(UnaryOp::LogNot, self.unary()?))
            }
            TokenKind::Punct("~") => {
                self.bump();
                Ok(Expr::unary(UnaryOp::BitNot, self.unary()?))
            }
            TokenKind::Punct(op @ ("++" | "--")) => {
                self.bump();
                let name = self.ident()?;
                let op = if op == "++" {
                    BinaryOp::Add
                } else {
                    BinaryOp::Sub
                };
                Ok(increment(&name, op))
            }
            TokenKind::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                self.no_postfix_increment()?;
                Ok(e)
            }
            TokenKind::Number(n) => {
                self.bump();
                Ok(Expr::IntLit(self.literal_value(n, false)?))
            }
            TokenKind::Ident(name) => {
                self.bump();
                if self.eat_punct("(") {
                    let mut args = Vec::new();
                    if !self.is_punct(")") {
                        loop {
                            args.push(self.assignment()?);
                            if !self.eat_punct(",") {
                                break;
                            }
                        }
                    }
                    self.expect_punct(")")?;
                    return Ok(Expr::Call(name, args));
                }
                self.no_postfix_increment()?;
                Ok(Expr::Var(name))
            }
            _ => self.error("expression"),
        }
    }

    fn no_postfix_increment(&self) -> PResult<()> {
        if self.is_punct("++") || self.is_punct("--") {
            return Err(Diagnostic::error(
                self.line(),
                "postfix increment is only supported as a statement",
            ));
        }
        Ok(())
    }
}

fn increment(name: &str, op: BinaryOp) -> Expr {
    Expr::assign(name, Expr::binary(op, Expr::var(name), Expr::IntLit(1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_ok(src: &str) -> SourceUnit {
        parse("t.c", src).unwrap_or_else(|d| panic!("{d:?}"))
    }

    #[test]
    fn parses_increment_function() {
        let unit = parse_ok("int h(int a) { return a + 1; }");
        assert_eq!(unit.functions.len(), 1);
        let h = &unit.functions[0];
        assert_eq!(h.name, "h");
        assert_eq!(
            h.body,
            vec![Stmt::Return(Some(Expr::binary(
                BinaryOp::Add,
                Expr::var("a"),
                Expr::IntLit(1)
            )))]
        );
    }

    #[test]
    fn empty_source_has_no_functions() {
        assert!(parse_ok("").functions.is_empty());
    }

    #[test]
    fn malformed_header_reports_line_one() {
        let diags = parse("t.c", "int f( {").unwrap_err();
        assert_eq!(diags.len(), 1);
        assert!(diags[0].is_error());
        assert_eq!(diags[0].line, 1);
    }

    #[test]
    fn negative_literals_fold_but_parenthesized_ones_do_not() {
        let unit = parse_ok("int f(void) { return -5 + -(5) + -2147483648; }");
        let Stmt::Return(Some(e)) = &unit.functions[0].body[0] else {
            panic!()
        };
        let expected = Expr::binary(
            BinaryOp::Add,
            Expr::binary(
                BinaryOp::Add,
                Expr::IntLit(-5),
                Expr::unary(UnaryOp::Neg, Expr::IntLit(5)),
            ),
            Expr::IntLit(i32::MIN),
        );
        assert_eq!(*e, expected);
    }

    #[test]
    fn precedence_and_associativity() {
        let unit = parse_ok("int f(int a, int b) { return a - b - 1 << 2 == a * b + 3; }");
        let Stmt::Return(Some(e)) = &unit.functions[0].body[0] else {
            panic!()
        };
        let sub = Expr::binary(
            BinaryOp::Sub,
            Expr::binary(BinaryOp::Sub, Expr::var("a"), Expr::var("b")),
            Expr::IntLit(1),
        );
        let lhs = Expr::binary(BinaryOp::Shl, sub, Expr::IntLit(2));
        let rhs = Expr::binary(
            BinaryOp::Add,
            Expr::binary(BinaryOp::Mul, Expr::var("a"), Expr::var("b")),
            Expr::IntLit(3),
        );
        assert_eq!(*e, Expr::binary(BinaryOp::Eq, lhs, rhs));
    }

    #[test]
    fn desugars_compound_assignment_and_increments() {
        let unit = parse_ok(
            "void f(int n) { int i; for (i = 0; i < n; i++) { n -= 2; } ++n; }",
        );
        let body = &unit.functions[0].body;
        let Stmt::For { step, body: loop_body, .. } = &body[1] else {
            panic!()
        };
        assert_eq!(
            step.as_ref().unwrap(),
            &Expr::assign("i", Expr::binary(BinaryOp::Add, Expr::var("i"), Expr::IntLit(1)))
        );
        assert_eq!(
            **loop_body,
            Stmt::Block(vec![Stmt::Expr(Expr::assign(
                "n",
                Expr::binary(BinaryOp::Sub, Expr::var("n"), Expr::IntLit(2))
            ))])
        );
    }

    #[test]
    fn postfix_increment_rejected_inside_expression() {
        assert!(parse("t.c", "int f(int x) { return x++ + 1; }").is_err());
    }

    #[test]
    fn single_statement_bodies_are_wrapped() {
        let unit = parse_ok("int k(int z) { if (z > 0) return 1; else return -1; }");
        let Stmt::If {
            then_branch,
            else_branch,
            ..
        } = &unit.functions[0].body[0]
        else {
            panic!()
        };
        assert_eq!(
            **then_branch,
            Stmt::Block(vec![Stmt::Return(Some(Expr::IntLit(1)))])
        );
        assert_eq!(
            **else_branch.as_ref().unwrap(),
            Stmt::Block(vec![Stmt::Return(Some(Expr::IntLit(-1)))])
        );
    }

    #[test]
    fn default_must_be_last() {
        let src = "int f(int x) { switch (x) { default: return 0; case 1: return 1; } }";
        assert!(parse("t.c", src).is_err());
    }

    #[test]
    fn statement_lines_follow_walk_order() {
        let src = "int f(int x) {\n  int y = 1;\n  if (x)\n    y = 2;\n  return y;\n}\n";
        let unit = parse_ok(src);
        let mut count = 0;
        unit.functions[0].walk_stmts(&mut |_| count += 1);
        assert_eq!(unit.lines.stmts[0].len(), count);
        assert_eq!(unit.lines.stmts[0], vec![2, 3, 4, 4, 5]);
    }

    #[test]
    fn invalid_utf8_is_a_diagnostic() {
        let diags = parse_bytes("t.c", b"int f(void) {\n\xff }").unwrap_err();
        assert_eq!(diags[0].line, 2);
    }

    #[test]
    fn deep_nesting_is_rejected_not_overflowed() {
        let src = format!("int f(void) {{ return {}1{}; }}", "(".repeat(5000), ")".repeat(5000));
        assert!(parse("t.c", &src).is_err());
    }
}
