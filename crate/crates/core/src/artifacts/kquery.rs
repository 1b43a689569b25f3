//! A small KQuery dialect: one `array <name> : w32` declaration per input,
//! then one `(query [ <constraint>* ] false)` per path, with prefix
//! operators over 32-bit words and decimal constants.

use super::{reported, FormatError};
use crate::frontend::{BinaryOp, UnaryOp};
use crate::symexec::{PathRecord, SymExpr};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KQueryFile {
    pub arrays: Vec<String>,
    pub queries: Vec<Vec<SymExpr>>,
}

const BINARY: [(&str, BinaryOp); 18] = [
    ("Add", BinaryOp::Add),
    ("Sub", BinaryOp::Sub),
    ("Mul", BinaryOp::Mul),
    ("SDiv", BinaryOp::Div),
    ("SRem", BinaryOp::Rem),
    ("Shl", BinaryOp::Shl),
    ("AShr", BinaryOp::Shr),
    ("And", BinaryOp::BitAnd),
    ("Or", BinaryOp::BitOr),
    ("Xor", BinaryOp::BitXor),
    ("LAnd", BinaryOp::LogAnd),
    ("LOr", BinaryOp::LogOr),
    ("Eq", BinaryOp::Eq),
    ("Ne", BinaryOp::Ne),
    ("Slt", BinaryOp::Lt),
    ("Sgt", BinaryOp::Gt),
    ("Sle", BinaryOp::Le),
    ("Sge", BinaryOp::Ge),
];

const UNARY: [(&str, UnaryOp); 3] = [
    ("Neg", UnaryOp::Neg),
    ("Not", UnaryOp::BitNot),
    ("LNot", UnaryOp::LogNot),
];

pub fn emit_kquery(records: &[PathRecord], params: &[String]) -> String {
    let mut out = String::new();
    for p in params {
        out.push_str(&format!("array {p} : w32\n"));
    }
    for r in reported(records) {
        out.push_str("(query [");
        for c in &r.constraints {
            out.push(' ');
            write(&mut out, c, params);
        }
        out.push_str(" ] false)\n");
    }
    out
}

fn write(out: &mut String, e: &SymExpr, params: &[String]) {
    match e {
        SymExpr::Const(v) => out.push_str(&v.to_string()),
        SymExpr::Var(i) => out.push_str(&params[*i]),
        SymExpr::Unary(op, a) => {
            let name = UNARY.iter().find(|(_, o)| o == op).map(|(n, _)| *n).unwrap();
            out.push_str(&format!("({name} "));
            write(out, a, params);
            out.push(')');
        }
        SymExpr::Binary(op, a, b) => {
            let name = BINARY.iter().find(|(_, o)| o == op).map(|(n, _)| *n).unwrap();
            out.push_str(&format!("({name} "));
            write(out, a, params);
            out.push(' ');
            write(out, b, params);
            out.push(')');
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok<'a> {
    Open,
    Close,
    LBracket,
    RBracket,
    Word(&'a str),
}

fn tokenize(text: &str) -> Vec<(usize, Tok<'_>)> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let mut rest = line;
        loop {
            rest = rest.trim_start();
            let Some(c) = rest.chars().next() else { break };
            let tok = match c {
                '(' => Tok::Open,
                ')' => Tok::Close,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                _ => {
                    let end = rest
                        .find(|c: char| c.is_whitespace() || "()[]".contains(c))
                        .unwrap_or(rest.len());
                    out.push((n + 1, Tok::Word(&rest[..end])));
                    rest = &rest[end..];
                    continue;
                }
            };
            out.push((n + 1, tok));
            rest = &rest[1..];
        }
    }
    out
}

struct Parser<'a> {
    toks: Vec<(usize, Tok<'a>)>,
    pos: usize,
    arrays: Vec<String>,
}

impl<'a> Parser<'a> {
    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or(self.toks.last())
            .map_or(1, |(n, _)| *n)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, FormatError> {
        Err(FormatError::new(self.line(), message))
    }

    fn next(&mut self) -> Result<Tok<'a>, FormatError> {
        match self.toks.get(self.pos) {
            Some((_, t)) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => self.err("unexpected end of input"),
        }
    }

    fn expect(&mut self, want: Tok<'_>) -> Result<(), FormatError> {
        let got = self.next()?;
        if got != want {
            self.pos -= 1;
            return self.err(format!("expected {want:?}, found {got:?}"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<SymExpr, FormatError> {
        match self.next()? {
            Tok::Word(w) => {
                if let Ok(v) = w.parse::<i32>() {
                    return Ok(SymExpr::Const(v));
                }
                match self.arrays.iter().position(|a| a == w) {
                    Some(i) => Ok(SymExpr::Var(i)),
                    None => {
                        self.pos -= 1;
                        self.err(format!("undeclared array `{w}`"))
                    }
                }
            }
            Tok::Open => {
                let Tok::Word(head) = self.next()? else {
                    self.pos -= 1;
                    return self.err("expected operator");
                };
                let e = if let Some((_, op)) = UNARY.iter().find(|(n, _)| *n == head) {
                    SymExpr::unary(*op, self.expr()?)
                } else if let Some((_, op)) = BINARY.iter().find(|(n, _)| *n == head) {
                    let a = self.expr()?;
                    let b = self.expr()?;
                    SymExpr::binary(*op, a, b)
                } else {
                    self.pos -= 1;
                    return self.err(format!("unknown operator `{head}`"));
                };
                self.expect(Tok::Close)?;
                Ok(e)
            }
            other => {
                self.pos -= 1;
                self.err(format!("unexpected {other:?}"))
            }
        }
    }
}

pub fn parse_kquery(text: &str) -> Result<KQueryFile, FormatError> {
    let mut p = Parser {
        toks: tokenize(text),
        pos: 0,
        arrays: Vec::new(),
    };
    while p.toks.get(p.pos).is_some_and(|(_, t)| *t == Tok::Word("array")) {
        p.pos += 1;
        let Tok::Word(name) = p.next()? else {
            return p.err("expected array name");
        };
        p.expect(Tok::Word(":"))?;
        p.expect(Tok::Word("w32"))?;
        p.arrays.push(name.to_string());
    }
    let mut queries = Vec::new();
    while p.pos < p.toks.len() {
        p.expect(Tok::Open)?;
        p.expect(Tok::Word("query"))?;
        p.expect(Tok::LBracket)?;
        let mut constraints = Vec::new();
        while p.toks.get(p.pos).is_some_and(|(_, t)| *t != Tok::RBracket) {
            constraints.push(p.expr()?);
        }
        p.expect(Tok::RBracket)?;
        p.expect(Tok::Word("false"))?;
        p.expect(Tok::Close)?;
        queries.push(constraints);
    }
    Ok(KQueryFile {
        arrays: p.arrays,
        queries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn declarations_only() {
        let f = parse_kquery("array x : w32\narray y : w32\n").unwrap();
        assert_eq!(f.arrays, vec!["x", "y"]);
        assert!(f.queries.is_empty());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_kquery("array x : w32\n(query [ (Sgt y 0) ] false)\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("undeclared"));
        assert!(parse_kquery("(query [ (Frob x) ] false)").is_err());
    }
}
