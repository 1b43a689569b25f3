use super::ast::Diagnostic;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    /// Unsigned magnitude; range checks happen in the parser, where the sign is known.
    Number(u64),
    KwInt,
    KwVoid,
    KwIf,
    KwElse,
    KwWhile,
    KwFor,
    KwSwitch,
    KwCase,
    KwDefault,
    KwReturn,
    KwBreak,
    KwContinue,
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawComment {
    pub start_line: usize,
    pub end_line: usize,
    pub text: String,
    /// A code token precedes the comment on its starting line.
    pub trailing: bool,
}

#[derive(Debug, Default)]
pub struct Lexed {
    pub tokens: Vec<Token>,
    pub comments: Vec<RawComment>,
    pub total_lines: usize,
}

// Longest first so that maximal munch works with a linear scan.
const PUNCTUATORS: &[&str] = &[
    "<<=", ">>=", "&&", "||", "==", "!=", "<=", ">=", "<<", ">>", "++", "--", "+=", "-=", "*=",
    "/=", "%=", "&=", "|=", "^=", "+", "-", "*", "/", "%", "&", "|", "^", "!", "~", "<", ">", "=",
    "?", ":", ";", ",", "(", ")", "{", "}",
];

fn keyword(word: &str) -> Option<TokenKind> {
    Some(match word {
        "int" => TokenKind::KwInt,
        "void" => TokenKind::KwVoid,
        "if" => TokenKind::KwIf,
        "else" => TokenKind::KwElse,
        "while" => TokenKind::KwWhile,
        "for" => TokenKind::KwFor,
        "switch" => TokenKind::KwSwitch,
        "case" => TokenKind::KwCase,
        "default" => TokenKind::KwDefault,
        "return" => TokenKind::KwReturn,
        "break" => TokenKind::KwBreak,
        "continue" => TokenKind::KwContinue,
        _ => return None,
    })
}

pub fn count_lines(text: &str) -> usize {
    if text.is_empty() {
        0
    } else {
        text.lines().count()
    }
}

pub fn lex(src: &str) -> Result<Lexed, Diagnostic> {
    let bytes = src.as_bytes();
    let mut out = Lexed {
        total_lines: count_lines(src),
        ..Lexed::default()
    };
    let mut line = 1usize;
    let mut last_token_line = 0usize;
    let mut i = 0usize;

    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            let end = src[i..].find('\n').map_or(bytes.len(), |off| i + off);
            out.comments.push(RawComment {
                start_line: line,
                end_line: line,
                text: src[i..end].trim_end().to_string(),
                trailing: last_token_line == line,
            });
            i = end;
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            let Some(off) = src[i + 2..].find("*/") else {
                return Err(Diagnostic::error(line, "unterminated block comment"));
            };
            let end = i + 2 + off + 2;
            let text = &src[i..end];
            let start_line = line;
            line += text.matches('\n').count();
            out.comments.push(RawComment {
                start_line,
                end_line: line,
                text: text.to_string(),
                trailing: last_token_line == start_line,
            });
            i = end;
            continue;
        }

        let kind = if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &src[start..i];
            keyword(word).unwrap_or_else(|| TokenKind::Ident(word.to_string()))
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                i += 1;
            }
            TokenKind::Number(parse_number(&src[start..i], line)?)
        } else if let Some(p) = PUNCTUATORS
            .iter()
            .find(|p| bytes[i..].starts_with(p.as_bytes()))
        {
            i += p.len();
            TokenKind::Punct(p)
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(Diagnostic::error(
                line,
                format!("unexpected character {ch:?}"),
            ));
        };
        out.tokens.push(Token { kind, line });
        last_token_line = line;
    }
    out.tokens.push(Token {
        kind: TokenKind::Eof,
        line: line.min(out.total_lines.max(1)),
    });
    Ok(out)
}

fn parse_number(text: &str, line: usize) -> Result<u64, Diagnostic> {
    let parsed = if let Some(hex) = text
        .strip_prefix("0x")
        .or_else(|| text.strip_prefix("0X"))
    {
        u64::from_str_radix(hex, 16)
    } else {
        text.parse::<u64>()
    };
    match parsed {
        // Anything past 2^31 cannot be an int32 literal even with a minus sign.
        Ok(v) if v <= 1 << 31 => Ok(v),
        Ok(_) => Err(Diagnostic::error(
            line,
            format!("integer literal {text} out of int32 range"),
        )),
        Err(_) => Err(Diagnostic::error(
            line,
            format!("malformed integer literal {text:?}"),
        )),
    }
}
