use super::FormatError;
use crate::symexec::TestCase;

pub fn emit_ktest(tc: &TestCase, index: usize) -> String {
    let mut out = format!("ktest {index}\n");
    for (i, (name, value)) in tc.objects.iter().enumerate() {
        out.push_str(&format!("object {i}: name: \"{name}\", data: {value}\n"));
    }
    out
}

pub fn parse_ktest(text: &str) -> Result<TestCase, FormatError> {
    parse_ktest_indexed(text).map(|(_, tc)| tc)
}

/// Parses a ktest file, returning its index and test case.
pub fn parse_ktest_indexed(text: &str) -> Result<(usize, TestCase), FormatError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| FormatError::new(1, "empty file"))?;
    let index = header
        .strip_prefix("ktest ")
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| FormatError::new(1, "expected `ktest <index>`"))?;
    let mut objects = Vec::new();
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let object = parse_object(line, objects.len()).map_err(|m| FormatError::new(n + 1, m))?;
        objects.push(object);
    }
    Ok((index, TestCase { objects }))
}

fn parse_object(line: &str, expected: usize) -> Result<(String, i32), String> {
    let rest = line
        .strip_prefix("object ")
        .ok_or("expected `object <i>: ...`")?;
    let (num, rest) = rest.split_once(": ").ok_or("missing `:` after object index")?;
    if num.parse::<usize>().ok() != Some(expected) {
        return Err(format!("expected object {expected}, found `{num}`"));
    }
    let rest = rest.strip_prefix("name: \"").ok_or("expected `name: \"...\"`")?;
    let (name, rest) = rest.split_once('"').ok_or("unterminated name")?;
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(format!("bad object name `{name}`"));
    }
    let data = rest.strip_prefix(", data: ").ok_or("expected `, data: <int>`")?;
    let value = data.parse().map_err(|_| format!("bad data `{data}`"))?;
    Ok((name.to_string(), value))
}
