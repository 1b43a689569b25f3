use deobbench_core::frontend::parse;

/// The first fenced code block, else the whole reply if it parses as mini-C.
pub fn extract_code(raw: &str) -> Option<String> {
    if let Some(block) = first_fence(raw) {
        return Some(block);
    }
    match parse("response.c", raw) {
        Ok(unit) if !unit.functions.is_empty() => Some(raw.to_string()),
        _ => None,
    }
}

fn first_fence(raw: &str) -> Option<String> {
    let start = raw.find("```")?;
    let after = &raw[start + 3..];
    // The rest of the opening line is an info string such as `c`.
    let body_start = after.find('\n')? + 1;
    let body = &after[body_start..];
    let end = body.find("```")?;
    Some(body[..end].to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fenced_block_wins() {
        let raw = "Here you go:\n```c\nint f(void) { return 1; }\n```\nand more ```c\nx\n```";
        assert_eq!(extract_code(raw).as_deref(), Some("int f(void) { return 1; }\n"));
    }

    #[test]
    fn bare_program_is_taken_whole() {
        let raw = "int f(int x) { return x; }\n";
        assert_eq!(extract_code(raw).as_deref(), Some(raw));
    }

    #[test]
    fn prose_yields_nothing() {
        assert_eq!(extract_code("I cannot help with that."), None);
        assert_eq!(extract_code("```c\nunterminated"), None);
    }
}
