use serde::{Deserialize, Serialize};

/// Line counts of a source text.
///
/// A line holding both code and a comment counts toward both `code_lines`
/// and `comment_lines`, so `code + comment + blank` may exceed `total`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LineCounts {
    pub total_lines: usize,
    pub code_lines: usize,
    pub comment_lines: usize,
}

pub fn count_loc(text: &str) -> LineCounts {
    let mut counts = LineCounts::default();
    let mut in_block = false;
    for line in text.lines() {
        counts.total_lines += 1;
        let (has_code, has_comment) = scan_line(line, &mut in_block);
        counts.code_lines += usize::from(has_code);
        counts.comment_lines += usize::from(has_comment);
    }
    counts
}

/// Returns (has code, has comment) and updates the block-comment state.
fn scan_line(line: &str, in_block: &mut bool) -> (bool, bool) {
    let mut has_code = false;
    let mut has_comment = false;
    let mut rest = line;
    loop {
        if *in_block {
            if !rest.trim().is_empty() {
                has_comment = true;
            }
            match rest.find("*/") {
                Some(end) => {
                    *in_block = false;
                    rest = &rest[end + 2..];
                }
                None => break,
            }
        } else {
            let line_c = rest.find("//");
            let block_c = rest.find("/*");
            let start = match (line_c, block_c) {
                (Some(a), Some(b)) => a.min(b),
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (None, None) => {
                    has_code |= !rest.trim().is_empty();
                    break;
                }
            };
            has_code |= !rest[..start].trim().is_empty();
            has_comment = true;
            if Some(start) == line_c {
                break;
            }
            *in_block = true;
            rest = &rest[start + 2..];
        }
    }
    (has_code, has_comment)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text() {
        assert_eq!(count_loc(""), LineCounts::default());
    }

    #[test]
    fn ten_line_file() {
        let text = "// a\nint f(void) {\n    // b\n    int x = 1;\n\n    /* c */\n    x = x + 1;\n    x = x * 2;\n    return x;\n}\n";
        let c = count_loc(text);
        assert_eq!((c.total_lines, c.code_lines, c.comment_lines), (10, 6, 3));
    }

    #[test]
    fn trailing_comments_count_as_comment_lines() {
        let text = "if (c) { // always true\n    return 0; /* unreachable */\n}\n";
        let c = count_loc(text);
        assert_eq!((c.total_lines, c.code_lines, c.comment_lines), (3, 3, 2));
    }

    #[test]
    fn multi_line_block_comment() {
        let text = "/* one\n\n three */ int x;\n";
        let c = count_loc(text);
        assert_eq!((c.total_lines, c.code_lines, c.comment_lines), (3, 1, 2));
    }
}
