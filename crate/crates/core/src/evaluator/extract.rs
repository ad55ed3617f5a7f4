use crate::codebleu::tokenize_code;
use crate::prompt::{BUGGY_HEADER, FIXED_HEADER};

fn fence(line: &str) -> bool {
    line.trim_start().starts_with("```")
}

fn fenced_blocks(raw: &str) -> Option<String> {
    if !raw.lines().any(fence) {
        return None;
    }
    let mut blocks: Vec<Vec<&str>> = Vec::new();
    let mut open: Option<Vec<&str>> = None;
    for line in raw.lines() {
        if fence(line) {
            match open.take() {
                Some(b) => blocks.push(b),
                None => open = Some(Vec::new()),
            }
        } else if let Some(b) = open.as_mut() {
            b.push(line);
        }
    }
    if let Some(b) = open {
        blocks.push(b);
    }
    Some(blocks.into_iter().map(|b| b.join("\n")).collect::<Vec<_>>().join("\n"))
}

/// Natural-language line around code: no code tokens at all, an echoed
/// section header, or a lead-in sentence such as "Here is the fix:".
fn is_prose(line: &str) -> bool {
    let t = line.trim();
    if t == FIXED_HEADER || t == BUGGY_HEADER {
        return true;
    }
    if tokenize_code(t).iter().all(|tok| tok.kind.is_comment()) {
        return t.is_empty() || !t.starts_with("//") && !t.starts_with("/*");
    }
    let words = t.split_whitespace().count();
    if words >= 3 && t.ends_with(':') {
        return true;
    }
    words >= 2 && t.ends_with('.') && !t.contains([';', '{', '}', '=', '(', ')'])
}

/// Best-effort removal of chat framing around a code answer.
pub fn extract_code(raw: &str) -> String {
    if let Some(code) = fenced_blocks(raw) {
        return code;
    }
    let lines: Vec<&str> = raw.lines().collect();
    let Some(first) = lines.iter().position(|l| !is_prose(l)) else {
        return raw.to_string();
    };
    let last = lines.iter().rposition(|l| !is_prose(l)).expect("a code line exists");
    if first == 0 && last + 1 == lines.len() {
        return raw.to_string();
    }
    lines[first..=last].join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fenced() {
        assert_eq!(extract_code("```java\nint a = 1;\n```"), "int a = 1;");
        assert_eq!(extract_code("Sure.\n```\na();\n```\nand\n```java\nb();\n```\nDone."), "a();\nb();");
        assert_eq!(extract_code("```java\nint a = 1;"), "int a = 1;");
    }

    #[test]
    fn leading_and_trailing_prose() {
        assert_eq!(extract_code("Here is the fix:\nint a = 1;"), "int a = 1;");
        assert_eq!(extract_code("int a = 1;\n\nThis adds the missing initializer value."), "int a = 1;");
        assert_eq!(extract_code("<Fixed Code>\nreturn x;\n"), "return x;");
    }

    #[test]
    fn code_is_unchanged() {
        for code in ["int a = 1;", "public void f() {\n  // keep me\n  g();\n}\n", "", "case A:\n  break;", "@Override"] {
            assert_eq!(extract_code(code), code);
        }
    }

    #[test]
    fn all_prose_is_unchanged() {
        let p = "I could not find a bug here.";
        assert_eq!(extract_code(p), p);
    }
}
