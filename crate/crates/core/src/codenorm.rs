//! Canonical, comment-free rendering of Java snippets and exact-code-match.

use serde::{Deserialize, Serialize};

use crate::java::{self, ParseContext, Token, TokenKind};

/// Marker words the prompt renderer inserts as `[WORD]` lines.
pub const MARKER_WORDS: &[&str] = &["BUG_LOCATION", "FIX_START", "FIX_END"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedCode {
    pub canonical_text: String,
    pub token_stream: Vec<(TokenKind, String)>,
    pub parse_ok: bool,
}

/// Blank out marker triples (`[FIX_START]` etc.) that sit on a line of their
/// own or at a statement boundary. Offsets are preserved.
pub fn strip_markers(code: &str) -> String {
    let tokens = java::tokenize(code);
    let drop = marker_tokens(code, &tokens);
    if drop.is_empty() {
        return code.to_string();
    }
    let mut out = code.as_bytes().to_vec();
    for i in drop {
        for b in &mut out[tokens[i].span.clone()] {
            *b = b' ';
        }
    }
    // markers are ASCII, so blanking them keeps the text valid UTF-8
    String::from_utf8(out).expect("ascii blanking")
}

fn line_starts(src: &str) -> Vec<usize> {
    std::iter::once(0).chain(src.match_indices('\n').map(|(i, _)| i + 1)).collect()
}

fn line_of(starts: &[usize], offset: usize) -> usize {
    starts.partition_point(|&s| s <= offset) - 1
}

fn marker_tokens(src: &str, tokens: &[Token]) -> Vec<usize> {
    let code: Vec<usize> = (0..tokens.len()).filter(|&i| !tokens[i].kind.is_comment()).collect();
    let text = |i: usize| tokens[i].text(src);
    let is_triple = |k: usize| {
        k + 2 < code.len()
            && text(code[k]) == "["
            && tokens[code[k + 1]].kind == TokenKind::Identifier
            && MARKER_WORDS.contains(&text(code[k + 1]))
            && text(code[k + 2]) == "]"
    };
    let starts = line_starts(src);
    let line = |i: usize| line_of(&starts, tokens[i].span.start);

    // Triples whose three tokens share a line, by position in `code`.
    let mut triples = Vec::new();
    let mut k = 0;
    while k < code.len() {
        if is_triple(k) && line(code[k]) == line(code[k + 2]) {
            triples.push(k);
            k += 3;
        } else {
            k += 1;
        }
    }
    if triples.is_empty() {
        return Vec::new();
    }

    // A line made only of marker triples is stripped whole. `}` always starts
    // a fresh line in canonical output, so it also starts a fresh segment here.
    let mut in_triple = vec![false; code.len()];
    for &k in &triples {
        in_triple[k..k + 3].iter_mut().for_each(|b| *b = true);
    }
    let mut segment_of = vec![(0usize, 0usize); code.len()];
    let mut marker_only = std::collections::HashMap::<(usize, usize), bool>::new();
    let mut current = (usize::MAX, 0usize);
    for (k, &ti) in code.iter().enumerate() {
        let l = line(ti);
        if l != current.0 {
            current = (l, 0);
        }
        if text(ti) == "}" {
            current.1 += 1;
        }
        segment_of[k] = current;
        *marker_only.entry(current).or_insert(true) &= in_triple[k];
    }

    let mut drop = Vec::new();
    let mut last_kept: Option<usize> = None;
    let mut next_triple = triples.iter().peekable();
    let mut k = 0;
    while k < code.len() {
        if next_triple.peek() == Some(&&k) {
            next_triple.next();
            let whole_line = marker_only[&segment_of[k]];
            let at_boundary = match last_kept {
                None => true,
                Some(p) => matches!(text(p), ";" | "{" | "}"),
            };
            if whole_line || at_boundary {
                drop.extend_from_slice(&code[k..k + 3]);
                k += 3;
                continue;
            }
        }
        last_kept = Some(code[k]);
        k += 1;
    }
    drop
}

pub fn normalize(code: &str) -> NormalizedCode {
    let stripped = strip_markers(code);
    let tree = java::parse_snippet(&stripped);
    let tokens: Vec<Token> = tree.tokens.iter().filter(|t| !t.kind.is_comment()).cloned().collect();
    let parse_ok = !tree.has_errors();
    let canonical_text = print_canonical(&stripped, &tokens);
    let token_stream = tokens.iter().map(|t| (t.kind, t.text(&stripped).to_string())).collect();
    NormalizedCode { canonical_text, token_stream, parse_ok }
}

/// Exact-code-match: both sides parse and their canonical forms are equal.
pub fn ecm(candidate: &str, reference: &str) -> bool {
    let c = normalize(candidate);
    if !c.parse_ok {
        return false;
    }
    let r = normalize(reference);
    r.parse_ok && c.canonical_text == r.canonical_text
}

fn is_punct(t: &Token) -> bool {
    matches!(t.kind, TokenKind::Operator | TokenKind::Separator)
}

fn space_between(src: &str, prev: &Token, next: &Token) -> bool {
    let p = prev.text(src);
    let n = next.text(src);
    if is_punct(next) && matches!(n, "," | ";" | ")" | "]" | "." | "::") {
        return false;
    }
    if is_punct(prev) && matches!(p, "(" | "[" | "." | "@" | "!" | "~" | "::") {
        return false;
    }
    let prev_is_operand_end = prev.kind == TokenKind::Identifier
        || (is_punct(prev) && matches!(p, ")" | "]" | ">"))
        || (prev.kind == TokenKind::Keyword
            && matches!(p, "this" | "super" | "boolean" | "byte" | "char" | "short" | "int" | "long" | "float" | "double"));
    if is_punct(next) && matches!(n, "(" | "[") && prev_is_operand_end {
        return false;
    }
    if is_punct(next) && matches!(n, "++" | "--") && prev.kind == TokenKind::Identifier {
        return false;
    }
    true
}

/// True when the window, joined with the given separators, lexes back to
/// exactly its tokens.
fn relexes(src: &str, window: &[(&Token, &str)]) -> bool {
    let mut joined = String::new();
    for (i, (tok, sep)) in window.iter().enumerate() {
        if i > 0 {
            joined.push_str(sep);
        }
        joined.push_str(tok.text(src));
    }
    let toks = java::tokenize(&joined);
    toks.len() == window.len()
        && toks.iter().zip(window).all(|(t, (w, _))| t.kind == w.kind && t.text(&joined) == w.text(src))
}

fn print_canonical(src: &str, tokens: &[Token]) -> String {
    let mut lines: Vec<String> = Vec::new();
    let mut line = String::new();
    let mut depth = 0usize;
    // paren depth inside the innermost brace
    let mut parens = vec![0usize];
    let mut newline_pending = false;
    let mut line_tokens: Vec<(&Token, &str)> = Vec::new();
    let flush = |line: &mut String, lines: &mut Vec<String>| {
        let trimmed = line.trim_end();
        if !trimmed.trim_start().is_empty() {
            lines.push(trimmed.to_string());
        }
        line.clear();
    };

    for (i, tok) in tokens.iter().enumerate() {
        let text = tok.text(src);
        let close_brace = is_punct(tok) && text == "}";
        if close_brace {
            depth = depth.saturating_sub(1);
            if parens.len() > 1 {
                parens.pop();
            }
            newline_pending = true;
        }
        if i > 0 {
            let prev = &tokens[i - 1];
            if newline_pending || line.is_empty() {
                flush(&mut line, &mut lines);
                line_tokens.clear();
                line_tokens.push((tok, ""));
                line.push_str(&"  ".repeat(depth));
            } else {
                let space = space_between(src, prev, tok);
                let start = line_tokens.len().saturating_sub(2);
                let mut window: Vec<(&Token, &str)> = line_tokens[start..].to_vec();
                window.push((tok, if space { " " } else { "" }));
                let fits = |w: &mut Vec<(&Token, &str)>, sep| {
                    w.last_mut().expect("non-empty").1 = sep;
                    relexes(src, w)
                };
                let sep = if !space && fits(&mut window, "") {
                    Some("")
                } else if fits(&mut window, " ") {
                    Some(" ")
                } else {
                    None
                };
                match sep {
                    Some(sep) => line.push_str(sep),
                    None => {
                        // a token that swallows what follows on its line
                        flush(&mut line, &mut lines);
                        line_tokens.clear();
                        line.push_str(&"  ".repeat(depth));
                    }
                }
                line_tokens.push((tok, sep.unwrap_or("")));
            }
        } else {
            line_tokens.push((tok, ""));
            line.push_str(&"  ".repeat(depth));
        }
        newline_pending = false;
        line.push_str(text);

        if is_punct(tok) {
            let paren = parens.last_mut().expect("non-empty");
            match text {
                "(" | "[" => *paren += 1,
                ")" | "]" => *paren = paren.saturating_sub(1),
                "{" => {
                    depth += 1;
                    parens.push(0);
                    newline_pending = true;
                }
                ";" if *paren == 0 => newline_pending = true,
                "}" => {
                    let next = tokens.get(i + 1).map(|t| t.text(src));
                    newline_pending = !matches!(next, Some(")" | "," | ";" | "." | "else" | "catch" | "finally" | "while"));
                }
                _ => {}
            }
        }
        if tok.runs_to_line_end() {
            newline_pending = true;
        }
    }
    flush(&mut line, &mut lines);
    lines.join("\n")
}

/// Human-readable dump of every normalization stage.
pub fn debug_report(code: &str) -> String {
    let stripped = strip_markers(code);
    let tree = java::parse_snippet(&stripped);
    let norm = normalize(code);
    let context = match tree.context {
        ParseContext::CompilationUnit => "compilation_unit",
        ParseContext::BlockStatements => "block_statements",
        ParseContext::ClassMembers => "class_members",
    };
    let mut out = String::new();
    out.push_str(&format!("parse_ok: {}\ncontext: {context}\nerror_bytes: {}\n", norm.parse_ok, tree.error_weight()));
    out.push_str("--- canonical ---\n");
    out.push_str(&norm.canonical_text);
    out.push_str("\n--- tokens ---\n");
    for (kind, lexeme) in &norm.token_stream {
        out.push_str(&format!("{kind:?} {lexeme:?}\n"));
    }
    out.push_str("--- tree ---\n");
    out.push_str(&tree.dump());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canon(code: &str) -> String {
        normalize(code).canonical_text
    }

    #[test]
    fn spacing_and_comments() {
        assert_eq!(canon("int  a=1; // note"), "int a = 1;");
        let n = normalize("int  a=1; // note");
        assert!(n.parse_ok);
    }

    #[test]
    fn block_comment_only() {
        let n = normalize("/* nothing here */");
        assert_eq!(n.canonical_text, "");
        assert!(n.token_stream.is_empty());
    }

    #[test]
    fn layout() {
        let src = "public static Integer get(String key) { if (key == null) { return R.drawable.acc_none; } return map.get(key); }";
        let expected = "public static Integer get(String key) {\n  if (key == null) {\n    return R.drawable.acc_none;\n  }\n  return map.get(key);\n}";
        assert_eq!(canon(src), expected);
    }

    #[test]
    fn for_header_stays_on_one_line() {
        assert_eq!(canon("for(int i=0;i<n;i++){x[i]=-y[i];}"), "for (int i = 0; i < n; i++) {\n  x[i] = - y[i];\n}");
    }

    #[test]
    fn else_catch_and_initializers_join_brace() {
        assert_eq!(canon("if (a) { b(); } else { c(); }"), "if (a) {\n  b();\n} else {\n  c();\n}");
        assert_eq!(canon("int[] a = {1, 2};"), "int[] a = {\n  1, 2\n};");
    }

    #[test]
    fn markers_are_stripped() {
        let plain = "int a = 1;\nreturn a;";
        let marked = "[FIX_START]\nint a = 1;\n//<Comment> check this\n[BUG_LOCATION]\nreturn a;\n[FIX_END]";
        assert_eq!(canon(marked), canon(plain));
        assert!(normalize(marked).parse_ok);
    }

    #[test]
    fn array_access_on_marker_word_is_kept() {
        assert_eq!(canon("x = a[FIX_START];"), "x = a[FIX_START];");
    }

    #[test]
    fn glue_guard() {
        // `1 .5` must not become `1.5`
        let n = normalize("a = b(1 , .5);");
        let again = normalize(&n.canonical_text);
        assert_eq!(n, again);
        let relexed: Vec<String> = java::tokenize(&n.canonical_text).iter().map(|t| t.text(&n.canonical_text).to_string()).collect();
        let original: Vec<String> = n.token_stream.iter().map(|(_, s)| s.clone()).collect();
        assert_eq!(relexed, original);
    }

    #[test]
    fn unterminated_string_keeps_following_tokens() {
        let n = normalize("a = \"open\nb = 2;");
        assert!(!n.parse_ok);
        let again = normalize(&n.canonical_text);
        assert_eq!(n.token_stream, again.token_stream);
    }

    #[test]
    fn ecm_examples() {
        let x = "return TYPE_ERROR;";
        assert!(ecm(x, x));
        assert!(ecm("return TYPE_ERROR; // explanation", x));
        assert!(!ecm("throw new RuntimeException(\"Error parsing period\");", x));
        assert!(!ecm("%%%%", "%%%%"));
        assert!(!ecm("String s = \"a\";", "String s = \"b\";"));
    }

    #[test]
    fn debug_report_sections() {
        let r = debug_report("int a = 1;");
        assert!(r.contains("parse_ok: true"));
        assert!(r.contains("context: block_statements"));
        assert!(r.contains("--- canonical ---\nint a = 1;"));
    }
}
