//! Error-tolerant Java lexer.
//!
//! Every byte of the input ends up either in a token or in inter-token
//! whitespace. Malformed input produces tokens with `error = true` instead of
//! failing, so callers can always recover a full token stream.

use std::ops::Range;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Identifier,
    Keyword,
    IntegerLiteral,
    FloatLiteral,
    CharLiteral,
    StringLiteral,
    TextBlock,
    BooleanLiteral,
    NullLiteral,
    Operator,
    Separator,
    LineComment,
    BlockComment,
    /// A byte sequence that is not part of any Java token.
    Unknown,
}

impl TokenKind {
    pub fn is_comment(self) -> bool {
        matches!(self, TokenKind::LineComment | TokenKind::BlockComment)
    }

    pub fn is_literal(self) -> bool {
        matches!(
            self,
            TokenKind::IntegerLiteral
                | TokenKind::FloatLiteral
                | TokenKind::CharLiteral
                | TokenKind::StringLiteral
                | TokenKind::TextBlock
                | TokenKind::BooleanLiteral
                | TokenKind::NullLiteral
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Range<usize>,
    /// Set for unterminated literals/comments and unknown characters.
    pub error: bool,
}

impl Token {
    pub fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.span.clone()]
    }

    /// True for literals that were cut off at the end of their line.
    pub(crate) fn runs_to_line_end(&self) -> bool {
        self.error && matches!(self.kind, TokenKind::StringLiteral | TokenKind::CharLiteral)
    }
}

/// Reserved Java keywords (literals `true`, `false` and `null` excluded).
pub const KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "package", "private", "protected", "public", "return", "short", "static",
    "strictfp", "super", "switch", "synchronized", "this", "throw", "throws", "transient", "try",
    "void", "volatile", "while",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.binary_search(&word).is_ok()
}

// Longest first so the scan below is greedy.
pub const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=",
    ">=", "+=", "-=", "*=", "/=", "&=", "|=", "^=", "%=", "<<", ">>", "=", ">", "<", "!", "~",
    "?", ":", "+", "-", "*", "/", "&", "|", "^", "%", "@",
];

fn is_ident_start(c: char) -> bool {
    c == '_' || c == '$' || c.is_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c == '_' || c == '$' || c.is_alphanumeric()
}

pub fn tokenize(src: &str) -> Vec<Token> {
    Lexer { src, pos: 0 }.run()
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl Lexer<'_> {
    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn run(mut self) -> Vec<Token> {
        let mut out = Vec::new();
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
                continue;
            }
            let start = self.pos;
            let (kind, error) = self.next_token(c);
            out.push(Token { kind, span: start..self.pos, error });
        }
        out
    }

    fn next_token(&mut self, c: char) -> (TokenKind, bool) {
        let rest = self.rest();
        if rest.starts_with("//") {
            let end = rest.find('\n').unwrap_or(rest.len());
            self.pos += end;
            // A trailing '\r' belongs to the line break, not the comment.
            if self.src[..self.pos].ends_with('\r') {
                self.pos -= 1;
            }
            return (TokenKind::LineComment, false);
        }
        if let Some(body) = rest.strip_prefix("/*") {
            return match body.find("*/") {
                Some(i) => {
                    self.pos += i + 4;
                    (TokenKind::BlockComment, false)
                }
                None => {
                    self.pos = self.src.len();
                    (TokenKind::BlockComment, true)
                }
            };
        }
        if rest.starts_with("\"\"\"") {
            return self.text_block();
        }
        if c == '"' || c == '\'' {
            return self.quoted(c);
        }
        if c.is_ascii_digit() || (c == '.' && self.peek_at(1).is_some_and(|d| d.is_ascii_digit())) {
            return self.number();
        }
        if is_ident_start(c) {
            let start = self.pos;
            while self.peek().is_some_and(is_ident_continue) {
                self.bump();
            }
            let word = &self.src[start..self.pos];
            let kind = match word {
                "true" | "false" => TokenKind::BooleanLiteral,
                "null" => TokenKind::NullLiteral,
                w if is_keyword(w) => TokenKind::Keyword,
                _ => TokenKind::Identifier,
            };
            return (kind, false);
        }
        if matches!(c, '(' | ')' | '{' | '}' | '[' | ']' | ';' | ',') {
            self.bump();
            return (TokenKind::Separator, false);
        }
        if let Some(op) = OPERATORS.iter().find(|op| rest.starts_with(**op)) {
            self.pos += op.len();
            return (TokenKind::Operator, false);
        }
        if c == '.' {
            self.bump();
            return (TokenKind::Separator, false);
        }
        self.bump();
        (TokenKind::Unknown, true)
    }

    fn quoted(&mut self, quote: char) -> (TokenKind, bool) {
        let kind = if quote == '"' { TokenKind::StringLiteral } else { TokenKind::CharLiteral };
        self.bump();
        // an unterminated literal stops before trailing blanks on its line
        let mut solid_end = self.pos;
        loop {
            match self.peek() {
                None | Some('\n') | Some('\r') => {
                    self.pos = solid_end;
                    return (kind, true);
                }
                Some('\\') => {
                    self.bump();
                    if matches!(self.peek(), Some(c) if c != '\n' && c != '\r') {
                        self.bump();
                    }
                    solid_end = self.pos;
                }
                Some(c) if c == quote => {
                    self.bump();
                    return (kind, false);
                }
                Some(c) => {
                    self.bump();
                    if !c.is_whitespace() {
                        solid_end = self.pos;
                    }
                }
            }
        }
    }

    fn text_block(&mut self) -> (TokenKind, bool) {
        self.pos += 3;
        loop {
            let rest = self.rest();
            if rest.is_empty() {
                return (TokenKind::TextBlock, true);
            }
            if rest.starts_with("\\") {
                self.bump();
                self.bump();
                continue;
            }
            if rest.starts_with("\"\"\"") {
                self.pos += 3;
                return (TokenKind::TextBlock, false);
            }
            self.bump();
        }
    }

    fn number(&mut self) -> (TokenKind, bool) {
        let rest = self.rest();
        let lower = rest.get(..2).map(str::to_ascii_lowercase);
        if lower.as_deref() == Some("0x") || lower.as_deref() == Some("0b") {
            let hex = lower.as_deref() == Some("0x");
            self.pos += 2;
            let mut float = false;
            self.digits(|c| if hex { c.is_ascii_hexdigit() } else { c == '0' || c == '1' });
            if hex && self.peek() == Some('.') {
                float = true;
                self.bump();
                self.digits(|c| c.is_ascii_hexdigit());
            }
            if hex && matches!(self.peek(), Some('p' | 'P')) {
                float = true;
                self.exponent();
            }
            return self.suffix(float);
        }
        let mut float = false;
        self.digits(|c| c.is_ascii_digit());
        if self.peek() == Some('.') && self.peek_at(1).is_none_or(|c| c.is_ascii_digit() || !is_ident_start(c) && c != '.') {
            float = true;
            self.bump();
            self.digits(|c| c.is_ascii_digit());
        }
        if matches!(self.peek(), Some('e' | 'E'))
            && (self.peek_at(1).is_some_and(|c| c.is_ascii_digit())
                || (matches!(self.peek_at(1), Some('+' | '-')) && self.peek_at(2).is_some_and(|c| c.is_ascii_digit())))
        {
            float = true;
            self.exponent();
        }
        self.suffix(float)
    }

    fn digits(&mut self, accept: impl Fn(char) -> bool) {
        while self.peek().is_some_and(|c| accept(c) || c == '_') {
            self.bump();
        }
    }

    fn exponent(&mut self) {
        self.bump();
        if matches!(self.peek(), Some('+' | '-')) {
            self.bump();
        }
        self.digits(|c| c.is_ascii_digit());
    }

    fn suffix(&mut self, float: bool) -> (TokenKind, bool) {
        match self.peek() {
            Some('l' | 'L') if !float => {
                self.bump();
                (TokenKind::IntegerLiteral, false)
            }
            Some('f' | 'F' | 'd' | 'D') => {
                self.bump();
                (TokenKind::FloatLiteral, false)
            }
            _ if float => (TokenKind::FloatLiteral, false),
            _ => (TokenKind::IntegerLiteral, false),
        }
    }
}
