//! Recursive-descent Java parser that never fails.
//!
//! Unexpected tokens are wrapped in `ERROR` nodes and absent tokens become
//! zero-width `ERROR` nodes, so every input yields a tree whose leaves cover
//! all tokens in order. Node labels follow tree-sitter-java naming.

use super::lexer::{self, Token, TokenKind};
use super::tree::{Node, NodeId, ParseContext, SyntaxTree, ERROR};

const MAX_DEPTH: usize = 150;

const PRIMITIVES: &[&str] = &["boolean", "byte", "char", "short", "int", "long", "float", "double"];

const MODIFIERS: &[&str] = &[
    "public", "protected", "private", "static", "final", "abstract", "native", "synchronized",
    "transient", "volatile", "strictfp", "default",
];

const ASSIGN_OPS: &[&str] = &["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="];

fn binary_precedence(op: &str) -> Option<u8> {
    Some(match op {
        "||" => 1,
        "&&" => 2,
        "|" => 3,
        "^" => 4,
        "&" => 5,
        "==" | "!=" => 6,
        "<" | ">" | "<=" | ">=" | "instanceof" => 7,
        "<<" | ">>" | ">>>" => 8,
        "+" | "-" => 9,
        "*" | "/" | "%" => 10,
        _ => return None,
    })
}

/// Maps token text onto the static tables the lexer uses.
fn static_text(text: &str) -> &'static str {
    const SEPARATORS: &[&str] = &["(", ")", "{", "}", "[", "]", ";", ",", ".", ">"];
    lexer::KEYWORDS
        .iter()
        .chain(SEPARATORS)
        .chain(lexer::OPERATORS)
        .find(|k| **k == text)
        .copied()
        .unwrap_or("token")
}

/// Parse `src` in one explicit context.
pub fn parse_in(src: &str, context: ParseContext) -> SyntaxTree {
    let tokens = lexer::tokenize(src);
    let mut p = Parser::new(src, tokens);
    let root = match context {
        ParseContext::CompilationUnit => p.compilation_unit(),
        ParseContext::BlockStatements => p.statement_list_root(),
        ParseContext::ClassMembers => p.member_list_root(),
    };
    let Parser { tokens, nodes, .. } = p;
    let mut tree = SyntaxTree { source: src.to_string(), tokens, nodes, root, context };
    collapse_if_unparseable(&mut tree);
    tree
}

/// Parse a possibly fragmentary snippet: whole file, then statement list, then
/// class body members. The first error-free attempt wins; otherwise the one
/// with the fewest error bytes (earliest on ties).
pub fn parse_snippet(src: &str) -> SyntaxTree {
    let mut best: Option<(usize, SyntaxTree)> = None;
    for ctx in [ParseContext::CompilationUnit, ParseContext::BlockStatements, ParseContext::ClassMembers] {
        let tree = parse_in(src, ctx);
        let weight = if tree.is_unparseable() { usize::MAX } else { tree.error_weight() };
        if weight == 0 {
            return tree;
        }
        if best.as_ref().is_none_or(|(w, _)| weight < *w) {
            best = Some((weight, tree));
        }
    }
    best.map(|(_, t)| t).expect("three attempts")
}

// With errors present and no identifier, literal or keyword outside an error
// node, nothing of the input was understood: the result is one error node.
fn collapse_if_unparseable(tree: &mut SyntaxTree) {
    if !tree.has_errors() && !tree.tokens.iter().any(|t| !t.kind.is_comment()) {
        return;
    }
    if !tree.has_errors() {
        return;
    }
    let mut understood = false;
    let mut stack = vec![tree.root];
    while let Some(id) = stack.pop() {
        let node = &tree.nodes[id];
        if node.error {
            continue;
        }
        if let Some(t) = node.token {
            let kind = tree.tokens[t].kind;
            if matches!(kind, TokenKind::Identifier | TokenKind::Keyword) || kind.is_literal() {
                understood = true;
                break;
            }
        }
        stack.extend(node.children.iter().copied());
    }
    if understood {
        return;
    }
    let leaves: Vec<NodeId> = tree.leaves();
    let span = if tree.source.is_empty() { 0..0 } else { 0..tree.source.len() };
    tree.nodes.push(Node { kind: ERROR, named: true, span, children: leaves, error: true, token: None });
    tree.root = tree.nodes.len() - 1;
}

struct Parser<'s> {
    src: &'s str,
    tokens: Vec<Token>,
    /// Indices of non-comment tokens.
    sig: Vec<usize>,
    pos: usize,
    /// Number of `>` characters already consumed from the current shift token.
    split_gt: usize,
    nodes: Vec<Node>,
    depth: usize,
}

type Children = Vec<NodeId>;

impl<'s> Parser<'s> {
    fn new(src: &'s str, tokens: Vec<Token>) -> Self {
        let sig = tokens.iter().enumerate().filter(|(_, t)| !t.kind.is_comment()).map(|(i, _)| i).collect();
        Parser { src, tokens, sig, pos: 0, split_gt: 0, nodes: Vec::new(), depth: 0 }
    }

    // ----- token access -----

    fn at_eof(&self) -> bool {
        self.pos >= self.sig.len()
    }

    fn tok(&self, i: usize) -> Option<&Token> {
        self.sig.get(i).map(|&t| &self.tokens[t])
    }

    fn text_at(&self, i: usize) -> &'s str {
        match self.tok(i) {
            Some(t) => {
                let text = &self.src[t.span.clone()];
                if i == self.pos && self.split_gt > 0 {
                    &text[self.split_gt..]
                } else {
                    text
                }
            }
            None => "",
        }
    }

    fn kind_at(&self, i: usize) -> Option<TokenKind> {
        self.tok(i).map(|t| t.kind)
    }

    fn peek(&self) -> &'s str {
        self.text_at(self.pos)
    }

    fn nth(&self, n: usize) -> &'s str {
        self.text_at(self.pos + n)
    }

    fn at(&self, text: &str) -> bool {
        self.peek() == text && self.is_symbolic(self.pos)
    }

    fn at_word(&self, word: &str) -> bool {
        self.peek() == word
    }

    fn is_symbolic(&self, i: usize) -> bool {
        matches!(self.kind_at(i), Some(TokenKind::Operator | TokenKind::Separator | TokenKind::Keyword))
    }

    fn is_ident_at(&self, i: usize) -> bool {
        self.kind_at(i) == Some(TokenKind::Identifier)
    }

    fn at_ident(&self) -> bool {
        self.is_ident_at(self.pos)
    }

    fn at_any(&self, texts: &[&str]) -> bool {
        texts.contains(&self.peek()) && self.is_symbolic(self.pos)
    }

    fn is_text_at(&self, i: usize, text: &str) -> bool {
        self.text_at(i) == text && self.is_symbolic(i)
    }

    // ----- tree building -----

    fn current_offset(&self) -> usize {
        match self.tok(self.pos) {
            Some(t) => t.span.start + self.split_gt,
            None => self.src.len(),
        }
    }

    fn push(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    /// Insert every comment token as a leaf of the deepest node enclosing it.
    fn attach_comments(&mut self, root: NodeId) {
        for ti in 0..self.tokens.len() {
            let t = &self.tokens[ti];
            if !t.kind.is_comment() {
                continue;
            }
            let kind = if t.kind == TokenKind::LineComment { "line_comment" } else { "block_comment" };
            let span = t.span.clone();
            let node = Node { kind, named: true, span: span.clone(), children: vec![], error: false, token: Some(ti) };
            let id = self.push(node);
            let mut parent = root;
            loop {
                let inner = self.nodes[parent].children.iter().copied().find(|&c| {
                    let cs = &self.nodes[c].span;
                    !self.nodes[c].children.is_empty() && cs.start < span.start && span.end <= cs.end
                });
                match inner {
                    Some(c) => parent = c,
                    None => break,
                }
            }
            let at = self.nodes[parent].children.iter().take_while(|&&c| self.nodes[c].span.start < span.start).count();
            self.nodes[parent].children.insert(at, id);
        }
    }

    fn leaf_kind(&self, t: &Token, text: &str) -> (&'static str, bool) {
        match t.kind {
            TokenKind::Identifier => ("identifier", true),
            TokenKind::IntegerLiteral => ("integer_literal", true),
            TokenKind::FloatLiteral => ("floating_point_literal", true),
            TokenKind::CharLiteral => ("character_literal", true),
            TokenKind::StringLiteral => ("string_literal", true),
            TokenKind::TextBlock => ("text_block", true),
            TokenKind::BooleanLiteral => (if text == "true" { "true" } else { "false" }, true),
            TokenKind::NullLiteral => ("null_literal", true),
            TokenKind::Keyword if matches!(text, "this" | "super") => (static_text(text), true),
            TokenKind::Unknown => (ERROR, true),
            _ => (static_text(text), false),
        }
    }

    /// Consume the current token as a leaf.
    fn bump(&mut self, ch: &mut Children) -> NodeId {
        let Some(&ti) = self.sig.get(self.pos) else {
            return self.missing(ch);
        };
        let t = self.tokens[ti].clone();
        let text = &self.src[t.span.start + self.split_gt..t.span.end];
        let (kind, named) = self.leaf_kind(&t, text);
        let node = Node { kind, named, span: t.span.start + self.split_gt..t.span.end, children: vec![], error: t.error, token: Some(ti) };
        let id = self.push(node);
        ch.push(id);
        self.pos += 1;
        self.split_gt = 0;
        id
    }

    /// Consume the current token as a leaf with an explicit label.
    fn bump_as(&mut self, ch: &mut Children, kind: &'static str) -> NodeId {
        let id = self.bump(ch);
        if self.nodes[id].token.is_some() {
            self.nodes[id].kind = kind;
            self.nodes[id].named = true;
        }
        id
    }

    fn missing(&mut self, ch: &mut Children) -> NodeId {
        let at = self.current_offset();
        let id = self.push(Node { kind: ERROR, named: true, span: at..at, children: vec![], error: true, token: None });
        ch.push(id);
        id
    }

    fn expect(&mut self, ch: &mut Children, text: &str) -> bool {
        if self.at(text) {
            self.bump(ch);
            true
        } else {
            self.missing(ch);
            false
        }
    }

    fn expect_ident(&mut self, ch: &mut Children) {
        if self.at_ident() {
            self.bump(ch);
        } else {
            self.missing(ch);
        }
    }

    /// Consume one `>`, splitting `>>`/`>>>` when closing nested type arguments.
    fn expect_gt(&mut self, ch: &mut Children) {
        let text = self.peek();
        if text == ">" {
            self.bump(ch);
        } else if text.starts_with('>') && text.chars().all(|c| c == '>') {
            let ti = self.sig[self.pos];
            let start = self.tokens[ti].span.start + self.split_gt;
            let id = self.push(Node { kind: ">", named: false, span: start..start + 1, children: vec![], error: false, token: Some(ti) });
            ch.push(id);
            self.split_gt += 1;
        } else {
            self.missing(ch);
        }
    }

    fn node(&mut self, kind: &'static str, children: Children) -> NodeId {
        let span = self.span_of(&children);
        self.push(Node { kind, named: true, span, children, error: false, token: None })
    }

    fn error_node(&mut self, children: Children) -> NodeId {
        let span = self.span_of(&children);
        self.push(Node { kind: ERROR, named: true, span, children, error: true, token: None })
    }

    fn span_of(&self, children: &[NodeId]) -> std::ops::Range<usize> {
        let mut spans = children.iter().map(|&c| self.nodes[c].span.clone());
        match spans.next() {
            None => {
                let at = self.current_offset();
                at..at
            }
            Some(first) => {
                let last = children.iter().rev().map(|&c| self.nodes[c].span.end).next().unwrap_or(first.end);
                first.start..last.max(first.end)
            }
        }
    }

    /// Wrap at least one token in an error node, stopping at `stop` or after a
    /// `;`. Braces are skipped as balanced groups.
    fn skip_junk(&mut self, stop: &[&str]) -> NodeId {
        let mut ch = Vec::new();
        let mut first = true;
        while !self.at_eof() {
            if !first && self.at_any(stop) {
                break;
            }
            first = false;
            if self.at("{") {
                self.skip_balanced(&mut ch);
                continue;
            }
            let semi = self.at(";");
            self.bump(&mut ch);
            if semi {
                break;
            }
        }
        self.error_node(ch)
    }

    fn skip_balanced(&mut self, ch: &mut Children) {
        let mut depth = 0usize;
        while !self.at_eof() {
            if self.at("{") {
                depth += 1;
            } else if self.at("}") {
                depth = depth.saturating_sub(1);
                self.bump(ch);
                if depth == 0 {
                    return;
                }
                continue;
            }
            self.bump(ch);
        }
    }

    fn enter(&mut self) -> bool {
        self.depth += 1;
        self.depth <= MAX_DEPTH
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    /// Everything up to end of input as one error node (depth limit hit).
    fn bail(&mut self) -> NodeId {
        let mut ch = Vec::new();
        while !self.at_eof() {
            self.bump(&mut ch);
        }
        self.error_node(ch)
    }

    fn finish_root(&mut self, ch: Children) -> NodeId {
        let id = self.node("program", ch);
        self.nodes[id].span = 0..self.src.len();
        self.attach_comments(id);
        id
    }

    // ----- lookahead scanning (no nodes built) -----

    fn scan_annotation(&self, mut i: usize) -> Option<usize> {
        if !self.is_text_at(i, "@") || !self.is_ident_at(i + 1) {
            return None;
        }
        i += 2;
        while self.is_text_at(i, ".") && self.is_ident_at(i + 1) {
            i += 2;
        }
        if self.is_text_at(i, "(") {
            i = self.scan_balanced_parens(i)?;
        }
        Some(i)
    }

    fn scan_balanced_parens(&self, mut i: usize) -> Option<usize> {
        let mut depth = 0usize;
        loop {
            let text = self.text_at(i);
            self.tok(i)?;
            if self.is_symbolic(i) {
                if text == "(" {
                    depth += 1;
                } else if text == ")" {
                    depth -= 1;
                    if depth == 0 {
                        return Some(i + 1);
                    }
                }
            }
            i += 1;
        }
    }

    fn scan_type_args(&self, mut i: usize) -> Option<usize> {
        // at '<'
        let mut depth: isize = 1;
        i += 1;
        loop {
            self.tok(i)?;
            let text = self.text_at(i);
            match self.kind_at(i)? {
                TokenKind::Identifier => {}
                TokenKind::Keyword if PRIMITIVES.contains(&text) || text == "extends" || text == "super" => {}
                TokenKind::Operator | TokenKind::Separator => match text {
                    "<" => depth += 1,
                    ">" => depth -= 1,
                    ">>" => depth -= 2,
                    ">>>" => depth -= 3,
                    "," | "." | "?" | "[" | "]" | "&" | "@" => {}
                    _ => return None,
                },
                _ => return None,
            }
            i += 1;
            if depth == 0 {
                return Some(i);
            }
            if depth < 0 {
                return None;
            }
        }
    }

    /// Returns the index after a type starting at `i`, if one is there.
    fn scan_type(&self, mut i: usize) -> Option<usize> {
        while let Some(j) = self.scan_annotation(i) {
            i = j;
        }
        let text = self.text_at(i);
        if self.kind_at(i) == Some(TokenKind::Keyword) && (PRIMITIVES.contains(&text) || text == "void") {
            i += 1;
        } else if self.is_ident_at(i) {
            i += 1;
            loop {
                if self.is_text_at(i, "<") {
                    i = self.scan_type_args(i)?;
                }
                if self.is_text_at(i, ".") && self.is_ident_at(i + 1) {
                    i += 2;
                    continue;
                }
                break;
            }
        } else {
            return None;
        }
        while self.is_text_at(i, "[") && self.is_text_at(i + 1, "]") {
            i += 2;
        }
        Some(i)
    }

    /// A type followed by a declared name: the start of a declaration.
    fn scan_declaration(&self, i: usize) -> Option<usize> {
        let end = self.scan_type(i)?;
        self.is_ident_at(end).then_some(end)
    }

    fn at_local_declaration(&self) -> bool {
        match self.scan_declaration(self.pos) {
            Some(name) => {
                let after = self.text_at(name + 1);
                self.tok(name + 1).is_none() || matches!(after, "=" | ";" | "," | "[" | ":" | ")")
            }
            None => false,
        }
    }

    fn matching_paren(&self, i: usize) -> Option<usize> {
        self.scan_balanced_parens(i).map(|e| e - 1)
    }

    fn at_lambda(&self) -> bool {
        if self.at_ident() && self.is_text_at(self.pos + 1, "->") {
            return true;
        }
        if self.at("(") {
            if let Some(close) = self.matching_paren(self.pos) {
                return self.is_text_at(close + 1, "->");
            }
        }
        false
    }

    fn at_cast(&self) -> bool {
        if !self.at("(") {
            return false;
        }
        let Some(end) = self.scan_type(self.pos + 1) else { return false };
        let mut end = end;
        // intersection casts: (A & B) x
        while self.is_text_at(end, "&") {
            match self.scan_type(end + 1) {
                Some(e) => end = e,
                None => return false,
            }
        }
        if !self.is_text_at(end, ")") {
            return false;
        }
        let primitive = PRIMITIVES.contains(&self.text_at(self.pos + 1)) && self.kind_at(self.pos + 1) == Some(TokenKind::Keyword);
        let next = end + 1;
        let Some(kind) = self.kind_at(next) else { return false };
        let text = self.text_at(next);
        if primitive {
            return self.starts_expression(next);
        }
        match kind {
            TokenKind::Identifier | TokenKind::StringLiteral | TokenKind::CharLiteral | TokenKind::IntegerLiteral
            | TokenKind::FloatLiteral | TokenKind::TextBlock | TokenKind::BooleanLiteral | TokenKind::NullLiteral => true,
            TokenKind::Keyword => matches!(text, "this" | "super" | "new" | "switch") || PRIMITIVES.contains(&text),
            TokenKind::Separator | TokenKind::Operator => matches!(text, "(" | "!" | "~"),
            _ => false,
        }
    }

    fn starts_expression(&self, i: usize) -> bool {
        let Some(kind) = self.kind_at(i) else { return false };
        let text = self.text_at(i);
        match kind {
            TokenKind::Identifier => true,
            k if k.is_literal() => true,
            TokenKind::Keyword => matches!(text, "this" | "super" | "new" | "switch") || PRIMITIVES.contains(&text),
            TokenKind::Separator | TokenKind::Operator => matches!(text, "(" | "!" | "~" | "+" | "-" | "++" | "--"),
            _ => false,
        }
    }

    // ----- roots -----

    fn compilation_unit(&mut self) -> NodeId {
        let mut ch = Vec::new();
        if self.at_word("package") || (self.at("@") && self.package_after_annotations()) {
            let id = self.package_declaration();
            ch.push(id);
        }
        while !self.at_eof() {
            let start = self.pos;
            let id = if self.at_word("import") {
                self.import_declaration()
            } else if self.at(";") {
                let mut c = Vec::new();
                self.bump(&mut c);
                c[0]
            } else if self.at_type_declaration_start() {
                let mut mods = Vec::new();
                self.modifiers(&mut mods);
                self.type_declaration(mods)
            } else {
                self.skip_junk(&[])
            };
            ch.push(id);
            if self.pos == start && !self.at_eof() {
                let id = self.skip_junk(&[]);
                ch.push(id);
            }
        }
        self.finish_root(ch)
    }

    fn package_after_annotations(&self) -> bool {
        let mut i = self.pos;
        while let Some(j) = self.scan_annotation(i) {
            i = j;
        }
        self.text_at(i) == "package"
    }

    fn at_type_declaration_start(&self) -> bool {
        let mut i = self.pos;
        loop {
            if let Some(j) = self.scan_annotation(i) {
                i = j;
                continue;
            }
            let text = self.text_at(i);
            if self.kind_at(i) == Some(TokenKind::Keyword) && MODIFIERS.contains(&text) {
                i += 1;
                continue;
            }
            if self.is_ident_at(i) && matches!(text, "sealed" | "non") {
                i += 1;
                continue;
            }
            break;
        }
        self.at_type_keyword(i)
    }

    fn at_type_keyword(&self, i: usize) -> bool {
        let text = self.text_at(i);
        match self.kind_at(i) {
            Some(TokenKind::Keyword) => matches!(text, "class" | "interface" | "enum"),
            Some(TokenKind::Operator) => text == "@" && self.text_at(i + 1) == "interface",
            Some(TokenKind::Identifier) => text == "record" && self.is_ident_at(i + 1) && matches!(self.text_at(i + 2), "(" | "<"),
            _ => false,
        }
    }

    fn statement_list_root(&mut self) -> NodeId {
        let mut ch = Vec::new();
        while !self.at_eof() {
            let start = self.pos;
            let id = if self.at("}") { self.skip_junk(&[]) } else { self.statement() };
            ch.push(id);
            if self.pos == start && !self.at_eof() {
                let id = self.skip_junk(&[]);
                ch.push(id);
            }
        }
        self.finish_root(ch)
    }

    fn member_list_root(&mut self) -> NodeId {
        let mut ch = Vec::new();
        while !self.at_eof() {
            let start = self.pos;
            let id = if self.at("}") { self.skip_junk(&[]) } else { self.member(false) };
            ch.push(id);
            if self.pos == start && !self.at_eof() {
                let id = self.skip_junk(&[]);
                ch.push(id);
            }
        }
        self.finish_root(ch)
    }

    // ----- declarations -----

    fn package_declaration(&mut self) -> NodeId {
        let mut ch = Vec::new();
        while self.at("@") {
            let a = self.annotation();
            ch.push(a);
        }
        self.expect(&mut ch, "package");
        let name = self.qualified_name();
        ch.push(name);
        self.expect(&mut ch, ";");
        self.node("package_declaration", ch)
    }

    fn import_declaration(&mut self) -> NodeId {
        let mut ch = Vec::new();
        self.bump(&mut ch);
        if self.at_word("static") {
            self.bump(&mut ch);
        }
        let name = self.qualified_name();
        ch.push(name);
        if self.at(".") && self.nth(1) == "*" {
            self.bump(&mut ch);
            self.bump_as(&mut ch, "asterisk");
        }
        self.expect(&mut ch, ";");
        self.node("import_declaration", ch)
    }

    fn qualified_name(&mut self) -> NodeId {
        let mut ch = Vec::new();
        self.expect_ident(&mut ch);
        let mut id = ch[0];
        while self.at(".") && self.is_ident_at(self.pos + 1) {
            let mut c = vec![id];
            self.bump(&mut c);
            self.bump(&mut c);
            id = self.node("scoped_identifier", c);
        }
        id
    }

    fn annotation(&mut self) -> NodeId {
        let mut ch = Vec::new();
        self.bump(&mut ch); // @
        let name = self.qualified_name();
        ch.push(name);
        if self.at("(") {
            let args = self.annotation_arguments();
            ch.push(args);
            self.node("annotation", ch)
        } else {
            self.node("marker_annotation", ch)
        }
    }

    fn annotation_arguments(&mut self) -> NodeId {
        let mut ch = Vec::new();
        self.bump(&mut ch); // (
        while !self.at(")") && !self.at_eof() {
            let start = self.pos;
            if self.at_ident() && self.is_text_at(self.pos + 1, "=") {
                let mut pair = Vec::new();
                self.bump(&mut pair);
                self.bump(&mut pair);
                let v = self.element_value();
                pair.push(v);
                let id = self.node("element_value_pair", pair);
                ch.push(id);
            } else {
                let v = self.element_value();
                ch.push(v);
            }
            if self.at(",") {
                self.bump(&mut ch);
            } else if self.pos == start || !self.at(")") {
                break;
            }
        }
        self.expect(&mut ch, ")");
        self.node("annotation_argument_list", ch)
    }

    fn element_value(&mut self) -> NodeId {
        if self.at("{") {
            self.array_initializer_with(Self::element_value, "element_value_array_initializer")
        } else if self.at("@") {
            self.annotation()
        } else {
            self.expression()
        }
    }

    fn modifiers(&mut self, ch: &mut Children) {
        let mut mods = Vec::new();
        loop {
            if self.at("@") && self.text_at(self.pos + 1) != "interface" {
                let a = self.annotation();
                mods.push(a);
            } else if self.kind_at(self.pos) == Some(TokenKind::Keyword) && MODIFIERS.contains(&self.peek()) {
                // `default` opens a switch label inside blocks; only a modifier before a declaration.
                if self.peek() == "default" && matches!(self.nth(1), ":" | "->") {
                    break;
                }
                self.bump(&mut mods);
            } else if self.at_ident() && self.peek() == "sealed" && (self.at_type_keyword(self.pos + 1) || self.kind_at(self.pos + 1) == Some(TokenKind::Keyword)) {
                self.bump(&mut mods);
            } else if self.at_ident() && self.peek() == "non" && self.nth(1) == "-" && self.nth(2) == "sealed" {
                self.bump(&mut mods);
                self.bump(&mut mods);
                self.bump(&mut mods);
            } else {
                break;
            }
        }
        if !mods.is_empty() {
            let id = self.node("modifiers", mods);
            ch.push(id);
        }
    }

    fn type_declaration(&mut self, mut ch: Children) -> NodeId {
        if !self.enter() {
            self.leave();
            return self.bail();
        }
        let id = match self.peek() {
            "class" => {
                self.bump(&mut ch);
                self.expect_ident(&mut ch);
                self.type_parameters_opt(&mut ch);
                self.super_clauses(&mut ch);
                let body = self.class_body(false);
                ch.push(body);
                self.node("class_declaration", ch)
            }
            "interface" => {
                self.bump(&mut ch);
                self.expect_ident(&mut ch);
                self.type_parameters_opt(&mut ch);
                self.super_clauses(&mut ch);
                let body = self.class_body(false);
                ch.push(body);
                self.node("interface_declaration", ch)
            }
            "enum" => {
                self.bump(&mut ch);
                self.expect_ident(&mut ch);
                self.super_clauses(&mut ch);
                let body = self.enum_body();
                ch.push(body);
                self.node("enum_declaration", ch)
            }
            "@" => {
                self.bump(&mut ch);
                self.bump(&mut ch);
                self.expect_ident(&mut ch);
                let body = self.class_body(false);
                ch.push(body);
                self.node("annotation_type_declaration", ch)
            }
            _ => {
                // record
                self.bump(&mut ch);
                self.expect_ident(&mut ch);
                self.type_parameters_opt(&mut ch);
                let params = self.formal_parameters();
                ch.push(params);
                self.super_clauses(&mut ch);
                let body = self.class_body(true);
                ch.push(body);
                self.node("record_declaration", ch)
            }
        };
        self.leave();
        id
    }

    fn super_clauses(&mut self, ch: &mut Children) {
        loop {
            let kind = match self.peek() {
                "extends" if self.at("extends") => "superclass",
                "implements" if self.at("implements") => "super_interfaces",
                "permits" if self.at_ident() => "permits",
                _ => break,
            };
            let mut c = Vec::new();
            self.bump(&mut c);
            let t = self.type_list();
            c.push(t);
            let id = self.node(kind, c);
            ch.push(id);
        }
    }

    fn type_list(&mut self) -> NodeId {
        let mut ch = Vec::new();
        let t = self.parse_type();
        ch.push(t);
        while self.at(",") {
            self.bump(&mut ch);
            let t = self.parse_type();
            ch.push(t);
        }
        self.node("type_list", ch)
    }

    fn type_parameters_opt(&mut self, ch: &mut Children) {
        if !self.at("<") {
            return;
        }
        let mut c = Vec::new();
        self.bump(&mut c);
        loop {
            let mut p = Vec::new();
            while self.at("@") {
                let a = self.annotation();
                p.push(a);
            }
            if self.at_ident() {
                self.bump_as(&mut p, "type_identifier");
            } else {
                self.missing(&mut p);
            }
            if self.at("extends") {
                let mut b = Vec::new();
                self.bump(&mut b);
                let t = self.parse_type();
                b.push(t);
                while self.at("&") {
                    self.bump(&mut b);
                    let t = self.parse_type();
                    b.push(t);
                }
                let id = self.node("type_bound", b);
                p.push(id);
            }
            let id = self.node("type_parameter", p);
            c.push(id);
            if self.at(",") {
                self.bump(&mut c);
            } else {
                break;
            }
        }
        self.expect_gt(&mut c);
        let id = self.node("type_parameters", c);
        ch.push(id);
    }

    fn class_body(&mut self, record: bool) -> NodeId {
        let mut ch = Vec::new();
        if !self.expect(&mut ch, "{") {
            return self.node("class_body", ch);
        }
        self.member_list(&mut ch, record);
        self.expect(&mut ch, "}");
        self.node("class_body", ch)
    }

    fn member_list(&mut self, ch: &mut Children, record: bool) {
        while !self.at("}") && !self.at_eof() {
            let start = self.pos;
            let id = self.member(record);
            ch.push(id);
            if self.pos == start {
                let id = self.skip_junk(&["}"]);
                ch.push(id);
            }
        }
    }

    fn enum_body(&mut self) -> NodeId {
        let mut ch = Vec::new();
        if !self.expect(&mut ch, "{") {
            return self.node("enum_body", ch);
        }
        while !self.at_any(&[";", "}"]) && !self.at_eof() {
            let start = self.pos;
            let mut c = Vec::new();
            self.modifiers(&mut c);
            self.expect_ident(&mut c);
            if self.at("(") {
                let args = self.argument_list();
                c.push(args);
            }
            if self.at("{") {
                let body = self.class_body(false);
                c.push(body);
            }
            let id = self.node("enum_constant", c);
            ch.push(id);
            if self.at(",") {
                self.bump(&mut ch);
            } else if self.pos == start || !self.at_any(&[";", "}"]) {
                let id = self.skip_junk(&[",", ";", "}"]);
                ch.push(id);
                if self.at(",") {
                    self.bump(&mut ch);
                }
            }
        }
        if self.at(";") {
            let mut c = Vec::new();
            self.bump(&mut c);
            self.member_list(&mut c, false);
            let id = self.node("enum_body_declarations", c);
            ch.push(id);
        }
        self.expect(&mut ch, "}");
        self.node("enum_body", ch)
    }

    fn member(&mut self, record: bool) -> NodeId {
        if !self.enter() {
            self.leave();
            return self.bail();
        }
        let id = self.member_inner(record);
        self.leave();
        id
    }

    fn member_inner(&mut self, record: bool) -> NodeId {
        if self.at(";") {
            let mut ch = Vec::new();
            self.bump(&mut ch);
            return ch[0];
        }
        let mut ch = Vec::new();
        self.modifiers(&mut ch);
        let is_static = ch.first().is_some_and(|&m| {
            self.nodes[m].children.iter().any(|&c| self.nodes[c].kind == "static")
        });
        if self.at_type_keyword(self.pos) {
            return self.type_declaration(ch);
        }
        if self.at("{") {
            let block = self.block();
            ch.push(block);
            return self.node(if is_static { "static_initializer" } else { "block" }, ch);
        }
        self.type_parameters_opt(&mut ch);
        // constructor
        if self.at_ident() && self.is_text_at(self.pos + 1, "(") {
            self.bump(&mut ch);
            let params = self.formal_parameters();
            ch.push(params);
            self.throws_opt(&mut ch);
            let body = self.block_named("constructor_body");
            ch.push(body);
            return self.node("constructor_declaration", ch);
        }
        if record && self.at_ident() && self.is_text_at(self.pos + 1, "{") {
            self.bump(&mut ch);
            let body = self.block_named("constructor_body");
            ch.push(body);
            return self.node("compact_constructor_declaration", ch);
        }
        if self.scan_declaration(self.pos).is_none() {
            if ch.is_empty() {
                return self.skip_junk(&["}"]);
            }
            let junk = self.skip_junk(&["}"]);
            ch.push(junk);
            return self.error_node(ch);
        }
        let ty = self.parse_type();
        ch.push(ty);
        if self.is_text_at(self.pos + 1, "(") {
            self.bump(&mut ch);
            let params = self.formal_parameters();
            ch.push(params);
            self.dimensions_opt(&mut ch);
            self.throws_opt(&mut ch);
            if self.at("default") {
                self.bump(&mut ch);
                let v = self.element_value();
                ch.push(v);
            }
            if self.at("{") {
                let body = self.block();
                ch.push(body);
            } else {
                self.expect(&mut ch, ";");
            }
            return self.node("method_declaration", ch);
        }
        self.variable_declarators(&mut ch);
        self.expect(&mut ch, ";");
        self.node("field_declaration", ch)
    }

    fn throws_opt(&mut self, ch: &mut Children) {
        if self.at("throws") {
            let mut c = Vec::new();
            self.bump(&mut c);
            let t = self.parse_type();
            c.push(t);
            while self.at(",") {
                self.bump(&mut c);
                let t = self.parse_type();
                c.push(t);
            }
            let id = self.node("throws", c);
            ch.push(id);
        }
    }

    fn dimensions_opt(&mut self, ch: &mut Children) {
        if self.at("[") && self.is_text_at(self.pos + 1, "]") {
            let mut c = Vec::new();
            while self.at("[") && self.is_text_at(self.pos + 1, "]") {
                self.bump(&mut c);
                self.bump(&mut c);
            }
            let id = self.node("dimensions", c);
            ch.push(id);
        }
    }

    fn formal_parameters(&mut self) -> NodeId {
        let mut ch = Vec::new();
        if !self.expect(&mut ch, "(") {
            return self.node("formal_parameters", ch);
        }
        while !self.at(")") && !self.at_eof() {
            let start = self.pos;
            let mut p = Vec::new();
            self.modifiers(&mut p);
            let ty = self.parse_type();
            p.push(ty);
            let kind = if self.at("...") {
                self.bump(&mut p);
                "spread_parameter"
            } else {
                "formal_parameter"
            };
            if self.at("this") {
                self.bump(&mut p);
            } else {
                self.expect_ident(&mut p);
            }
            self.dimensions_opt(&mut p);
            let id = self.node(kind, p);
            ch.push(id);
            if self.at(",") {
                self.bump(&mut ch);
            } else {
                if self.pos == start || !self.at(")") {
                    let id = self.skip_junk(&[")", "{", ";"]);
                    ch.push(id);
                    if self.at(",") {
                        self.bump(&mut ch);
                        continue;
                    }
                }
                break;
            }
        }
        self.expect(&mut ch, ")");
        self.node("formal_parameters", ch)
    }

    fn variable_declarators(&mut self, ch: &mut Children) {
        loop {
            let mut d = Vec::new();
            self.expect_ident(&mut d);
            self.dimensions_opt(&mut d);
            if self.at("=") {
                self.bump(&mut d);
                let v = self.variable_initializer();
                d.push(v);
            }
            let id = self.node("variable_declarator", d);
            ch.push(id);
            if self.at(",") {
                self.bump(ch);
            } else {
                break;
            }
        }
    }

    fn variable_initializer(&mut self) -> NodeId {
        if self.at("{") {
            self.array_initializer_with(Self::variable_initializer, "array_initializer")
        } else {
            self.expression()
        }
    }

    fn array_initializer_with(&mut self, item: fn(&mut Self) -> NodeId, kind: &'static str) -> NodeId {
        let mut ch = Vec::new();
        if !self.enter() {
            self.leave();
            return self.bail();
        }
        self.bump(&mut ch); // {
        while !self.at("}") && !self.at_eof() {
            let start = self.pos;
            let v = item(self);
            ch.push(v);
            if self.at(",") {
                self.bump(&mut ch);
            } else {
                if self.pos == start || !self.at("}") {
                    let id = self.skip_junk(&["}", ","]);
                    ch.push(id);
                    if self.at(",") {
                        self.bump(&mut ch);
                        continue;
                    }
                }
                break;
            }
        }
        self.expect(&mut ch, "}");
        self.leave();
        self.node(kind, ch)
    }

    // ----- types -----

    fn parse_type(&mut self) -> NodeId {
        let mut ch = Vec::new();
        while self.at("@") && self.is_ident_at(self.pos + 1) {
            let a = self.annotation();
            ch.push(a);
        }
        let base = self.unannotated_type();
        let mut id = if ch.is_empty() {
            base
        } else {
            ch.push(base);
            self.node("annotated_type", ch)
        };
        if self.at("[") && self.is_text_at(self.pos + 1, "]") {
            let mut c = vec![id];
            self.dimensions_opt(&mut c);
            id = self.node("array_type", c);
        }
        id
    }

    fn unannotated_type(&mut self) -> NodeId {
        let mut ch = Vec::new();
        let text = self.peek();
        if self.kind_at(self.pos) == Some(TokenKind::Keyword) {
            let kind = match text {
                "void" => Some("void_type"),
                "boolean" => Some("boolean_type"),
                "float" | "double" => Some("floating_point_type"),
                t if PRIMITIVES.contains(&t) => Some("integral_type"),
                _ => None,
            };
            if let Some(kind) = kind {
                return self.bump_as(&mut ch, kind);
            }
        }
        if !self.at_ident() {
            return self.missing(&mut ch);
        }
        let mut id = self.bump_as(&mut ch, "type_identifier");
        loop {
            if self.at("<") {
                let args = self.type_arguments();
                id = self.node("generic_type", vec![id, args]);
            }
            if self.at(".") && self.is_ident_at(self.pos + 1) {
                let mut c = vec![id];
                self.bump(&mut c);
                self.bump_as(&mut c, "type_identifier");
                id = self.node("scoped_type_identifier", c);
                continue;
            }
            break;
        }
        id
    }

    fn type_arguments(&mut self) -> NodeId {
        let mut ch = Vec::new();
        if !self.enter() {
            self.leave();
            return self.bail();
        }
        self.bump(&mut ch); // <
        while !self.peek().starts_with('>') && !self.at_eof() {
            let start = self.pos;
            if self.at("?") {
                let mut w = Vec::new();
                self.bump(&mut w);
                if self.at_any(&["extends", "super"]) {
                    self.bump(&mut w);
                    let t = self.parse_type();
                    w.push(t);
                }
                let id = self.node("wildcard", w);
                ch.push(id);
            } else {
                let t = self.parse_type();
                ch.push(t);
            }
            if self.at(",") {
                self.bump(&mut ch);
            } else if self.pos == start || !self.peek().starts_with('>') {
                break;
            }
        }
        self.expect_gt(&mut ch);
        self.leave();
        self.node("type_arguments", ch)
    }

    // ----- statements -----

    fn block(&mut self) -> NodeId {
        self.block_named("block")
    }

    fn block_named(&mut self, kind: &'static str) -> NodeId {
        let mut ch = Vec::new();
        if !self.expect(&mut ch, "{") {
            return self.node(kind, ch);
        }
        self.statements_until_close(&mut ch);
        self.expect(&mut ch, "}");
        self.node(kind, ch)
    }

    fn statements_until_close(&mut self, ch: &mut Children) {
        while !self.at("}") && !self.at_eof() {
            let start = self.pos;
            let id = self.statement();
            ch.push(id);
            if self.pos == start {
                let id = self.skip_junk(&["}"]);
                ch.push(id);
            }
        }
    }

    fn statement(&mut self) -> NodeId {
        if !self.enter() {
            self.leave();
            return self.bail();
        }
        let id = self.statement_inner();
        self.leave();
        id
    }

    fn statement_inner(&mut self) -> NodeId {
        let mut ch = Vec::new();
        if self.at_ident() && self.is_text_at(self.pos + 1, ":") {
            self.bump(&mut ch);
            self.bump(&mut ch);
            let s = self.statement();
            ch.push(s);
            return self.node("labeled_statement", ch);
        }
        if self.at_ident() && self.peek() == "yield" && self.starts_expression(self.pos + 1)
            && !matches!(self.nth(1), "=" | "(" | "++" | "--" | "+" | "-")
        {
            self.bump(&mut ch);
            let e = self.expression();
            ch.push(e);
            self.expect(&mut ch, ";");
            return self.node("yield_statement", ch);
        }
        if self.kind_at(self.pos) == Some(TokenKind::Keyword) || self.at("{") || self.at(";") || self.at("@") {
            match self.peek() {
                "{" => return self.block(),
                ";" => {
                    self.bump(&mut ch);
                    return ch[0];
                }
                "if" => return self.if_statement(),
                "while" => {
                    self.bump(&mut ch);
                    let c = self.parenthesized();
                    ch.push(c);
                    let body = self.statement();
                    ch.push(body);
                    return self.node("while_statement", ch);
                }
                "do" => {
                    self.bump(&mut ch);
                    let body = self.statement();
                    ch.push(body);
                    self.expect(&mut ch, "while");
                    let c = self.parenthesized();
                    ch.push(c);
                    self.expect(&mut ch, ";");
                    return self.node("do_statement", ch);
                }
                "for" => return self.for_statement(),
                "try" => return self.try_statement(),
                "switch" => {
                    let id = self.switch_expression();
                    let mut ch = vec![id];
                    if self.at(";") {
                        self.bump(&mut ch);
                        return self.node("expression_statement", ch);
                    }
                    return self.node("switch_statement", ch);
                }
                "return" => {
                    self.bump(&mut ch);
                    if !self.at(";") && !self.at("}") && !self.at_eof() {
                        let e = self.expression();
                        ch.push(e);
                    }
                    self.expect(&mut ch, ";");
                    return self.node("return_statement", ch);
                }
                "throw" => {
                    self.bump(&mut ch);
                    let e = self.expression();
                    ch.push(e);
                    self.expect(&mut ch, ";");
                    return self.node("throw_statement", ch);
                }
                "break" | "continue" => {
                    let kind = if self.peek() == "break" { "break_statement" } else { "continue_statement" };
                    self.bump(&mut ch);
                    if self.at_ident() {
                        self.bump(&mut ch);
                    }
                    self.expect(&mut ch, ";");
                    return self.node(kind, ch);
                }
                "synchronized" if self.is_text_at(self.pos + 1, "(") => {
                    self.bump(&mut ch);
                    let c = self.parenthesized();
                    ch.push(c);
                    let b = self.block();
                    ch.push(b);
                    return self.node("synchronized_statement", ch);
                }
                "assert" => {
                    self.bump(&mut ch);
                    let e = self.expression();
                    ch.push(e);
                    if self.at(":") {
                        self.bump(&mut ch);
                        let e = self.expression();
                        ch.push(e);
                    }
                    self.expect(&mut ch, ";");
                    return self.node("assert_statement", ch);
                }
                "else" | "catch" | "finally" | "case" | "default" if !self.at_type_declaration_start() => {
                    return self.skip_junk(&["}"]);
                }
                _ => {}
            }
            if self.at_type_declaration_start() {
                let mut mods = Vec::new();
                self.modifiers(&mut mods);
                return self.type_declaration(mods);
            }
            if self.at("final") || self.at("@") {
                let mut mods = Vec::new();
                self.modifiers(&mut mods);
                return self.local_variable_declaration(mods, true);
            }
        }
        if self.at_local_declaration() {
            return self.local_variable_declaration(Vec::new(), true);
        }
        let e = self.expression();
        ch.push(e);
        self.expect(&mut ch, ";");
        self.node("expression_statement", ch)
    }

    fn local_variable_declaration(&mut self, mut ch: Children, semi: bool) -> NodeId {
        let t = self.parse_type();
        ch.push(t);
        self.variable_declarators(&mut ch);
        if semi {
            self.expect(&mut ch, ";");
        }
        self.node("local_variable_declaration", ch)
    }

    fn if_statement(&mut self) -> NodeId {
        let mut ch = Vec::new();
        self.bump(&mut ch);
        let c = self.parenthesized();
        ch.push(c);
        let s = self.statement();
        ch.push(s);
        if self.at("else") {
            self.bump(&mut ch);
            let s = self.statement();
            ch.push(s);
        }
        self.node("if_statement", ch)
    }

    fn for_statement(&mut self) -> NodeId {
        let mut ch = Vec::new();
        self.bump(&mut ch);
        self.expect(&mut ch, "(");
        // enhanced for: modifiers type name ':'
        let mut i = self.pos;
        while let Some(j) = self.scan_annotation(i) {
            i = j;
        }
        while self.is_text_at(i, "final") {
            i += 1;
        }
        let enhanced = self.scan_declaration(i).is_some_and(|name| self.is_text_at(name + 1, ":"));
        if enhanced {
            self.modifiers(&mut ch);
            let t = self.parse_type();
            ch.push(t);
            self.expect_ident(&mut ch);
            self.bump(&mut ch); // :
            let e = self.expression();
            ch.push(e);
            self.expect(&mut ch, ")");
            let body = self.statement();
            ch.push(body);
            return self.node("enhanced_for_statement", ch);
        }
        if !self.at(";") {
            if self.at("final") || self.at("@") || self.at_local_declaration() {
                let mut mods = Vec::new();
                self.modifiers(&mut mods);
                let d = self.local_variable_declaration(mods, false);
                ch.push(d);
            } else {
                self.expression_list(&mut ch);
            }
        }
        self.expect(&mut ch, ";");
        if !self.at(";") {
            let e = self.expression();
            ch.push(e);
        }
        self.expect(&mut ch, ";");
        if !self.at(")") {
            self.expression_list(&mut ch);
        }
        self.expect(&mut ch, ")");
        let body = self.statement();
        ch.push(body);
        self.node("for_statement", ch)
    }

    fn expression_list(&mut self, ch: &mut Children) {
        let e = self.expression();
        ch.push(e);
        while self.at(",") {
            self.bump(ch);
            let e = self.expression();
            ch.push(e);
        }
    }

    fn try_statement(&mut self) -> NodeId {
        let mut ch = Vec::new();
        self.bump(&mut ch);
        let mut kind = "try_statement";
        if self.at("(") {
            kind = "try_with_resources_statement";
            let mut r = Vec::new();
            self.bump(&mut r);
            while !self.at(")") && !self.at_eof() {
                let start = self.pos;
                let mut res = Vec::new();
                self.modifiers(&mut res);
                if self.at_local_declaration() || !res.is_empty() {
                    let t = self.parse_type();
                    res.push(t);
                    self.expect_ident(&mut res);
                    self.expect(&mut res, "=");
                    let e = self.expression();
                    res.push(e);
                } else {
                    let e = self.expression();
                    res.push(e);
                }
                let id = self.node("resource", res);
                r.push(id);
                if self.at(";") {
                    self.bump(&mut r);
                } else if self.pos == start || !self.at(")") {
                    break;
                }
            }
            self.expect(&mut r, ")");
            let id = self.node("resource_specification", r);
            ch.push(id);
        }
        let b = self.block();
        ch.push(b);
        while self.at("catch") {
            let mut c = Vec::new();
            self.bump(&mut c);
            self.expect(&mut c, "(");
            let mut p = Vec::new();
            self.modifiers(&mut p);
            let mut types = Vec::new();
            let t = self.parse_type();
            types.push(t);
            while self.at("|") {
                self.bump(&mut types);
                let t = self.parse_type();
                types.push(t);
            }
            let ct = self.node("catch_type", types);
            p.push(ct);
            self.expect_ident(&mut p);
            let fp = self.node("catch_formal_parameter", p);
            c.push(fp);
            self.expect(&mut c, ")");
            let body = self.block();
            c.push(body);
            let id = self.node("catch_clause", c);
            ch.push(id);
        }
        if self.at("finally") {
            let mut f = Vec::new();
            self.bump(&mut f);
            let b = self.block();
            f.push(b);
            let id = self.node("finally_clause", f);
            ch.push(id);
        }
        self.node(kind, ch)
    }

    fn switch_expression(&mut self) -> NodeId {
        let mut ch = Vec::new();
        self.bump(&mut ch); // switch
        let c = self.parenthesized();
        ch.push(c);
        let mut body = Vec::new();
        if self.expect(&mut body, "{") {
            while !self.at("}") && !self.at_eof() {
                let start = self.pos;
                if self.at_any(&["case", "default"]) {
                    let group = self.switch_group();
                    body.push(group);
                } else {
                    let id = self.skip_junk(&["}", "case", "default"]);
                    body.push(id);
                }
                if self.pos == start {
                    let id = self.skip_junk(&["}"]);
                    body.push(id);
                }
            }
            self.expect(&mut body, "}");
        }
        let b = self.node("switch_block", body);
        ch.push(b);
        self.node("switch_expression", ch)
    }

    fn switch_group(&mut self) -> NodeId {
        let mut label = Vec::new();
        if self.at("default") {
            self.bump(&mut label);
        } else {
            self.bump(&mut label); // case
            loop {
                if self.at("default") {
                    self.bump(&mut label);
                } else if self.scan_declaration(self.pos).is_some() {
                    let mut pat = Vec::new();
                    let t = self.parse_type();
                    pat.push(t);
                    self.expect_ident(&mut pat);
                    let id = self.node("type_pattern", pat);
                    label.push(id);
                } else {
                    let e = self.ternary();
                    label.push(e);
                }
                if self.at(",") {
                    self.bump(&mut label);
                } else {
                    break;
                }
            }
            if self.at_ident() && self.peek() == "when" {
                let mut g = Vec::new();
                self.bump(&mut g);
                let e = self.expression();
                g.push(e);
                let id = self.node("guard", g);
                label.push(id);
            }
        }
        let label_id = self.node("switch_label", label);
        let mut ch = vec![label_id];
        if self.at("->") {
            self.bump(&mut ch);
            if self.at("{") {
                let b = self.block();
                ch.push(b);
            } else if self.at("throw") {
                let s = self.statement();
                ch.push(s);
            } else {
                let mut es = Vec::new();
                let e = self.expression();
                es.push(e);
                self.expect(&mut es, ";");
                let id = self.node("expression_statement", es);
                ch.push(id);
            }
            return self.node("switch_rule", ch);
        }
        self.expect(&mut ch, ":");
        while !self.at_any(&["case", "default", "}"]) && !self.at_eof() {
            if self.at("default") && !matches!(self.nth(1), ":" | "->") {
                break;
            }
            let start = self.pos;
            let s = self.statement();
            ch.push(s);
            if self.pos == start {
                let id = self.skip_junk(&["}", "case", "default"]);
                ch.push(id);
            }
        }
        self.node("switch_block_statement_group", ch)
    }

    fn parenthesized(&mut self) -> NodeId {
        let mut ch = Vec::new();
        self.expect(&mut ch, "(");
        let e = self.expression();
        ch.push(e);
        self.expect(&mut ch, ")");
        self.node("parenthesized_expression", ch)
    }

    // ----- expressions -----

    fn expression(&mut self) -> NodeId {
        if !self.enter() {
            self.leave();
            return self.bail();
        }
        let id = self.assignment();
        self.leave();
        id
    }

    fn assignment(&mut self) -> NodeId {
        if self.at_lambda() {
            return self.lambda();
        }
        let lhs = self.ternary();
        if self.at_any(ASSIGN_OPS) {
            let mut ch = vec![lhs];
            self.bump(&mut ch);
            let rhs = self.expression();
            ch.push(rhs);
            return self.node("assignment_expression", ch);
        }
        lhs
    }

    fn lambda(&mut self) -> NodeId {
        let mut ch = Vec::new();
        if self.at_ident() {
            self.bump(&mut ch);
        } else {
            // ( params ): either bare names or typed parameters
            let close = self.matching_paren(self.pos).unwrap_or(self.pos);
            let typed = (self.pos + 1..close).any(|i| self.scan_declaration(i) == Some(i + 1) || self.scan_declaration(i).is_some_and(|n| n > i + 1 && n < close));
            if typed {
                let params = self.formal_parameters();
                ch.push(params);
            } else {
                let mut p = Vec::new();
                self.bump(&mut p);
                while !self.at(")") && !self.at_eof() {
                    self.expect_ident(&mut p);
                    if self.at(",") {
                        self.bump(&mut p);
                    } else {
                        break;
                    }
                }
                self.expect(&mut p, ")");
                let id = self.node("inferred_parameters", p);
                ch.push(id);
            }
        }
        self.expect(&mut ch, "->");
        if self.at("{") {
            let b = self.block();
            ch.push(b);
        } else {
            let e = self.expression();
            ch.push(e);
        }
        self.node("lambda_expression", ch)
    }

    fn ternary(&mut self) -> NodeId {
        let cond = self.binary(0);
        if !self.at("?") {
            return cond;
        }
        let mut ch = vec![cond];
        self.bump(&mut ch);
        let a = self.expression();
        ch.push(a);
        self.expect(&mut ch, ":");
        let b = if self.at_lambda() { self.lambda() } else { self.ternary() };
        ch.push(b);
        self.node("ternary_expression", ch)
    }

    fn binary(&mut self, min_prec: u8) -> NodeId {
        if !self.enter() {
            self.leave();
            return self.bail();
        }
        let mut lhs = self.unary();
        loop {
            let op = self.peek();
            if !self.is_symbolic(self.pos) {
                break;
            }
            let Some(prec) = binary_precedence(op) else { break };
            if prec <= min_prec {
                break;
            }
            let mut ch = vec![lhs];
            self.bump(&mut ch);
            if op == "instanceof" {
                if self.at("final") {
                    self.bump(&mut ch);
                }
                let t = self.parse_type();
                ch.push(t);
                if self.at_ident() {
                    self.bump(&mut ch);
                }
                lhs = self.node("instanceof_expression", ch);
                continue;
            }
            let rhs = self.binary(prec);
            ch.push(rhs);
            lhs = self.node("binary_expression", ch);
        }
        self.leave();
        lhs
    }

    fn unary(&mut self) -> NodeId {
        if !self.enter() {
            self.leave();
            return self.bail();
        }
        let id = if self.at_any(&["+", "-", "!", "~"]) {
            let mut ch = Vec::new();
            self.bump(&mut ch);
            let e = self.unary();
            ch.push(e);
            self.node("unary_expression", ch)
        } else if self.at_any(&["++", "--"]) {
            let mut ch = Vec::new();
            self.bump(&mut ch);
            let e = self.unary();
            ch.push(e);
            self.node("update_expression", ch)
        } else if self.at_cast() {
            let mut ch = Vec::new();
            self.bump(&mut ch);
            let t = self.parse_type();
            ch.push(t);
            while self.at("&") {
                self.bump(&mut ch);
                let t = self.parse_type();
                ch.push(t);
            }
            self.expect(&mut ch, ")");
            let e = if self.at_lambda() { self.lambda() } else { self.unary() };
            ch.push(e);
            self.node("cast_expression", ch)
        } else {
            self.postfix()
        };
        self.leave();
        id
    }

    fn postfix(&mut self) -> NodeId {
        let mut e = self.primary();
        loop {
            if self.at(".") {
                let mut ch = vec![e];
                self.bump(&mut ch);
                if self.at("<") {
                    let args = self.type_arguments();
                    ch.push(args);
                }
                match self.peek() {
                    "new" if self.at("new") => {
                        let c = self.creation();
                        ch.push(c);
                        e = self.node("object_creation_expression", ch);
                    }
                    "class" if self.at("class") => {
                        self.bump(&mut ch);
                        e = self.node("class_literal", ch);
                    }
                    "this" | "super" if self.at(self.peek()) => {
                        self.bump(&mut ch);
                        e = self.node("field_access", ch);
                    }
                    _ => {
                        self.expect_ident(&mut ch);
                        if self.at("(") {
                            let args = self.argument_list();
                            ch.push(args);
                            e = self.node("method_invocation", ch);
                        } else {
                            e = self.node("field_access", ch);
                        }
                    }
                }
            } else if self.at("[") {
                if self.is_text_at(self.pos + 1, "]") {
                    // array type in expression position: Foo[].class, int[]::new
                    let mut ch = vec![e];
                    self.dimensions_opt(&mut ch);
                    e = self.node("array_type", ch);
                    continue;
                }
                let mut ch = vec![e];
                self.bump(&mut ch);
                let idx = self.expression();
                ch.push(idx);
                self.expect(&mut ch, "]");
                e = self.node("array_access", ch);
            } else if self.at("::") {
                let mut ch = vec![e];
                self.bump(&mut ch);
                if self.at("<") {
                    let args = self.type_arguments();
                    ch.push(args);
                }
                if self.at("new") {
                    self.bump(&mut ch);
                } else {
                    self.expect_ident(&mut ch);
                }
                e = self.node("method_reference", ch);
            } else if self.at_any(&["++", "--"]) {
                let mut ch = vec![e];
                self.bump(&mut ch);
                e = self.node("update_expression", ch);
            } else {
                break;
            }
        }
        e
    }

    fn argument_list(&mut self) -> NodeId {
        let mut ch = Vec::new();
        self.bump(&mut ch); // (
        while !self.at(")") && !self.at_eof() {
            let start = self.pos;
            let e = self.expression();
            ch.push(e);
            if self.at(",") {
                self.bump(&mut ch);
            } else {
                if self.pos == start || !self.at(")") {
                    if self.at_any(&[";", "{", "}"]) {
                        break;
                    }
                    let id = self.skip_junk(&[")", ",", ";", "{", "}"]);
                    ch.push(id);
                    if self.at(",") {
                        self.bump(&mut ch);
                        continue;
                    }
                }
                break;
            }
        }
        self.expect(&mut ch, ")");
        self.node("argument_list", ch)
    }

    fn primary(&mut self) -> NodeId {
        let mut ch = Vec::new();
        let Some(kind) = self.kind_at(self.pos) else {
            return self.missing(&mut ch);
        };
        let text = self.peek();
        match kind {
            k if k.is_literal() => self.bump(&mut ch),
            TokenKind::Identifier => {
                let id = self.bump(&mut ch);
                if self.at("(") {
                    let args = self.argument_list();
                    ch.push(args);
                    self.node("method_invocation", ch)
                } else {
                    id
                }
            }
            TokenKind::Keyword => match text {
                "this" | "super" => {
                    let id = self.bump(&mut ch);
                    if self.at("(") {
                        let args = self.argument_list();
                        ch.push(args);
                        self.node("explicit_constructor_invocation", ch)
                    } else {
                        id
                    }
                }
                "new" => self.creation(),
                "switch" => self.switch_expression(),
                t if PRIMITIVES.contains(&t) || t == "void" => {
                    let ty = self.parse_type();
                    let mut ch = vec![ty];
                    if self.at(".") && self.is_text_at(self.pos + 1, "class") {
                        self.bump(&mut ch);
                        self.bump(&mut ch);
                        self.node("class_literal", ch)
                    } else if self.at("::") {
                        ty
                    } else {
                        self.missing(&mut ch);
                        self.error_node(ch)
                    }
                }
                _ => self.primary_error(),
            },
            TokenKind::Separator | TokenKind::Operator => match text {
                "(" => {
                    self.bump(&mut ch);
                    let e = self.expression();
                    ch.push(e);
                    self.expect(&mut ch, ")");
                    self.node("parenthesized_expression", ch)
                }
                "@" if self.is_ident_at(self.pos + 1) => {
                    // annotated expression type (e.g. inside casts recovered as expressions)
                    let a = self.annotation();
                    let mut ch = vec![a];
                    let e = self.primary();
                    ch.push(e);
                    self.error_node(ch)
                }
                _ => self.primary_error(),
            },
            _ => self.primary_error(),
        }
    }

    fn primary_error(&mut self) -> NodeId {
        let mut ch = Vec::new();
        if self.at_any(&[";", ")", "}", "]", ",", ":"]) {
            return self.missing(&mut ch);
        }
        self.bump(&mut ch);
        self.error_node(ch)
    }

    /// `new` ... for objects and arrays; the caller has not consumed `new`.
    fn creation(&mut self) -> NodeId {
        let mut ch = Vec::new();
        self.bump(&mut ch); // new
        if self.at("<") {
            let args = self.type_arguments();
            ch.push(args);
        }
        while self.at("@") && self.is_ident_at(self.pos + 1) {
            let a = self.annotation();
            ch.push(a);
        }
        let ty = self.unannotated_type();
        ch.push(ty);
        if self.at("[") {
            let mut dims_exprs = Vec::new();
            while self.at("[") && !self.is_text_at(self.pos + 1, "]") {
                let mut d = Vec::new();
                self.bump(&mut d);
                let e = self.expression();
                d.push(e);
                self.expect(&mut d, "]");
                let id = self.node("dimensions_expr", d);
                dims_exprs.push(id);
            }
            ch.extend(dims_exprs);
            self.dimensions_opt(&mut ch);
            if self.at("{") {
                let init = self.array_initializer_with(Self::variable_initializer, "array_initializer");
                ch.push(init);
            }
            return self.node("array_creation_expression", ch);
        }
        if self.at("(") {
            let args = self.argument_list();
            ch.push(args);
        } else {
            self.missing(&mut ch);
        }
        if self.at("{") {
            let body = self.class_body(false);
            ch.push(body);
        }
        self.node("object_creation_expression", ch)
    }
}
