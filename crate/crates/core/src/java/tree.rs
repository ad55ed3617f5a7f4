use std::ops::Range;

use super::lexer::Token;

pub type NodeId = usize;

/// Node label used for unparseable regions and for tokens the parser expected
/// but did not find (zero-width).
pub const ERROR: &str = "ERROR";

#[derive(Clone, Debug)]
pub struct Node {
    pub kind: &'static str,
    /// Named nodes carry structure; anonymous leaves are keywords, operators
    /// and punctuation.
    pub named: bool,
    pub span: Range<usize>,
    pub children: Vec<NodeId>,
    pub error: bool,
    /// Index into [`SyntaxTree::tokens`] for leaves.
    pub token: Option<usize>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn is_comment(&self) -> bool {
        matches!(self.kind, "line_comment" | "block_comment")
    }

    pub fn is_missing(&self) -> bool {
        self.error && self.span.is_empty() && self.token.is_none()
    }
}

/// Which wrapping context produced the tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseContext {
    CompilationUnit,
    BlockStatements,
    ClassMembers,
}

#[derive(Clone, Debug)]
pub struct SyntaxTree {
    pub source: String,
    pub tokens: Vec<Token>,
    pub nodes: Vec<Node>,
    pub root: NodeId,
    pub context: ParseContext,
}

impl SyntaxTree {
    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn root(&self) -> &Node {
        &self.nodes[self.root]
    }

    pub fn text(&self, id: NodeId) -> &str {
        &self.source[self.nodes[id].span.clone()]
    }

    /// Pre-order walk of the nodes reachable from the root.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.nodes[id].children.iter().rev());
        }
        out
    }

    /// Leaves in source order.
    pub fn leaves(&self) -> Vec<NodeId> {
        self.preorder().into_iter().filter(|&id| self.nodes[id].is_leaf() && self.nodes[id].token.is_some()).collect()
    }

    pub fn has_errors(&self) -> bool {
        self.preorder().into_iter().any(|id| self.nodes[id].error)
    }

    /// Bytes covered by error nodes, plus one per missing token.
    pub fn error_weight(&self) -> usize {
        let mut weight = 0;
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if node.error {
                weight += node.span.len().max(1);
            } else {
                stack.extend(node.children.iter().copied());
            }
        }
        weight
    }

    /// True when the whole input is a single error node.
    pub fn is_unparseable(&self) -> bool {
        self.root().error
    }

    /// S-expression over named nodes, in the style of tree-sitter.
    pub fn sexp(&self, id: NodeId) -> String {
        let mut out = String::new();
        self.write_sexp(id, &mut out);
        out
    }

    fn write_sexp(&self, id: NodeId, out: &mut String) {
        let node = &self.nodes[id];
        out.push('(');
        out.push_str(node.kind);
        for &child in &node.children {
            let c = &self.nodes[child];
            if c.named && !c.is_comment() {
                out.push(' ');
                self.write_sexp(child, out);
            }
        }
        out.push(')');
    }

    /// Indented rendering for debugging.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![(self.root, 0usize)];
        while let Some((id, depth)) = stack.pop() {
            let node = &self.nodes[id];
            out.push_str(&"  ".repeat(depth));
            out.push_str(node.kind);
            if node.error {
                out.push_str(if node.is_missing() { " MISSING" } else { " !" });
            }
            if node.is_leaf() && node.token.is_some() {
                out.push_str(&format!(" {:?}", self.text(id)));
            }
            out.push('\n');
            for &child in node.children.iter().rev() {
                stack.push((child, depth + 1));
            }
        }
        out
    }
}
