//! Subtree-shape matching between candidate and reference syntax trees.

use std::collections::HashSet;

use crate::java::SyntaxTree;

/// Shapes of every internal named subtree, comments excluded.
pub fn subtree_shapes(tree: &SyntaxTree) -> Vec<String> {
    let mut out = Vec::new();
    let mut stack = vec![tree.root];
    while let Some(id) = stack.pop() {
        let node = tree.node(id);
        if node.is_comment() {
            continue;
        }
        if node.named && !node.is_leaf() {
            out.push(tree.sexp(id));
        }
        stack.extend(node.children.iter().copied());
    }
    out
}

/// Matched and total reference subtrees.
pub fn match_counts(candidate: &SyntaxTree, reference: &SyntaxTree) -> (usize, usize) {
    let cand: HashSet<String> = subtree_shapes(candidate).into_iter().collect();
    let refs = subtree_shapes(reference);
    let matched = refs.iter().filter(|s| cand.contains(*s)).count();
    (matched, refs.len())
}

/// Fraction of reference subtrees whose shape also occurs in the candidate.
pub fn ast_match(candidate: &SyntaxTree, reference: &SyntaxTree) -> f64 {
    if candidate.is_unparseable() {
        return 0.0;
    }
    let (matched, total) = match_counts(candidate, reference);
    if total == 0 {
        0.0
    } else {
        matched as f64 / total as f64
    }
}
