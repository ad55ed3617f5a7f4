//! Approximate def-use graph over local variables.
//!
//! Single pass in source order: declarations, parameters and assignments
//! define a name; an identifier read yields a `comesFrom` edge when a
//! definition of that name is visible. Definitions with an initializer or
//! right-hand side yield a `computedFrom` edge listing the names read there.
//! Names are replaced by `var_<i>` in order of first appearance in an edge.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::java::{NodeId, SyntaxTree};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Edge {
    pub var: String,
    pub relation: Relation,
    pub sources: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Relation {
    #[serde(rename = "comesFrom")]
    ComesFrom,
    #[serde(rename = "computedFrom")]
    ComputedFrom,
}

const SCOPE_KINDS: &[&str] = &[
    "block", "constructor_body", "for_statement", "enhanced_for_statement", "method_declaration",
    "constructor_declaration", "lambda_expression", "catch_clause", "class_body", "switch_block",
    "try_with_resources_statement",
];

struct Walker<'t> {
    tree: &'t SyntaxTree,
    scopes: Vec<HashSet<String>>,
    raw: Vec<(String, Relation, Vec<String>)>,
}

impl<'t> Walker<'t> {
    fn text(&self, id: NodeId) -> String {
        self.tree.text(id).to_string()
    }

    fn kind(&self, id: NodeId) -> &'static str {
        self.tree.node(id).kind
    }

    fn children(&self, id: NodeId) -> Vec<NodeId> {
        self.tree.node(id).children.iter().copied().filter(|&c| !self.tree.node(c).is_comment()).collect()
    }

    fn visible(&self, name: &str) -> bool {
        self.scopes.iter().rev().any(|s| s.contains(name))
    }

    fn define(&mut self, name: String) {
        self.scopes.last_mut().expect("scope").insert(name);
    }

    fn read(&mut self, name: String, reads: &mut Vec<String>) {
        if self.visible(&name) {
            self.raw.push((name.clone(), Relation::ComesFrom, vec![name.clone()]));
        }
        reads.push(name);
    }

    fn first_child_of(&self, id: NodeId, kind: &str) -> Option<NodeId> {
        self.children(id).into_iter().find(|&c| self.kind(c) == kind)
    }

    fn last_identifier(&self, id: NodeId) -> Option<NodeId> {
        self.children(id).into_iter().rev().find(|&c| self.kind(c) == "identifier")
    }

    fn visit(&mut self, id: NodeId, reads: &mut Vec<String>) {
        let kind = self.kind(id);
        let scoped = SCOPE_KINDS.contains(&kind);
        if scoped {
            self.scopes.push(HashSet::new());
        }
        self.visit_inner(id, kind, reads);
        if scoped {
            self.scopes.pop();
        }
    }

    fn visit_all(&mut self, ids: &[NodeId], reads: &mut Vec<String>) {
        for &c in ids {
            self.visit(c, reads);
        }
    }

    fn visit_inner(&mut self, id: NodeId, kind: &'static str, reads: &mut Vec<String>) {
        let children = self.children(id);
        match kind {
            "identifier" => {
                let name = self.text(id);
                self.read(name, reads);
            }
            "variable_declarator" | "resource" => {
                let Some(name) = self.first_child_of(id, "identifier") else {
                    self.visit_all(&children, reads);
                    return;
                };
                let eq = children.iter().position(|&c| self.tree.text(c) == "=" && !self.tree.node(c).named);
                if let Some(eq) = eq {
                    let mut rhs_reads = Vec::new();
                    self.visit_all(&children[eq + 1..], &mut rhs_reads);
                    let name_text = self.text(name);
                    self.raw.push((name_text.clone(), Relation::ComputedFrom, rhs_reads.clone()));
                    reads.extend(rhs_reads);
                    self.define(name_text);
                } else if kind == "resource" && children.len() == 1 {
                    self.visit_all(&children, reads);
                } else {
                    self.define(self.text(name));
                }
            }
            "assignment_expression" => {
                let (Some(&lhs), Some(&op)) = (children.first(), children.get(1)) else {
                    self.visit_all(&children, reads);
                    return;
                };
                let mut rhs_reads = Vec::new();
                self.visit_all(&children[2..], &mut rhs_reads);
                if self.kind(lhs) == "identifier" {
                    let name = self.text(lhs);
                    let compound = self.tree.text(op) != "=";
                    let mut sources = Vec::new();
                    if compound {
                        self.read(name.clone(), &mut sources);
                    }
                    sources.extend(rhs_reads.iter().cloned());
                    self.raw.push((name.clone(), Relation::ComputedFrom, sources));
                    if !self.visible(&name) {
                        self.define(name.clone());
                    }
                    reads.push(name);
                } else {
                    self.visit(lhs, reads);
                }
                reads.extend(rhs_reads);
            }
            "update_expression" => {
                if let Some(&operand) = children.iter().find(|&&c| self.tree.node(c).named) {
                    if self.kind(operand) == "identifier" {
                        let name = self.text(operand);
                        let mut sources = Vec::new();
                        self.read(name.clone(), &mut sources);
                        self.raw.push((name.clone(), Relation::ComputedFrom, sources));
                        if !self.visible(&name) {
                            self.define(name.clone());
                        }
                        reads.push(name);
                        return;
                    }
                }
                self.visit_all(&children, reads);
            }
            "formal_parameter" | "spread_parameter" | "catch_formal_parameter" | "type_pattern" => {
                if let Some(name) = self.last_identifier(id) {
                    self.define(self.text(name));
                }
            }
            "inferred_parameters" => {
                for c in children {
                    if self.kind(c) == "identifier" {
                        self.define(self.text(c));
                    }
                }
            }
            "lambda_expression" => {
                for c in children {
                    if self.kind(c) == "identifier" {
                        self.define(self.text(c));
                    } else {
                        self.visit(c, reads);
                    }
                }
            }
            "instanceof_expression" => {
                if let Some(&first) = children.first() {
                    self.visit(first, reads);
                }
                if children.len() > 2 {
                    if let Some(name) = self.last_identifier(id).filter(|&n| Some(&n) != children.first()) {
                        self.define(self.text(name));
                    }
                }
            }
            "enhanced_for_statement" => {
                // for (T name : iterable) body
                let colon = children.iter().position(|&c| self.tree.text(c) == ":" && !self.tree.node(c).named);
                let Some(colon) = colon else {
                    self.visit_all(&children, reads);
                    return;
                };
                let name = children[..colon].iter().rev().copied().find(|&c| self.kind(c) == "identifier");
                let close = children.iter().rposition(|&c| self.tree.text(c) == ")" && !self.tree.node(c).named).unwrap_or(children.len());
                let iter_end = close.max(colon + 1);
                let mut iter_reads = Vec::new();
                self.visit_all(&children[colon + 1..iter_end], &mut iter_reads);
                if let Some(name) = name {
                    let name = self.text(name);
                    self.raw.push((name.clone(), Relation::ComputedFrom, iter_reads.clone()));
                    self.define(name);
                }
                reads.extend(iter_reads);
                self.visit_all(&children[iter_end..], reads);
            }
            "method_invocation" => {
                // [object .] name arguments: the name is not a variable
                let args = children.iter().position(|&c| self.kind(c) == "argument_list");
                let name_at = args.and_then(|a| a.checked_sub(1));
                for (i, &c) in children.iter().enumerate() {
                    if Some(i) == name_at && self.kind(c) == "identifier" {
                        continue;
                    }
                    self.visit(c, reads);
                }
            }
            "field_access" => {
                if let Some(&object) = children.first() {
                    self.visit(object, reads);
                }
            }
            "method_reference" => {
                if let Some(&object) = children.first() {
                    self.visit(object, reads);
                }
            }
            "labeled_statement" => {
                self.visit_all(&children[1.min(children.len())..], reads);
            }
            "break_statement" | "continue_statement" | "scoped_identifier" | "marker_annotation" | "annotation"
            | "package_declaration" | "import_declaration" | "enum_constant" => {}
            "class_declaration" | "interface_declaration" | "enum_declaration" | "record_declaration"
            | "annotation_type_declaration" | "method_declaration" | "constructor_declaration"
            | "compact_constructor_declaration" => {
                for c in children {
                    if self.kind(c) != "identifier" {
                        self.visit(c, reads);
                    }
                }
            }
            _ => self.visit_all(&children, reads),
        }
    }
}

/// Def-use edges with anonymized variable names.
pub fn dataflow_edges(tree: &SyntaxTree) -> Vec<Edge> {
    let mut walker = Walker { tree, scopes: vec![HashSet::new()], raw: Vec::new() };
    let mut reads = Vec::new();
    walker.visit(tree.root, &mut reads);
    let mut names: HashMap<String, String> = HashMap::new();
    let mut anon = |name: &str| {
        let next = names.len();
        names.entry(name.to_string()).or_insert_with(|| format!("var_{next}")).clone()
    };
    walker
        .raw
        .into_iter()
        .map(|(var, relation, sources)| {
            let var = anon(&var);
            let sources = sources.iter().map(|s| anon(s)).collect();
            Edge { var, relation, sources }
        })
        .collect()
}

/// F1 of the multiset intersection of edges; `None` when the reference has none.
pub fn dataflow_match(candidate: &SyntaxTree, reference: &SyntaxTree) -> Option<f64> {
    let refs = dataflow_edges(reference);
    if refs.is_empty() {
        return None;
    }
    if candidate.is_unparseable() {
        return Some(0.0);
    }
    let cand = dataflow_edges(candidate);
    Some(edge_f1(&cand, &refs))
}

pub(crate) fn edge_f1(cand: &[Edge], refs: &[Edge]) -> f64 {
    if cand.is_empty() || refs.is_empty() {
        return 0.0;
    }
    let mut pool: HashMap<&Edge, usize> = HashMap::new();
    for e in refs {
        *pool.entry(e).or_insert(0) += 1;
    }
    let mut common = 0usize;
    for e in cand {
        if let Some(n) = pool.get_mut(e) {
            if *n > 0 {
                *n -= 1;
                common += 1;
            }
        }
    }
    if common == 0 {
        return 0.0;
    }
    let precision = common as f64 / cand.len() as f64;
    let recall = common as f64 / refs.len() as f64;
    2.0 * precision * recall / (precision + recall)
}
