//! CodeBLEU: n-gram, keyword-weighted n-gram, syntax-subtree and dataflow
//! agreement between a raw model output and the reference fix.

pub mod dataflow;
pub mod ngram;
pub mod syntax;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::java::{self, TokenKind};

pub const DEFAULT_MAX_N: usize = 4;
pub const KEYWORD_WEIGHT: f64 = 5.0;
/// Label carried into reports for the simplified dataflow component.
pub const DATAFLOW_METHOD: &str = "approx";

#[derive(Debug, Error, PartialEq)]
pub enum CodeBleuError {
    #[error("reference snippet is empty")]
    EmptyReference,
    #[error("weights must be non-negative and sum to 1, got {0:?}")]
    BadWeights([f64; 4]),
    #[error("max_n must be at least 1")]
    BadOrder,
}

/// Component weights: n-gram, weighted n-gram, syntax, dataflow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weights(pub [f64; 4]);

impl Default for Weights {
    fn default() -> Self {
        Weights([0.25; 4])
    }
}

impl Weights {
    pub fn new(w: [f64; 4]) -> Result<Self, CodeBleuError> {
        let sum: f64 = w.iter().sum();
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(CodeBleuError::BadWeights(w));
        }
        Ok(Weights(w))
    }

    /// Weights with dataflow dropped and the rest rescaled to sum to 1.
    fn without_dataflow(self) -> [f64; 4] {
        let [a, b, c, _] = self.0;
        let sum = a + b + c;
        if sum == 0.0 {
            [0.0; 4]
        } else {
            [a / sum, b / sum, c / sum, 0.0]
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuScore {
    pub total: f64,
    pub ngram: f64,
    pub weighted_ngram: f64,
    pub ast_match: f64,
    pub dataflow_match: Option<f64>,
    /// Effective weights; the dataflow weight is 0 when that component is absent.
    pub weights: [f64; 4],
}

impl CodeBleuScore {
    pub fn zero(weights: Weights) -> Self {
        CodeBleuScore { total: 0.0, ngram: 0.0, weighted_ngram: 0.0, ast_match: 0.0, dataflow_match: None, weights: weights.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeToken {
    pub kind: TokenKind,
    pub text: String,
}

/// Lex Java-ish text for scoring. Comments stay, one token each.
pub fn tokenize_code(text: &str) -> Vec<CodeToken> {
    java::tokenize(text).into_iter().map(|t| CodeToken { kind: t.kind, text: t.text(text).to_string() }).collect()
}

fn lexemes(tokens: &[CodeToken]) -> Vec<String> {
    tokens.iter().map(|t| t.text.clone()).collect()
}

pub fn keyword_weight(token: &str) -> f64 {
    if java::is_keyword(token) {
        KEYWORD_WEIGHT
    } else {
        1.0
    }
}

pub fn code_bleu(candidate: &str, reference: &str, weights: Weights, max_n: usize) -> Result<CodeBleuScore, CodeBleuError> {
    if max_n == 0 {
        return Err(CodeBleuError::BadOrder);
    }
    let ref_tokens = tokenize_code(reference);
    if reference.trim().is_empty() || ref_tokens.is_empty() {
        return Err(CodeBleuError::EmptyReference);
    }
    let ref_tree = java::parse_snippet(reference);
    let ref_edges_present = !dataflow::dataflow_edges(&ref_tree).is_empty();
    let cand_tokens = tokenize_code(candidate);
    if cand_tokens.is_empty() {
        let effective = if ref_edges_present { weights.0 } else { weights.without_dataflow() };
        return Ok(CodeBleuScore {
            dataflow_match: ref_edges_present.then_some(0.0),
            weights: effective,
            ..CodeBleuScore::zero(weights)
        });
    }

    let cand = lexemes(&cand_tokens);
    let refs = lexemes(&ref_tokens);
    let ngram = ngram::bleu(&cand, &refs, max_n);
    let weighted_ngram = ngram::weighted_bleu(&cand, &refs, max_n, &keyword_weight);
    let cand_tree = java::parse_snippet(candidate);
    let ast_match = syntax::ast_match(&cand_tree, &ref_tree);
    let dataflow_match = dataflow::dataflow_match(&cand_tree, &ref_tree);

    let effective = match dataflow_match {
        Some(_) => weights.0,
        None => weights.without_dataflow(),
    };
    let components = [ngram, weighted_ngram, ast_match, dataflow_match.unwrap_or(0.0)];
    let total: f64 = effective.iter().zip(components).map(|(w, c)| w * c).sum();
    Ok(CodeBleuScore { total: total.clamp(0.0, 1.0), ngram, weighted_ngram, ast_match, dataflow_match, weights: effective })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_match() {
        let x = "int a = b + 1;\nreturn a;";
        let s = code_bleu(x, x, Weights::default(), 4).unwrap();
        assert!((s.total - 1.0).abs() < 1e-12, "{s:?}");
    }

    #[test]
    fn empty_candidate() {
        let s = code_bleu("", "return x;", Weights::default(), 4).unwrap();
        assert_eq!(s.total, 0.0);
        assert_eq!(s.ngram, 0.0);
    }

    #[test]
    fn renormalizes_without_dataflow() {
        let s = code_bleu("return;", "return;", Weights::default(), 4).unwrap();
        assert_eq!(s.dataflow_match, None);
        assert_eq!(s.weights[3], 0.0);
        assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((s.total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tokenizer_examples() {
        let t: Vec<String> = tokenize_code("a+=1;").into_iter().map(|t| t.text).collect();
        assert_eq!(t, ["a", "+=", "1", ";"]);
        let t = tokenize_code("\"x y\"");
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].kind, TokenKind::StringLiteral);
        let t = tokenize_code("// hi");
        assert_eq!(t.len(), 1);
        assert!(t[0].kind.is_comment());
    }

    #[test]
    fn weights_validate() {
        assert!(Weights::new([0.5, 0.5, 0.0, 0.0]).is_ok());
        assert!(Weights::new([0.5, 0.6, 0.0, 0.0]).is_err());
        assert!(Weights::new([-0.5, 1.5, 0.0, 0.0]).is_err());
    }

    #[test]
    fn empty_reference_is_error() {
        assert_eq!(code_bleu("x", "  ", Weights::default(), 4), Err(CodeBleuError::EmptyReference));
    }
}
