//! Sentence BLEU over code tokens, plain and keyword-weighted.

use std::collections::HashMap;

fn counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut map = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *map.entry(gram).or_insert(0) += 1;
        }
    }
    map
}

/// Clipped matches and candidate total for order `n`, each n-gram weighted by `weight`.
fn clipped(candidate: &[String], reference: &[String], n: usize, weight: &dyn Fn(&[String]) -> f64) -> (f64, f64) {
    let cand = counts(candidate, n);
    let refs = counts(reference, n);
    let mut matched = 0.0;
    let mut total = 0.0;
    for (gram, &c) in &cand {
        let w = weight(gram);
        total += w * c as f64;
        matched += w * c.min(refs.get(gram).copied().unwrap_or(0)) as f64;
    }
    (matched, total)
}

pub(crate) fn brevity_penalty(candidate_len: usize, reference_len: usize) -> f64 {
    if candidate_len == 0 {
        0.0
    } else if candidate_len >= reference_len {
        1.0
    } else {
        (1.0 - reference_len as f64 / candidate_len as f64).exp()
    }
}

/// BLEU with uniform weights up to `max_n`. Unigram precision is unsmoothed;
/// orders two and up use add-one smoothing.
pub fn bleu(candidate: &[String], reference: &[String], max_n: usize) -> f64 {
    weighted_bleu(candidate, reference, max_n, &|_| 1.0)
}

/// As [`bleu`], with the unigram precision weighting each token by `unigram_weight`.
pub fn weighted_bleu(candidate: &[String], reference: &[String], max_n: usize, unigram_weight: &dyn Fn(&str) -> f64) -> f64 {
    if candidate.is_empty() || reference.is_empty() || max_n == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let p = if n == 1 {
            let (m, t) = clipped(candidate, reference, 1, &|g| unigram_weight(&g[0]));
            if m == 0.0 {
                return 0.0;
            }
            m / t
        } else {
            let (m, t) = clipped(candidate, reference, n, &|_| 1.0);
            (m + 1.0) / (t + 1.0)
        };
        log_sum += p.ln();
    }
    let score = brevity_penalty(candidate.len(), reference.len()) * (log_sum / max_n as f64).exp();
    score.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn identical_is_one() {
        let x = toks("int a = 1 ;");
        assert!((bleu(&x, &x, 4) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_substitution() {
        // unigrams 4/5, bigrams 2/4, trigrams 1/3, 4-grams 0/2
        let c = toks("int b = 1 ;");
        let r = toks("int a = 1 ;");
        let expected = ((4.0f64 / 5.0).ln() + (3.0f64 / 5.0).ln() + (2.0f64 / 4.0).ln() + (1.0f64 / 3.0).ln()) / 4.0;
        assert!((bleu(&c, &r, 4) - expected.exp()).abs() < 1e-12);
    }

    #[test]
    fn short_candidate_is_penalized() {
        let c = toks("return");
        let r = toks("return x ;");
        assert!((bleu(&c, &r, 4) - (1.0f64 - 3.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn no_overlap_is_zero() {
        assert_eq!(bleu(&toks("a b"), &toks("c d"), 4), 0.0);
    }
}
