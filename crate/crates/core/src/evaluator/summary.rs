use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{EvalError, Percent, RunArtifact};
use crate::prompt::PromptKind;

pub const UNION_LABEL: &str = "Union of Fix";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleStat {
    pub fixes: usize,
    pub n: usize,
    pub ecm_rate: Percent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    /// Run id, or the union label for combined fix sets.
    pub label: String,
    pub kind: Option<PromptKind>,
    pub backend_id: String,
    pub corpus_hash: String,
    pub n: usize,
    pub ecm_rate: Percent,
    /// Rate when raw outputs are compared without code extraction.
    pub ecm_rate_raw: Percent,
    pub mean_code_bleu: f64,
    pub errors: usize,
    pub fix_set: BTreeSet<String>,
    pub per_rule: BTreeMap<String, RuleStat>,
}

impl EvalSummary {
    pub fn fixes(&self) -> usize {
        self.fix_set.len()
    }
}

fn rule_stats<'a>(rows: impl Iterator<Item = (Option<&'a String>, bool)>) -> BTreeMap<String, RuleStat> {
    let mut per_rule: BTreeMap<String, RuleStat> = BTreeMap::new();
    for (rule, fixed) in rows {
        if let Some(rule) = rule {
            let s = per_rule.entry(rule.clone()).or_insert(RuleStat { fixes: 0, n: 0, ecm_rate: Percent(0) });
            s.n += 1;
            s.fixes += usize::from(fixed);
        }
    }
    for s in per_rule.values_mut() {
        s.ecm_rate = Percent::from_ratio(s.fixes, s.n);
    }
    per_rule
}

pub fn summarize(run: &RunArtifact) -> EvalSummary {
    let n = run.records.len();
    let fix_set: BTreeSet<String> = run.records.iter().filter(|r| r.ecm).map(|r| r.instance_id.clone()).collect();
    let raw = run.records.iter().filter(|r| r.ecm_raw).count();
    let bleu_sum: f64 = run.records.iter().map(|r| r.code_bleu.total).sum();
    EvalSummary {
        label: run.run_id.clone(),
        kind: Some(run.kind),
        backend_id: run.backend_id.clone(),
        corpus_hash: run.corpus_ref.content_hash.clone(),
        n,
        ecm_rate: Percent::from_ratio(fix_set.len(), n),
        ecm_rate_raw: Percent::from_ratio(raw, n),
        mean_code_bleu: if n == 0 { 0.0 } else { bleu_sum / n as f64 },
        errors: run.records.iter().filter(|r| r.error.is_some()).count(),
        per_rule: rule_stats(run.records.iter().map(|r| (r.rule_id.as_ref(), r.ecm))),
        fix_set,
    }
}

fn instance_ids(run: &RunArtifact) -> BTreeSet<&str> {
    run.records.iter().map(|r| r.instance_id.as_str()).collect()
}

/// Combine fix sets of runs over the same instances. CodeBLEU takes the
/// best score per instance.
pub fn union_of_fix(runs: &[&RunArtifact]) -> Result<EvalSummary, EvalError> {
    let first = runs.first().ok_or(EvalError::NoRuns)?;
    let ids = instance_ids(first);
    for r in &runs[1..] {
        let other = instance_ids(r);
        if other != ids {
            let missing = ids.symmetric_difference(&other).take(3).copied().collect::<Vec<_>>().join(", ");
            return Err(EvalError::MismatchedInstances(format!("{} vs {}: e.g. {missing}", first.run_id, r.run_id)));
        }
    }
    let mut fixed: BTreeMap<&str, (Option<&String>, bool, bool, f64, bool)> = BTreeMap::new();
    for run in runs {
        for r in &run.records {
            let e = fixed.entry(&r.instance_id).or_insert((r.rule_id.as_ref(), false, false, 0.0, true));
            e.1 |= r.ecm;
            e.2 |= r.ecm_raw;
            e.3 = e.3.max(r.code_bleu.total);
            e.4 &= r.error.is_some();
        }
    }
    let n = fixed.len();
    let fix_set: BTreeSet<String> = fixed.iter().filter(|(_, v)| v.1).map(|(k, _)| k.to_string()).collect();
    let raw = fixed.values().filter(|v| v.2).count();
    let bleu_sum: f64 = fixed.values().map(|v| v.3).sum();
    let kinds: BTreeSet<PromptKind> = runs.iter().map(|r| r.kind).collect();
    let backends: BTreeSet<&str> = runs.iter().map(|r| r.backend_id.as_str()).collect();
    Ok(EvalSummary {
        label: UNION_LABEL.into(),
        kind: (kinds.len() == 1).then_some(first.kind),
        backend_id: backends.into_iter().collect::<Vec<_>>().join("+"),
        corpus_hash: first.corpus_ref.content_hash.clone(),
        n,
        ecm_rate: Percent::from_ratio(fix_set.len(), n),
        ecm_rate_raw: Percent::from_ratio(raw, n),
        mean_code_bleu: if n == 0 { 0.0 } else { bleu_sum / n as f64 },
        errors: fixed.values().filter(|v| v.4).count(),
        per_rule: rule_stats(fixed.values().map(|v| (v.0, v.1))),
        fix_set,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KindDelta {
    pub from: PromptKind,
    pub to: PromptKind,
    pub ecm: Percent,
    pub code_bleu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PromptDeltas {
    /// P4−P3, P5−P4, P6−P5, P7−P6.
    pub adjacent: Vec<KindDelta>,
    /// P7−P3.
    pub overall: KindDelta,
}

const FINETUNE_KINDS: [PromptKind; 5] = [PromptKind::P3, PromptKind::P4, PromptKind::P5, PromptKind::P6, PromptKind::P7];

/// Deltas from per-kind (ECM rate, mean CodeBLEU) pairs.
pub fn rate_deltas(rates: &BTreeMap<PromptKind, (Percent, f64)>) -> Result<PromptDeltas, EvalError> {
    let get = |k: PromptKind| rates.get(&k).copied().ok_or(EvalError::MissingKind(k));
    for k in FINETUNE_KINDS {
        get(k)?;
    }
    let delta = |from: PromptKind, to: PromptKind| -> Result<KindDelta, EvalError> {
        let (a, ab) = get(from)?;
        let (b, bb) = get(to)?;
        Ok(KindDelta { from, to, ecm: b - a, code_bleu: bb - ab })
    };
    let adjacent = FINETUNE_KINDS.windows(2).map(|w| delta(w[0], w[1])).collect::<Result<_, _>>()?;
    Ok(PromptDeltas { adjacent, overall: delta(PromptKind::P3, PromptKind::P7)? })
}

pub fn prompt_deltas(summaries: &BTreeMap<PromptKind, EvalSummary>) -> Result<PromptDeltas, EvalError> {
    rate_deltas(&summaries.iter().map(|(k, s)| (*k, (s.ecm_rate, s.mean_code_bleu))).collect())
}

/// Per-pair mean across models.
pub fn average_deltas(models: &[PromptDeltas]) -> Vec<KindDelta> {
    let Some(first) = models.first() else { return Vec::new() };
    (0..first.adjacent.len())
        .map(|i| {
            let ecm: Vec<Percent> = models.iter().map(|m| m.adjacent[i].ecm).collect();
            let bleu = models.iter().map(|m| m.adjacent[i].code_bleu).sum::<f64>() / models.len() as f64;
            KindDelta { from: first.adjacent[i].from, to: first.adjacent[i].to, ecm: Percent::mean(&ecm), code_bleu: bleu }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleRange {
    pub rule: String,
    pub lowest: Percent,
    pub highest: Percent,
    pub runs: usize,
}

/// Lowest and highest per-rule ECM across runs, sorted by lowest then
/// highest, both descending; remaining ties keep first-seen rule order.
pub fn per_rule_breakdown(runs: &[&RunArtifact]) -> Result<Vec<RuleRange>, EvalError> {
    if runs.is_empty() {
        return Err(EvalError::NoRuns);
    }
    let mut order: Vec<String> = Vec::new();
    let mut ranges: BTreeMap<String, RuleRange> = BTreeMap::new();
    for run in runs {
        let stats = rule_stats(run.records.iter().map(|r| (r.rule_id.as_ref(), r.ecm)));
        for r in run.records.iter().filter_map(|r| r.rule_id.as_ref()) {
            if !ranges.contains_key(r) {
                order.push(r.clone());
                ranges.insert(r.clone(), RuleRange { rule: r.clone(), lowest: Percent(i64::MAX), highest: Percent(i64::MIN), runs: 0 });
            }
        }
        for (rule, s) in stats {
            let e = ranges.get_mut(&rule).expect("registered above");
            e.lowest = e.lowest.min(s.ecm_rate);
            e.highest = e.highest.max(s.ecm_rate);
            e.runs += 1;
        }
    }
    if order.is_empty() {
        return Err(EvalError::NoRules);
    }
    let mut out: Vec<RuleRange> = order.into_iter().map(|r| ranges.remove(&r).expect("present")).collect();
    out.sort_by(|a, b| b.lowest.cmp(&a.lowest).then(b.highest.cmp(&a.highest)));
    Ok(out)
}

pub struct CrossCell<'a> {
    /// Which training data the model saw.
    pub model: String,
    pub test_corpus: String,
    pub run: &'a RunArtifact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossTable {
    pub models: Vec<String>,
    pub test_corpora: Vec<String>,
    /// `ecm[m][t]`
    pub ecm: Vec<Vec<Percent>>,
    pub union: Vec<Percent>,
    pub n: Vec<usize>,
}

pub fn cross_dataset(cells: &[CrossCell<'_>]) -> Result<CrossTable, EvalError> {
    if cells.is_empty() {
        return Err(EvalError::EmptyMatrix);
    }
    let mut models: Vec<String> = Vec::new();
    let mut tests: Vec<String> = Vec::new();
    let mut grid: BTreeMap<(&str, &str), &RunArtifact> = BTreeMap::new();
    for c in cells {
        if !models.contains(&c.model) {
            models.push(c.model.clone());
        }
        if !tests.contains(&c.test_corpus) {
            tests.push(c.test_corpus.clone());
        }
        if grid.insert((&c.model, &c.test_corpus), c.run).is_some() {
            return Err(EvalError::Config(format!("duplicate cell {} x {}", c.model, c.test_corpus)));
        }
    }
    let missing: Vec<String> = models
        .iter()
        .flat_map(|m| tests.iter().map(move |t| (m, t)))
        .filter(|(m, t)| !grid.contains_key(&(m.as_str(), t.as_str())))
        .map(|(m, t)| format!("{m} x {t}"))
        .collect();
    if !missing.is_empty() {
        return Err(EvalError::IncompleteMatrix(missing));
    }
    let ecm = models
        .iter()
        .map(|m| tests.iter().map(|t| summarize(grid[&(m.as_str(), t.as_str())]).ecm_rate).collect())
        .collect();
    let mut union = Vec::new();
    let mut n = Vec::new();
    for t in &tests {
        let runs: Vec<&RunArtifact> = models.iter().map(|m| grid[&(m.as_str(), t.as_str())]).collect();
        let u = union_of_fix(&runs)?;
        union.push(u.ecm_rate);
        n.push(u.n);
    }
    Ok(CrossTable { models, test_corpora: tests, ecm, union, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebleu::{CodeBleuScore, Weights};
    use crate::evaluator::{CorpusRef, InstanceRecord, RunParams};

    pub(crate) fn fake_run(id: &str, n: usize, fixed: &[usize], rule: impl Fn(usize) -> Option<String>) -> RunArtifact {
        RunArtifact {
            run_id: id.into(),
            corpus_ref: CorpusRef { label: "t".into(), content_hash: "h".into(), size: n },
            kind: PromptKind::P7,
            backend_id: "fake".into(),
            params: RunParams {
                model_id: "m".into(),
                temperature: 0.0,
                max_output_tokens: 1,
                stop_sequences: vec![],
                code_bleu_weights: [0.25; 4],
                code_bleu_max_n: 4,
                dataflow_method: "approx".into(),
            },
            records: (0..n)
                .map(|i| InstanceRecord {
                    instance_id: format!("i{i}"),
                    rule_id: rule(i),
                    raw_output: String::new(),
                    extracted_code: String::new(),
                    ecm: fixed.contains(&i),
                    ecm_raw: false,
                    code_bleu: CodeBleuScore::zero(Weights::default()),
                    error: None,
                })
                .collect(),
        }
    }

    #[test]
    fn union_example() {
        let a = fake_run("a", 4, &[1, 2], |_| None);
        let b = fake_run("b", 4, &[2, 3], |_| None);
        let u = union_of_fix(&[&a, &b]).unwrap();
        assert_eq!(u.ecm_rate.to_string(), "75.00");
        assert_eq!(u.label, "Union of Fix");
        assert!(u.ecm_rate >= summarize(&a).ecm_rate);
    }

    #[test]
    fn union_rejects_mismatch() {
        let a = fake_run("a", 4, &[], |_| None);
        let b = fake_run("b", 5, &[], |_| None);
        assert!(matches!(union_of_fix(&[&a, &b]), Err(EvalError::MismatchedInstances(_))));
    }

    #[test]
    fn summary_counts() {
        let r = fake_run("a", 74, &(0..37).collect::<Vec<_>>(), |i| Some(format!("r{}", i % 2)));
        let s = summarize(&r);
        assert_eq!(s.ecm_rate.to_string(), "50.00");
        assert_eq!(s.per_rule.values().map(|v| v.n).sum::<usize>(), 74);
        let empty = summarize(&fake_run("e", 3, &[], |_| None));
        assert_eq!(empty.ecm_rate.to_string(), "0.00");
    }

    #[test]
    fn deltas_require_all_kinds() {
        let mut m = BTreeMap::new();
        for k in [PromptKind::P3, PromptKind::P4, PromptKind::P5, PromptKind::P7] {
            m.insert(k, (Percent(1000), 0.5));
        }
        assert!(matches!(rate_deltas(&m), Err(EvalError::MissingKind(PromptKind::P6))));
        m.insert(PromptKind::P6, (Percent(1000), 0.5));
        let d = rate_deltas(&m).unwrap();
        assert!(d.adjacent.iter().all(|x| x.ecm == Percent(0)));
        assert_eq!(d.overall.ecm, Percent(0));
    }

    #[test]
    fn rule_ranges() {
        let rule = |i: usize| Some(if i < 10 { "a".to_string() } else { "b".to_string() });
        let r1 = fake_run("1", 20, &[0, 1, 2, 10], rule);
        let r2 = fake_run("2", 20, &[0, 10, 11, 12, 13], rule);
        let out = per_rule_breakdown(&[&r1, &r2]).unwrap();
        assert_eq!(out[0].rule, "b");
        assert_eq!((out[0].lowest.to_string(), out[0].highest.to_string()), ("10.00".into(), "40.00".into()));
        assert_eq!((out[1].lowest.to_string(), out[1].highest.to_string()), ("10.00".into(), "30.00".into()));
        let single = per_rule_breakdown(&[&r1]).unwrap();
        assert!(single.iter().all(|r| r.lowest == r.highest));
        let rd = fake_run("rd", 5, &[], |_| None);
        assert!(matches!(per_rule_breakdown(&[&rd]), Err(EvalError::NoRules)));
    }

    #[test]
    fn cross_matrix_checks() {
        assert!(matches!(cross_dataset(&[]), Err(EvalError::EmptyMatrix)));
        let r = fake_run("x", 4, &[1], |_| None);
        let cells = vec![
            CrossCell { model: "A".into(), test_corpus: "T1".into(), run: &r },
            CrossCell { model: "B".into(), test_corpus: "T2".into(), run: &r },
        ];
        match cross_dataset(&cells) {
            Err(EvalError::IncompleteMatrix(m)) => assert_eq!(m, ["A x T2", "B x T1"]),
            other => panic!("{other:?}"),
        }
        let same = vec![
            CrossCell { model: "A".into(), test_corpus: "T".into(), run: &r },
            CrossCell { model: "B".into(), test_corpus: "T".into(), run: &r },
        ];
        let t = cross_dataset(&same).unwrap();
        assert_eq!(t.union[0], t.ecm[0][0]);
    }
}
