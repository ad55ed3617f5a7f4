//! Repair-instance corpora: loading, validation, pruning, splitting, stats.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::codenorm;
use crate::io::{self, IoError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Source {
    /// Reviewer comments.
    RD,
    /// Static-checker findings.
    PD,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::RD => "RD",
            Source::PD => "PD",
        })
    }
}

impl std::str::FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "rd" => Ok(Source::RD),
            "pd" => Ok(Source::PD),
            other => Err(format!("unknown source {other:?} (expected rd or pd)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairInstance {
    pub id: String,
    pub source: Source,
    pub rule_id: Option<String>,
    pub language: String,
    pub buggy_code: String,
    pub fixed_code: String,
    pub comment: String,
    /// 0-based line in `buggy_code`.
    pub defect_line: Option<usize>,
    /// 0-based, inclusive.
    pub fix_start: usize,
    /// 0-based, exclusive.
    pub fix_end: usize,
}

pub fn line_count(code: &str) -> usize {
    code.lines().count()
}

impl RepairInstance {
    /// Reason the instance breaks an invariant, if it does.
    pub fn violation(&self) -> Option<String> {
        if self.id.is_empty() {
            return Some("id is empty".into());
        }
        if self.buggy_code.is_empty() {
            return Some("buggy_code is empty".into());
        }
        if self.fixed_code.is_empty() {
            return Some("fixed_code is empty".into());
        }
        let lines = line_count(&self.buggy_code);
        if self.fix_start > self.fix_end || self.fix_end > lines {
            return Some(format!("fix range {}..{} outside 0..{lines} or reversed", self.fix_start, self.fix_end));
        }
        if let Some(d) = self.defect_line {
            if d >= lines {
                return Some(format!("defect_line {d} outside 0..{lines}"));
            }
        }
        if self.source == Source::PD && self.rule_id.as_deref().is_none_or(str::is_empty) {
            return Some("PD instance without rule_id".into());
        }
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub source_label: String,
    pub instances: Vec<RepairInstance>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("line {line}: missing field `{field}`")]
    MissingField { line: usize, field: String },
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: record {id:?}: {reason}")]
    Invalid { line: usize, id: String, reason: String },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: record {id:?} has source {found}, expected {expected}")]
    WrongSource { line: usize, id: String, found: Source, expected: Source },
    #[error("split ratio must lie strictly between 0 and 1, got {0}")]
    BadRatio(f64),
}

impl CorpusError {
    /// 1-based line of the offending record, when the error concerns one.
    pub fn line(&self) -> Option<usize> {
        match self {
            CorpusError::MissingField { line, .. }
            | CorpusError::Malformed { line, .. }
            | CorpusError::Invalid { line, .. }
            | CorpusError::DuplicateId { line, .. }
            | CorpusError::WrongSource { line, .. } => Some(*line),
            _ => None,
        }
    }
}

const REQUIRED_FIELDS: &[&str] = &["id", "buggy_code", "fixed_code", "comment", "fix_start", "fix_end"];

/// Parse and validate newline-delimited records. `source` fills records that
/// omit it and must match records that carry it.
pub fn parse_corpus(text: &str, source: Source, label: &str) -> Result<Corpus, CorpusError> {
    let mut instances = Vec::new();
    let mut ids = HashSet::new();
    for (line, raw) in io::jsonl_lines(text) {
        let value: serde_json::Value =
            serde_json::from_str(raw).map_err(|e| CorpusError::Malformed { line, message: e.to_string() })?;
        let serde_json::Value::Object(mut map) = value else {
            return Err(CorpusError::Malformed { line, message: "record is not an object".into() });
        };
        for field in REQUIRED_FIELDS {
            if map.get(*field).is_none_or(|v| v.is_null()) {
                return Err(CorpusError::MissingField { line, field: (*field).to_string() });
            }
        }
        map.entry("source").or_insert_with(|| serde_json::Value::String(source.to_string()));
        map.entry("language").or_insert_with(|| serde_json::Value::String("java".into()));
        map.entry("rule_id").or_insert(serde_json::Value::Null);
        map.entry("defect_line").or_insert(serde_json::Value::Null);
        let inst: RepairInstance = serde_json::from_value(serde_json::Value::Object(map))
            .map_err(|e| CorpusError::Malformed { line, message: e.to_string() })?;
        if inst.source != source {
            return Err(CorpusError::WrongSource { line, id: inst.id, found: inst.source, expected: source });
        }
        if let Some(reason) = inst.violation() {
            return Err(CorpusError::Invalid { line, id: inst.id, reason });
        }
        if !ids.insert(inst.id.clone()) {
            return Err(CorpusError::DuplicateId { line, id: inst.id });
        }
        instances.push(inst);
    }
    Ok(Corpus { source_label: label.to_string(), instances })
}

pub fn load_corpus(path: &Path, source: Source) -> Result<Corpus, CorpusError> {
    let text = io::read_to_string(path)?;
    parse_corpus(&text, source, &source.to_string())
}

/// Load several files into one corpus (ids must stay unique across files).
pub fn load_many(inputs: &[(std::path::PathBuf, Source)]) -> Result<Corpus, CorpusError> {
    let mut label = Vec::new();
    let mut all = Vec::new();
    let mut ids = HashSet::new();
    for (path, source) in inputs {
        let c = load_corpus(path, *source)?;
        for (i, inst) in c.instances.into_iter().enumerate() {
            if !ids.insert(inst.id.clone()) {
                return Err(CorpusError::DuplicateId { line: i + 1, id: inst.id });
            }
            all.push(inst);
        }
        let tag = source.to_string();
        if !label.contains(&tag) {
            label.push(tag);
        }
    }
    Ok(Corpus { source_label: label.join("+"), instances: all })
}

impl Corpus {
    pub fn new(source_label: impl Into<String>, instances: Vec<RepairInstance>) -> Self {
        Corpus { source_label: source_label.into(), instances }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&RepairInstance> {
        self.instances.iter().find(|i| i.id == id)
    }

    pub fn to_jsonl(&self) -> String {
        io::to_jsonl(&self.instances)
    }

    pub fn save(&self, path: &Path) -> Result<(), IoError> {
        io::write_atomic(path, self.to_jsonl().as_bytes())
    }

    /// Content hash of the serialized instances.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_jsonl().as_bytes()))
    }
}

/// Comments that carry no repair information.
pub const DEFAULT_TRIVIAL_COMMENTS: &[&str] = &["done", "fixed", "ok", "lgtm", "+1", ""];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneConfig {
    pub trivial_comments: Vec<String>,
}

impl Default for PruneConfig {
    fn default() -> Self {
        PruneConfig { trivial_comments: DEFAULT_TRIVIAL_COMMENTS.iter().map(|s| s.to_string()).collect() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    NoOverlap,
    TrivialComment,
    NormalizedEqual,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneReport {
    pub kept: usize,
    pub dropped_no_overlap: usize,
    pub dropped_trivial_comment: usize,
    pub dropped_normalized_equal: usize,
    pub dropped_ids: Vec<(String, DropReason)>,
}

impl PruneReport {
    pub fn input_size(&self) -> usize {
        self.kept + self.dropped_no_overlap + self.dropped_trivial_comment + self.dropped_normalized_equal
    }

    pub fn summary(&self) -> String {
        format!(
            "input {}\nkept {}\ndropped (no shared line) {}\ndropped (trivial comment) {}\ndropped (normalized equal) {}\n",
            self.input_size(),
            self.kept,
            self.dropped_no_overlap,
            self.dropped_trivial_comment,
            self.dropped_normalized_equal
        )
    }
}

fn trimmed_lines(code: &str) -> HashSet<&str> {
    code.lines().map(str::trim).filter(|l| !l.is_empty()).collect()
}

/// First pruning rule the instance trips, if any.
pub fn drop_reason(inst: &RepairInstance, config: &PruneConfig) -> Option<DropReason> {
    let buggy = trimmed_lines(&inst.buggy_code);
    let fixed = trimmed_lines(&inst.fixed_code);
    if buggy.is_disjoint(&fixed) {
        return Some(DropReason::NoOverlap);
    }
    let comment = inst.comment.trim().to_lowercase();
    if config.trivial_comments.iter().any(|t| t.trim().to_lowercase() == comment) {
        return Some(DropReason::TrivialComment);
    }
    if codenorm::normalize(&inst.buggy_code).canonical_text == codenorm::normalize(&inst.fixed_code).canonical_text {
        return Some(DropReason::NormalizedEqual);
    }
    None
}

pub fn prune(corpus: &Corpus, config: &PruneConfig) -> (Corpus, PruneReport) {
    let mut report = PruneReport::default();
    let mut kept = Vec::new();
    for inst in &corpus.instances {
        match drop_reason(inst, config) {
            None => {
                report.kept += 1;
                kept.push(inst.clone());
            }
            Some(reason) => {
                match reason {
                    DropReason::NoOverlap => report.dropped_no_overlap += 1,
                    DropReason::TrivialComment => report.dropped_trivial_comment += 1,
                    DropReason::NormalizedEqual => report.dropped_normalized_equal += 1,
                }
                report.dropped_ids.push((inst.id.clone(), reason));
            }
        }
    }
    (Corpus { source_label: corpus.source_label.clone(), instances: kept }, report)
}

/// Number of training instances for `n` items at `ratio`.
pub fn train_size(n: usize, ratio: f64) -> usize {
    // the epsilon absorbs products like 0.29 * 100 = 28.999999999999996
    ((ratio * n as f64) + 1e-9).floor() as usize
}

/// Seeded shuffle, then the first `floor(ratio * N)` go to training. Each
/// partition keeps the input order.
pub fn split(corpus: &Corpus, ratio: f64, seed: u64) -> Result<(Corpus, Corpus), CorpusError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(CorpusError::BadRatio(ratio));
    }
    let n = corpus.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut in_train = vec![false; n];
    for &i in &order[..train_size(n, ratio)] {
        in_train[i] = true;
    }
    let (mut train, mut valid) = (Vec::new(), Vec::new());
    for (i, inst) in corpus.instances.iter().enumerate() {
        if in_train[i] {
            train.push(inst.clone());
        } else {
            valid.push(inst.clone());
        }
    }
    Ok((Corpus::new(format!("{}:train", corpus.source_label), train), Corpus::new(format!("{}:valid", corpus.source_label), valid)))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total: usize,
    pub per_source: BTreeMap<String, usize>,
    pub per_rule: BTreeMap<String, usize>,
    /// Buggy-snippet line counts, bucketed.
    pub line_histogram: BTreeMap<String, usize>,
}

const LINE_BUCKETS: &[(usize, usize, &str)] =
    &[(0, 5, "01-05"), (6, 10, "06-10"), (11, 20, "11-20"), (21, 50, "21-50"), (51, usize::MAX, "51+")];

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let mut stats = CorpusStats { total: corpus.len(), ..Default::default() };
    for inst in &corpus.instances {
        *stats.per_source.entry(inst.source.to_string()).or_insert(0) += 1;
        if let Some(rule) = &inst.rule_id {
            *stats.per_rule.entry(rule.clone()).or_insert(0) += 1;
        }
        let lines = line_count(&inst.buggy_code);
        let bucket = LINE_BUCKETS.iter().find(|(lo, hi, _)| (*lo..=*hi).contains(&lines)).map(|b| b.2).unwrap_or("51+");
        *stats.line_histogram.entry(bucket.to_string()).or_insert(0) += 1;
    }
    stats
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "total {}", self.total)?;
        for (k, v) in &self.per_source {
            writeln!(f, "source {k} {v}")?;
        }
        writeln!(f, "distinct rules {}", self.per_rule.len())?;
        for (k, v) in &self.per_rule {
            writeln!(f, "rule {k:?} {v}")?;
        }
        for (k, v) in &self.line_histogram {
            writeln!(f, "lines {k} {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(id: &str, buggy: &str, fixed: &str, comment: &str) -> RepairInstance {
        RepairInstance {
            id: id.into(),
            source: Source::RD,
            rule_id: None,
            language: "java".into(),
            buggy_code: buggy.into(),
            fixed_code: fixed.into(),
            comment: comment.into(),
            defect_line: Some(0),
            fix_start: 0,
            fix_end: 1,
        }
    }

    #[test]
    fn loads_valid_records() {
        let a = inst("a", "int x = 1;\nreturn x;", "int x = 2;\nreturn x;", "use two");
        let b = inst("b", "foo();", "bar();", "rename");
        let text = io::to_jsonl(&[a.clone(), b]);
        let c = parse_corpus(&text, Source::RD, "RD").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.instances[0], a);
    }

    #[test]
    fn missing_field_names_field_and_line() {
        let good = serde_json::to_string(&inst("a", "x;", "y;", "c")).unwrap();
        let bad = r#"{"id":"b","buggy_code":"x;","comment":"c","fix_start":0,"fix_end":1}"#;
        let err = parse_corpus(&format!("{good}\n{bad}\n"), Source::RD, "RD").unwrap_err();
        assert!(matches!(&err, CorpusError::MissingField { line: 2, field } if field == "fixed_code"), "{err}");
        assert!(err.to_string().contains("fixed_code") && err.to_string().contains("line 2"));
    }

    #[test]
    fn rejects_duplicates_and_bad_ranges() {
        let a = inst("a", "x;", "y;", "c");
        let err = parse_corpus(&io::to_jsonl(&[a.clone(), a.clone()]), Source::RD, "RD").unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId { line: 2, .. }));
        let mut bad = a.clone();
        bad.fix_end = 3;
        assert!(matches!(parse_corpus(&io::to_jsonl(&[bad]), Source::RD, "RD"), Err(CorpusError::Invalid { .. })));
        let mut pd = a;
        pd.source = Source::PD;
        assert!(matches!(parse_corpus(&io::to_jsonl(&[pd]), Source::PD, "PD"), Err(CorpusError::Invalid { .. })));
    }

    #[test]
    fn prune_categories() {
        let disjoint = inst("d", "a();", "b();", "rename");
        let trivial = inst("t", "a();\nb();", "a();\nc();", " Done ");
        let comment_only = inst("n", "a();\nb();", "a();\n// why\nb();", "explain");
        let keep = inst("k", "a();\nb();", "a();\nc();", "call c");
        let c = Corpus::new("RD", vec![disjoint, trivial, comment_only, keep]);
        let (kept, report) = prune(&c, &PruneConfig::default());
        assert_eq!(kept.len(), 1);
        assert_eq!((report.dropped_no_overlap, report.dropped_trivial_comment, report.dropped_normalized_equal), (1, 1, 1));
        assert_eq!(report.input_size(), 4);
        let (again, _) = prune(&kept, &PruneConfig::default());
        assert_eq!(again, kept);
    }

    #[test]
    fn split_sizes() {
        let c = Corpus::new("RD", (0..10).map(|i| inst(&i.to_string(), "x;", "y;", "c")).collect());
        let (t, v) = split(&c, 0.9, 7).unwrap();
        assert_eq!((t.len(), v.len()), (9, 1));
        let (t2, v2) = split(&c, 0.9, 7).unwrap();
        assert_eq!((t, v), (t2, v2));
        assert!(split(&c, 1.0, 7).is_err());
        assert!(split(&c, 0.0, 7).is_err());
        assert_eq!(train_size(100, 0.29), 29);
        assert_eq!(train_size(31_163, 0.9), 28_046);
    }

    #[test]
    fn stats_of_empty() {
        let s = corpus_stats(&Corpus::new("RD", vec![]));
        assert_eq!(s, CorpusStats::default());
    }
}
