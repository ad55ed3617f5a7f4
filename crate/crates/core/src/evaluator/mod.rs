//! Grid runs, scoring and every aggregate the report tables need.

mod extract;
pub mod report;
mod run;
mod summary;

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::backend::BackendError;
use crate::io::IoError;
use crate::prompt::PromptKind;

pub use extract::extract_code;
pub use run::{run_grid, run_kind, score_output, CorpusRef, InstanceRecord, RunArtifact, RunConfig, RunParams};
pub use summary::{
    average_deltas, cross_dataset, per_rule_breakdown, prompt_deltas, rate_deltas, summarize, union_of_fix, CrossCell,
    CrossTable, EvalSummary, KindDelta, PromptDeltas, RuleRange, RuleStat,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("backend: {0}")]
    Backend(#[from] BackendError),
    #[error("missing summary for prompt kind {0}")]
    MissingKind(PromptKind),
    #[error("runs cover different instance sets ({0})")]
    MismatchedInstances(String),
    #[error("no rule ids in the supplied runs; per-rule breakdown needs checker-derived instances")]
    NoRules,
    #[error("cross-dataset matrix is empty")]
    EmptyMatrix,
    #[error("cross-dataset matrix is missing cells: {}", .0.join(", "))]
    IncompleteMatrix(Vec<String>),
    #[error("no runs supplied")]
    NoRuns,
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

/// A percentage held in exact hundredths, so table arithmetic never drifts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Percent(pub i64);

impl Percent {
    /// `num / den` as a percentage, rounded half up to two decimals.
    pub fn from_ratio(num: usize, den: usize) -> Percent {
        if den == 0 {
            return Percent(0);
        }
        let (num, den) = (num as i128, den as i128);
        Percent(((num * 20_000 + den) / (2 * den)) as i64)
    }

    /// Parse "14.10", "14.1" or "14.10%".
    pub fn parse(s: &str) -> Option<Percent> {
        let s = s.trim().trim_end_matches('%');
        let (neg, s) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() || frac.len() > 2 || !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
            return None;
        }
        let frac: i64 = format!("{frac:0<2}").parse().ok()?;
        let v = int.parse::<i64>().ok()? * 100 + frac;
        Some(Percent(if neg { -v } else { v }))
    }

    pub fn hundredths(self) -> i64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }

    /// Mean of several values, rounded half away from zero.
    pub fn mean(values: &[Percent]) -> Percent {
        if values.is_empty() {
            return Percent(0);
        }
        let sum: i64 = values.iter().map(|p| p.0).sum();
        let n = values.len() as i64;
        Percent((2 * sum + sum.signum() * n) / (2 * n))
    }
}

impl std::ops::Sub for Percent {
    type Output = Percent;

    fn sub(self, rhs: Percent) -> Percent {
        Percent(self.0 - rhs.0)
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let a = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", a / 100, a % 100)
    }
}

impl Serialize for Percent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Percent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Ok(Percent((v * 100.0).round() as i64))
    }
}

/// Four-decimal rendering used for CodeBLEU cells.
pub fn format_score(v: f64) -> String {
    format!("{v:.4}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios() {
        assert_eq!(Percent::from_ratio(37, 74).to_string(), "50.00");
        assert_eq!(Percent::from_ratio(1410, 10000).to_string(), "14.10");
        assert_eq!(Percent::from_ratio(0, 10).to_string(), "0.00");
        assert_eq!(Percent::from_ratio(0, 0).to_string(), "0.00");
        assert_eq!(Percent::from_ratio(1, 3).to_string(), "33.33");
        assert_eq!(Percent::from_ratio(2, 3).to_string(), "66.67");
        assert_eq!(Percent::from_ratio(1, 8).to_string(), "12.50");
        assert_eq!(Percent::from_ratio(1, 80000).to_string(), "0.00");
        assert_eq!(Percent::from_ratio(1, 20000).to_string(), "0.01");
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(Percent::parse("14.1"), Some(Percent(1410)));
        assert_eq!(Percent::parse("72.97%"), Some(Percent(7297)));
        assert_eq!(Percent::parse("-0.05"), Some(Percent(-5)));
        assert_eq!(Percent(-5).to_string(), "-0.05");
        assert_eq!(Percent::parse("1.234"), None);
        assert_eq!(Percent::parse("x"), None);
        assert_eq!(Percent::parse(".5"), None);
    }

    #[test]
    fn mean_rounds_half_away_from_zero() {
        assert_eq!(Percent::mean(&[Percent(1), Percent(2)]), Percent(2));
        assert_eq!(Percent::mean(&[Percent(-1), Percent(-2)]), Percent(-2));
        assert_eq!(Percent::mean(&[]), Percent(0));
    }

    #[test]
    fn serde_round_trip() {
        for v in [0, 1, 1410, 7297, 10000, -5, 9999] {
            let s = serde_json::to_string(&Percent(v)).unwrap();
            assert_eq!(serde_json::from_str::<Percent>(&s).unwrap(), Percent(v));
        }
    }
}
