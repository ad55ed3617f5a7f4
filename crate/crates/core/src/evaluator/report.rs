//! Result tables in delimiter-separated, structured and plain-text layouts.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde_json::{json, Value};

use super::summary::UNION_LABEL;
use super::{average_deltas, format_score, prompt_deltas, CrossTable, EvalError, EvalSummary, Percent, RuleRange};
use crate::prompt::PromptKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    Csv,
    Json,
    Text,
}

impl FromStr for Layout {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Layout::Csv),
            "json" => Ok(Layout::Json),
            "text" | "txt" => Ok(Layout::Text),
            other => Err(format!("unknown report format `{other}` (csv, json, text)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Text(String),
    Percent(Percent),
    Score(f64),
    Empty,
}

impl Cell {
    fn plain(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Percent(p) => p.to_string(),
            Cell::Score(v) => format_score(*v),
            Cell::Empty => String::new(),
        }
    }

    fn text(&self) -> String {
        match self {
            Cell::Percent(p) => format!("{p}%"),
            Cell::Empty => "-".into(),
            other => other.plain(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => json!(s),
            Cell::Percent(p) => json!(p.as_f64()),
            Cell::Score(v) => json!(format_score(*v).parse::<f64>().expect("formatted float")),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn render(&self, layout: Layout) -> String {
        match layout {
            Layout::Csv => self.csv(),
            Layout::Json => {
                let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
                let mut s = serde_json::to_string_pretty(&json!({
                    "title": self.title,
                    "columns": self.columns,
                    "rows": rows,
                    "notes": self.notes,
                }))
                .expect("json value");
                s.push('\n');
                s
            }
            Layout::Text => self.text(),
        }
    }

    fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::plain)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    fn text(&self) -> String {
        let cells: Vec<Vec<String>> = std::iter::once(self.columns.clone())
            .chain(self.rows.iter().map(|r| r.iter().map(Cell::text).collect()))
            .collect();
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|c| cells.iter().map(|r| r.get(c).map_or(0, |s| s.chars().count())).max().unwrap_or(0))
            .collect();
        let line = |r: &Vec<String>| {
            r.iter()
                .enumerate()
                .map(|(i, s)| if i == 0 { format!("{s:<w$}", w = widths[i]) } else { format!("{s:>w$}", w = widths[i]) })
                .collect::<Vec<_>>()
                .join(" | ")
                .trim_end()
                .to_string()
        };
        let rule: String = widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-");
        let mut out = format!("{}\n{}\n{rule}\n", self.title, line(&cells[0]));
        for r in &cells[1..] {
            out.push_str(&line(r));
            out.push('\n');
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}

/// One model's summaries keyed by prompt kind.
#[derive(Clone, Debug)]
pub struct ModelSummaries {
    pub model: String,
    pub summaries: BTreeMap<PromptKind, EvalSummary>,
}

fn prompt_table(title: &str, models: &[ModelSummaries], kinds: &[PromptKind]) -> Table {
    let mut columns = vec!["Prompt".to_string()];
    columns.extend(models.iter().map(|m| format!("ECM {}", m.model)));
    columns.extend(models.iter().map(|m| format!("CodeBLEU {}", m.model)));
    let rows = kinds
        .iter()
        .filter(|k| models.iter().any(|m| m.summaries.contains_key(k)))
        .map(|k| {
            let mut row = vec![Cell::Text(k.to_string())];
            row.extend(models.iter().map(|m| m.summaries.get(k).map_or(Cell::Empty, |s| Cell::Percent(s.ecm_rate))));
            row.extend(models.iter().map(|m| m.summaries.get(k).map_or(Cell::Empty, |s| Cell::Score(s.mean_code_bleu))));
            row
        })
        .collect();
    Table { title: title.into(), columns, rows, notes: Vec::new() }
}

/// Zero-shot prompt results.
pub fn table1(models: &[ModelSummaries]) -> Table {
    prompt_table("Zero-shot results", models, &[PromptKind::P1, PromptKind::P2])
}

/// Finetune-prompt results with the P7−P3 improvement row.
pub fn table2(models: &[ModelSummaries]) -> Result<Table, EvalError> {
    let kinds = [PromptKind::P3, PromptKind::P4, PromptKind::P5, PromptKind::P6, PromptKind::P7];
    let mut t = prompt_table("Finetuning results", models, &kinds);
    let deltas = models.iter().map(|m| prompt_deltas(&m.summaries)).collect::<Result<Vec<_>, _>>()?;
    let mut row = vec![Cell::Text("P7-P3".into())];
    row.extend(deltas.iter().map(|d| Cell::Percent(d.overall.ecm)));
    row.extend(deltas.iter().map(|d| Cell::Score(d.overall.code_bleu)));
    t.rows.push(row);
    Ok(t)
}

pub fn table3(ranges: &[RuleRange]) -> Table {
    Table {
        title: "Per-rule ECM range".into(),
        columns: vec!["Short Description".into(), "Lowest".into(), "Highest".into()],
        rows: ranges
            .iter()
            .map(|r| vec![Cell::Text(r.rule.clone()), Cell::Percent(r.lowest), Cell::Percent(r.highest)])
            .collect(),
        notes: Vec::new(),
    }
}

/// Improvement between adjacent prompts per model, with the cross-model average.
pub fn table4(models: &[ModelSummaries]) -> Result<Table, EvalError> {
    let deltas = models.iter().map(|m| prompt_deltas(&m.summaries)).collect::<Result<Vec<_>, _>>()?;
    let avg = average_deltas(&deltas);
    let mut columns = vec!["Delta".to_string()];
    columns.extend(models.iter().map(|m| m.model.clone()));
    columns.push("Average".into());
    let rows = avg
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let mut row = vec![Cell::Text(format!("{}-{}", a.to, a.from))];
            row.extend(deltas.iter().map(|d| Cell::Percent(d.adjacent[i].ecm)));
            row.push(Cell::Percent(a.ecm));
            row
        })
        .collect();
    Ok(Table { title: "Improvement between adjacent prompts".into(), columns, rows, notes: Vec::new() })
}

pub fn table5(cross: &CrossTable) -> Table {
    let mut columns = vec!["Finetuned Model".to_string()];
    columns.extend(cross.test_corpora.iter().cloned());
    let mut rows: Vec<Vec<Cell>> = cross
        .models
        .iter()
        .zip(&cross.ecm)
        .map(|(m, cells)| std::iter::once(Cell::Text(m.clone())).chain(cells.iter().map(|p| Cell::Percent(*p))).collect())
        .collect();
    rows.push(std::iter::once(Cell::Text(UNION_LABEL.into())).chain(cross.union.iter().map(|p| Cell::Percent(*p))).collect());
    Table {
        title: "Cross-dataset ECM".into(),
        columns,
        rows,
        notes: vec!["the last row combines the correct fixes of all models on each test set".into()],
    }
}
