//! Prompt rendering for the seven prompt kinds and finetune-pair export.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, RepairInstance};
use crate::io::{self, IoError};

pub const BUGGY_HEADER: &str = "<Buggy Code>";
pub const FIXED_HEADER: &str = "<Fixed Code>";
pub const COMMENT_PREFIX: &str = "//<Comment> ";
pub const BUG_LOCATION: &str = "[BUG_LOCATION]";
pub const FIX_START: &str = "[FIX_START]";
pub const FIX_END: &str = "[FIX_END]";

/// Reference finetuning hyperparameters written next to exported data.
pub const FINETUNE_EPOCHS: u32 = 2;
pub const FINETUNE_LEARNING_RATE: &str = "2e-4";
pub const FINETUNE_BATCH_SIZE: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PromptKind {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    ZeroShot,
    Finetune,
}

impl PromptKind {
    pub const ALL: [PromptKind; 7] =
        [PromptKind::P1, PromptKind::P2, PromptKind::P3, PromptKind::P4, PromptKind::P5, PromptKind::P6, PromptKind::P7];

    pub fn mode(self) -> Mode {
        match self {
            PromptKind::P1 | PromptKind::P2 => Mode::ZeroShot,
            _ => Mode::Finetune,
        }
    }

    pub fn needs_comment(self) -> bool {
        matches!(self, PromptKind::P2 | PromptKind::P6 | PromptKind::P7)
    }

    pub fn needs_defect_line(self) -> bool {
        self == PromptKind::P4
    }

    pub fn needs_fix_range(self) -> bool {
        matches!(self, PromptKind::P5 | PromptKind::P7)
    }

    pub fn instruction_text(self) -> &'static str {
        match self {
            PromptKind::P1 => "Fix the following buggy code snippet. In your response, output the fixed code only.",
            PromptKind::P2 => {
                "Fix the following buggy code snippet according to the suggestion in the \"//<Comment>\" line. In your response, output the fixed code only."
            }
            PromptKind::P3 => "Fix the following buggy code snippet.",
            PromptKind::P4 => "Fix the following buggy code snippet. [BUG_LOCATION] marks the bug location.",
            PromptKind::P5 => "Fix the following buggy code snippet. [FIX_START] and [FIX_END] mark the range of the patch.",
            PromptKind::P6 => {
                "Fix the following buggy code snippet according to the suggestion in the \"//<Comment>\" line."
            }
            PromptKind::P7 => {
                "Fix the following buggy code snippet according to the suggestion in the \"//<Comment>\" line. [FIX_START] and [FIX_END] mark the range of the patch."
            }
        }
    }
}

pub fn instruction_text(kind: PromptKind) -> &'static str {
    kind.instruction_text()
}

impl fmt::Display for PromptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for PromptKind {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PromptKind::ALL
            .into_iter()
            .find(|k| k.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| PromptError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("unknown prompt kind `{0}` (expected P1..P7)")]
    UnknownKind(String),
    #[error("instance {id}: {kind} needs `{field}`")]
    MissingField { id: String, kind: PromptKind, field: &'static str },
    #[error("instance {id}: {what} out of bounds for a {lines}-line snippet")]
    OutOfBounds { id: String, what: String, lines: usize },
    #[error("{0}: zero-shot prompt not exportable")]
    ZeroShotExport(PromptKind),
    #[error(transparent)]
    Io(#[from] IoError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Marker {
    Comment,
    BugLocation,
    FixStart,
    FixEnd,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerPosition {
    pub marker: Marker,
    /// Byte offset of the inserted line's marker text in the prompt.
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub text: String,
    pub kind: PromptKind,
    pub instance_id: String,
    pub marker_positions: Vec<MarkerPosition>,
    pub expected_completion: Option<String>,
}

/// One-line form of a possibly multi-line review comment.
pub fn flatten_comment(comment: &str) -> String {
    comment.lines().map(str::trim).filter(|l| !l.is_empty()).collect::<Vec<_>>().join("; ")
}

fn indentation(line: &str) -> &str {
    let end = line.find(|c: char| c != ' ' && c != '\t').unwrap_or(line.len());
    &line[..end]
}

struct Annotated {
    text: String,
    /// (marker, byte offset of marker text within `text`)
    markers: Vec<(Marker, usize)>,
}

fn annotate(inst: &RepairInstance, kind: PromptKind) -> Result<Annotated, PromptError> {
    let lines: Vec<&str> = inst.buggy_code.split('\n').collect();
    let count = crate::corpus::line_count(&inst.buggy_code);
    let missing = |field| PromptError::MissingField { id: inst.id.clone(), kind, field };
    let oob = |what: String| PromptError::OutOfBounds { id: inst.id.clone(), what, lines: count };

    if kind.needs_defect_line() && inst.defect_line.is_none() {
        return Err(missing("defect_line"));
    }
    if let Some(d) = inst.defect_line {
        if (kind.needs_defect_line() || kind.needs_comment()) && d >= count.max(1) {
            return Err(oob(format!("defect_line {d}")));
        }
    }
    let (fs, fe) = (inst.fix_start, inst.fix_end);
    if (kind.needs_fix_range() || (kind.needs_comment() && inst.defect_line.is_none())) && (fs > fe || fe > count) {
        return Err(oob(format!("fix range {fs}..{fe}")));
    }
    let comment = if kind.needs_comment() {
        let c = flatten_comment(&inst.comment);
        if c.is_empty() {
            return Err(missing("comment"));
        }
        Some(c)
    } else {
        None
    };
    let anchor = inst.defect_line.unwrap_or(fs);

    // gap g sits before line g; within a gap the order is fixed
    let mut inserts: Vec<(usize, u8, Marker, String)> = Vec::new();
    let indent_before = |g: usize| indentation(lines.get(g).filter(|_| g < count).or(lines.get(g.wrapping_sub(1))).unwrap_or(&""));
    if kind.needs_fix_range() && fe > fs {
        inserts.push((fe, 0, Marker::FixEnd, format!("{}{FIX_END}", indentation(lines[fe - 1]))));
    }
    if let Some(c) = comment {
        inserts.push((anchor, 1, Marker::Comment, format!("{}{COMMENT_PREFIX}{c}", indent_before(anchor))));
    }
    if kind.needs_defect_line() {
        inserts.push((anchor, 2, Marker::BugLocation, format!("{}{BUG_LOCATION}", indent_before(anchor))));
    }
    if kind.needs_fix_range() {
        inserts.push((fs, 3, Marker::FixStart, format!("{}{FIX_START}", indent_before(fs))));
        if fe == fs {
            inserts.push((fs, 4, Marker::FixEnd, format!("{}{FIX_END}", indent_before(fs))));
        }
    }
    inserts.sort_by_key(|(g, o, _, _)| (*g, *o));

    let cr = if inst.buggy_code.contains("\r\n") { "\r" } else { "" };
    let mut out: Vec<String> = Vec::with_capacity(lines.len() + inserts.len());
    let mut tagged: Vec<(usize, Marker, usize)> = Vec::new();
    let mut next = inserts.into_iter().peekable();
    for (i, line) in lines.iter().enumerate() {
        while let Some((_, _, marker, text)) = next.next_if(|(g, ..)| *g == i) {
            tagged.push((out.len(), marker, text.len() - text.trim_start().len()));
            out.push(format!("{text}{cr}"));
        }
        out.push(line.to_string());
    }
    for (_, _, marker, text) in next {
        tagged.push((out.len(), marker, text.len() - text.trim_start().len()));
        out.push(format!("{text}{cr}"));
    }

    let mut offsets = Vec::with_capacity(out.len());
    let mut at = 0;
    for l in &out {
        offsets.push(at);
        at += l.len() + 1;
    }
    let markers = tagged.into_iter().map(|(line, m, ind)| (m, offsets[line] + ind)).collect();
    Ok(Annotated { text: out.join("\n"), markers })
}

/// The buggy snippet with the kind's comment line and marker lines inserted.
pub fn annotate_snippet(inst: &RepairInstance, kind: PromptKind) -> Result<String, PromptError> {
    annotate(inst, kind).map(|a| a.text)
}

pub fn render_prompt(inst: &RepairInstance, kind: PromptKind) -> Result<RenderedPrompt, PromptError> {
    let annotated = annotate(inst, kind)?;
    let head = format!("{}\n{BUGGY_HEADER}\n", kind.instruction_text());
    let text = format!("{head}{}\n{FIXED_HEADER}\n", annotated.text);
    let marker_positions =
        annotated.markers.into_iter().map(|(marker, off)| MarkerPosition { marker, offset: head.len() + off }).collect();
    Ok(RenderedPrompt {
        text,
        kind,
        instance_id: inst.id.clone(),
        marker_positions,
        expected_completion: (kind.mode() == Mode::Finetune).then(|| inst.fixed_code.clone()),
    })
}

/// Remove every line that annotation could have inserted.
pub fn strip_inserted_lines(annotated: &str) -> String {
    annotated
        .split('\n')
        .filter(|l| {
            let t = l.trim();
            !(t == BUG_LOCATION || t == FIX_START || t == FIX_END || t.starts_with(COMMENT_PREFIX))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Serialize, Deserialize)]
struct FinetunePair<'a> {
    prompt: &'a str,
    completion: &'a str,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SkippedInstance {
    pub id: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExportReport {
    pub kind: PromptKind,
    pub written: usize,
    pub skipped: Vec<SkippedInstance>,
    pub data_path: PathBuf,
    pub metadata_path: PathBuf,
    pub skip_report_path: PathBuf,
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

/// Write `{prompt, completion}` lines plus a metadata sidecar and a skip report.
pub fn export_finetune(corpus: &Corpus, kind: PromptKind, path: &Path) -> Result<ExportReport, PromptError> {
    if kind.mode() != Mode::Finetune {
        return Err(PromptError::ZeroShotExport(kind));
    }
    let mut data = String::new();
    let mut written = 0;
    let mut skipped = Vec::new();
    for inst in &corpus.instances {
        match render_prompt(inst, kind) {
            Ok(p) => {
                let pair = FinetunePair { prompt: &p.text, completion: &inst.fixed_code };
                data.push_str(&serde_json::to_string(&pair).expect("strings serialize"));
                data.push('\n');
                written += 1;
            }
            Err(e) => skipped.push(SkippedInstance { id: inst.id.clone(), reason: e.to_string() }),
        }
    }
    let metadata_path = sibling(path, ".meta.json");
    let skip_report_path = sibling(path, ".skipped.jsonl");
    io::write_atomic(path, data.as_bytes())?;
    let meta = serde_json::json!({
        "prompt_kind": kind,
        "instruction": kind.instruction_text(),
        "corpus": corpus.source_label,
        "corpus_hash": corpus.content_hash(),
        "records": written,
        "skipped": skipped.len(),
        "reference_hyperparameters": {
            "epochs": FINETUNE_EPOCHS,
            "learning_rate": FINETUNE_LEARNING_RATE,
            "batch_size": FINETUNE_BATCH_SIZE,
        },
    });
    io::write_atomic(&metadata_path, io::to_pretty_json(&meta).as_bytes())?;
    io::write_atomic(&skip_report_path, io::to_jsonl(&skipped).as_bytes())?;
    Ok(ExportReport { kind, written, skipped, data_path: path.to_path_buf(), metadata_path, skip_report_path })
}
