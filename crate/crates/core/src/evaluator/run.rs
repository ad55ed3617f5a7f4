use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{extract_code, EvalError};
use crate::backend::{Backend, CompletionRequest, RequestTag, DEFAULT_MAX_OUTPUT_TOKENS};
use crate::codebleu::{code_bleu, CodeBleuScore, Weights, DATAFLOW_METHOD, DEFAULT_MAX_N};
use crate::codenorm::ecm;
use crate::corpus::{Corpus, RepairInstance};
use crate::io;
use crate::prompt::{render_prompt, PromptKind};

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub model_id: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub stop_sequences: Vec<String>,
    /// Upper bound on concurrent backend calls.
    pub concurrency: usize,
    pub weights: Weights,
    pub max_n: usize,
    /// Where artifacts are written; an existing artifact with the same run id is reused.
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model_id: "unspecified".into(),
            temperature: 0.0,
            max_output_tokens: DEFAULT_MAX_OUTPUT_TOKENS,
            stop_sequences: Vec::new(),
            concurrency: 4,
            weights: Weights::default(),
            max_n: DEFAULT_MAX_N,
            out_dir: None,
        }
    }
}

/// Everything besides corpus, kind and backend that changes a run's outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub model_id: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub stop_sequences: Vec<String>,
    pub code_bleu_weights: [f64; 4],
    pub code_bleu_max_n: usize,
    pub dataflow_method: String,
}

impl RunParams {
    fn from_config(c: &RunConfig) -> Self {
        RunParams {
            model_id: c.model_id.clone(),
            temperature: c.temperature,
            max_output_tokens: c.max_output_tokens,
            stop_sequences: c.stop_sequences.clone(),
            code_bleu_weights: c.weights.0,
            code_bleu_max_n: c.max_n,
            dataflow_method: DATAFLOW_METHOD.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRef {
    pub label: String,
    pub content_hash: String,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub instance_id: String,
    pub rule_id: Option<String>,
    pub raw_output: String,
    pub extracted_code: String,
    /// Exact match after extraction.
    pub ecm: bool,
    /// Exact match of the raw output, without extraction.
    pub ecm_raw: bool,
    pub code_bleu: CodeBleuScore,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub run_id: String,
    pub corpus_ref: CorpusRef,
    pub kind: PromptKind,
    pub backend_id: String,
    pub params: RunParams,
    pub records: Vec<InstanceRecord>,
}

impl RunArtifact {
    pub fn file_name(run_id: &str) -> String {
        format!("run-{run_id}.json")
    }

    pub fn save(&self, dir: &Path) -> Result<PathBuf, EvalError> {
        let path = dir.join(Self::file_name(&self.run_id));
        io::write_atomic(&path, io::to_pretty_json(self).as_bytes())?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let text = io::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| EvalError::Parse { path: path.to_path_buf(), message: e.to_string() })
    }
}

fn run_id(corpus_hash: &str, kind: PromptKind, backend_id: &str, params: &RunParams) -> String {
    let material = serde_json::to_string(&(corpus_hash, kind, backend_id, params)).expect("plain values serialize");
    hex::encode(Sha256::digest(material.as_bytes()))[..16].to_string()
}

/// Score one model answer against the instance's reference fix.
pub fn score_output(inst: &RepairInstance, raw_output: &str, weights: Weights, max_n: usize) -> InstanceRecord {
    let extracted = extract_code(raw_output);
    let score = code_bleu(&extracted, &inst.fixed_code, weights, max_n).unwrap_or_else(|e| {
        log::warn!("{}: CodeBLEU unavailable: {e}", inst.id);
        CodeBleuScore::zero(weights)
    });
    InstanceRecord {
        instance_id: inst.id.clone(),
        rule_id: inst.rule_id.clone(),
        raw_output: raw_output.to_string(),
        ecm: ecm(&extracted, &inst.fixed_code),
        ecm_raw: ecm(raw_output, &inst.fixed_code),
        extracted_code: extracted,
        code_bleu: score,
        error: None,
    }
}

fn failed(inst: &RepairInstance, error: String, weights: Weights) -> InstanceRecord {
    InstanceRecord {
        instance_id: inst.id.clone(),
        rule_id: inst.rule_id.clone(),
        raw_output: String::new(),
        extracted_code: String::new(),
        ecm: false,
        ecm_raw: false,
        code_bleu: CodeBleuScore::zero(weights),
        error: Some(error),
    }
}

fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len().max(1));
    if threads <= 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = items.chunks(chunk).map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("scoring thread panicked")).collect()
    })
}

/// Render, complete, extract and score every instance for one prompt kind.
pub fn run_kind(corpus: &Corpus, kind: PromptKind, backend: &Backend, config: &RunConfig) -> Result<RunArtifact, EvalError> {
    if corpus.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    if config.concurrency == 0 {
        return Err(EvalError::Config("concurrency must be at least 1".into()));
    }
    let params = RunParams::from_config(config);
    let corpus_hash = corpus.content_hash();
    let id = run_id(&corpus_hash, kind, backend.id(), &params);
    if let Some(dir) = &config.out_dir {
        let path = dir.join(RunArtifact::file_name(&id));
        if path.exists() {
            match RunArtifact::load(&path) {
                Ok(a) if a.run_id == id && a.records.len() == corpus.len() => {
                    log::info!("{kind}: reusing {}", path.display());
                    return Ok(a);
                }
                _ => log::warn!("{}: unreadable or stale, recomputing", path.display()),
            }
        }
    }

    let mut rendered = Vec::with_capacity(corpus.len());
    let mut requests = Vec::new();
    for inst in &corpus.instances {
        match render_prompt(inst, kind) {
            Ok(p) => {
                rendered.push(Ok(requests.len()));
                requests.push(CompletionRequest {
                    prompt_text: p.text,
                    model_id: config.model_id.clone(),
                    max_output_tokens: config.max_output_tokens,
                    temperature: config.temperature,
                    stop_sequences: config.stop_sequences.clone(),
                    request_tag: RequestTag { instance_id: inst.id.clone(), kind: Some(kind) },
                });
            }
            Err(e) => rendered.push(Err(format!("render: {e}"))),
        }
    }
    let mut completions = backend.complete_all(&requests, config.concurrency).into_iter().map(Some).collect::<Vec<_>>();
    let outcomes: Vec<(&RepairInstance, Result<String, String>)> = corpus
        .instances
        .iter()
        .zip(rendered)
        .map(|(inst, r)| {
            let out = r.and_then(|i| {
                completions[i].take().expect("one completion per request").map(|c| c.raw_output).map_err(|e| format!("backend: {e}"))
            });
            (inst, out)
        })
        .collect();
    let records = par_map(&outcomes, |(inst, out)| match out {
        Ok(raw) => score_output(inst, raw, config.weights, config.max_n),
        Err(e) => failed(inst, e.clone(), config.weights),
    });

    let artifact = RunArtifact {
        run_id: id,
        corpus_ref: CorpusRef { label: corpus.source_label.clone(), content_hash: corpus_hash, size: corpus.len() },
        kind,
        backend_id: backend.id().to_string(),
        params,
        records,
    };
    if let Some(dir) = &config.out_dir {
        let path = artifact.save(dir)?;
        log::info!("{kind}: wrote {}", path.display());
    }
    Ok(artifact)
}

/// One run per prompt kind, in the order given.
pub fn run_grid(corpus: &Corpus, kinds: &[PromptKind], backend: &Backend, config: &RunConfig) -> Result<Vec<RunArtifact>, EvalError> {
    kinds.iter().map(|&k| run_kind(corpus, k, backend, config)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::OracleBackend;
    use crate::corpus::Source;
    use crate::synth;

    #[test]
    fn golden_and_identity() {
        let corpus = synth::generate(Source::PD, 60, 2);
        let golden = Backend::new(OracleBackend::golden(&corpus));
        let run = run_kind(&corpus, PromptKind::P3, &golden, &RunConfig::default()).unwrap();
        assert_eq!(run.records.len(), 60);
        assert!(run.records.iter().all(|r| r.ecm && r.ecm_raw && r.error.is_none()));
        let identity = Backend::new(OracleBackend::identity(&corpus));
        let run = run_kind(&corpus, PromptKind::P3, &identity, &RunConfig::default()).unwrap();
        assert!(run.records.iter().all(|r| !r.ecm));
    }

    #[test]
    fn render_failures_are_recorded_not_fatal() {
        let mut corpus = synth::generate(Source::RD, 5, 2);
        corpus.instances[1].defect_line = None;
        let golden = Backend::new(OracleBackend::golden(&corpus));
        let run = run_kind(&corpus, PromptKind::P4, &golden, &RunConfig::default()).unwrap();
        assert_eq!(run.records.len(), 5);
        assert!(run.records[1].error.as_deref().unwrap().starts_with("render:"));
        assert!(!run.records[1].ecm);
        assert_eq!(run.records[1].code_bleu.total, 0.0);
        assert_eq!(run.records.iter().filter(|r| r.ecm).count(), 4);
    }

    #[test]
    fn persisted_run_is_reused() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = synth::generate(Source::RD, 8, 4);
        let config = RunConfig { out_dir: Some(dir.path().to_path_buf()), ..Default::default() };
        let golden = Backend::new(OracleBackend::golden(&corpus));
        let a = run_kind(&corpus, PromptKind::P7, &golden, &config).unwrap();
        let calls = golden.upstream_calls();
        let fresh = Backend::new(OracleBackend::golden(&corpus));
        let b = run_kind(&corpus, PromptKind::P7, &fresh, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(fresh.upstream_calls(), 0);
        assert!(calls > 0);
        let loaded = RunArtifact::load(&dir.path().join(RunArtifact::file_name(&a.run_id))).unwrap();
        assert_eq!(loaded, a);
    }

    #[test]
    fn empty_corpus_rejected() {
        let corpus = Corpus::new("RD", vec![]);
        let b = Backend::new(OracleBackend::golden(&corpus));
        assert!(matches!(run_kind(&corpus, PromptKind::P3, &b, &RunConfig::default()), Err(EvalError::EmptyCorpus)));
    }
}
