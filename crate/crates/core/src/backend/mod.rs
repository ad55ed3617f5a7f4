//! Completion backends behind one cached, bounded-concurrency handle.

mod oracle;
mod remote;
mod replay;

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::prompt::PromptKind;

pub use oracle::OracleBackend;
pub use remote::{parse_chat_response, RemoteBackend, RemoteConfig, DEFAULT_BASE_URL};
pub use replay::{parse_store, ReplayBackend};

pub const DEFAULT_MAX_OUTPUT_TOKENS: u32 = 1024;
pub const DEFAULT_RETRIES: u32 = 3;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RequestTag {
    pub instance_id: String,
    pub kind: Option<PromptKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt_text: String,
    pub model_id: String,
    pub max_output_tokens: u32,
    pub temperature: f64,
    #[serde(default)]
    pub stop_sequences: Vec<String>,
    pub request_tag: RequestTag,
}

impl CompletionRequest {
    pub fn new(prompt_text: impl Into<String>, model_id: impl Into<String>, tag: RequestTag) -> Self {
        CompletionRequest {
            prompt_text: prompt_text.into(),
            model_id: model_id.into(),
            max_output_tokens: DEFAULT_MAX_OUTPUT_TOKENS,
            temperature: 0.0,
            stop_sequences: Vec::new(),
            request_tag: tag,
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if self.prompt_text.is_empty() {
            return Err(BackendError::InvalidRequest("prompt_text is empty".into()));
        }
        if self.max_output_tokens == 0 {
            return Err(BackendError::InvalidRequest("max_output_tokens must be positive".into()));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(BackendError::InvalidRequest(format!("bad temperature {}", self.temperature)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletionRecord {
    pub request: CompletionRequest,
    pub raw_output: String,
    pub latency_ms: u64,
    pub backend_id: String,
    pub cache_hit: bool,
    pub cache_key: String,
}

/// One line of a record/replay store.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredCompletion {
    pub cache_key: String,
    pub backend_id: String,
    pub request: CompletionRequest,
    pub raw_output: String,
    pub latency_ms: u64,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum BackendError {
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("API returned status {status}: {body}")]
    Api { status: u16, body: String },
    #[error("no recorded completion for cache key {key}")]
    ReplayMiss { key: String },
    #[error("oracle has no instance `{0}`")]
    UnknownInstance(String),
    #[error("malformed API response: {0}")]
    BadResponse(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("store {path}: {message}")]
    Store { path: PathBuf, message: String },
    #[error("backend configuration: {0}")]
    Config(String),
}

/// What an implementation returns for one request.
pub struct Completion {
    pub text: String,
    /// Recorded latency for stored answers; measured by the handle otherwise.
    pub latency_ms: Option<u64>,
}

pub trait CompletionBackend: Send + Sync {
    /// Identity used in cache keys and reported on records.
    fn id(&self) -> String;
    fn call(&self, request: &CompletionRequest, cache_key: &str) -> Result<Completion, BackendError>;
}

pub fn cache_key(backend_id: &str, req: &CompletionRequest) -> String {
    let material = serde_json::to_string(&(backend_id, &req.model_id, &req.prompt_text, req.temperature, req.max_output_tokens))
        .expect("plain values serialize");
    hex::encode(Sha256::digest(material.as_bytes()))
}

#[derive(Clone)]
struct Cached {
    raw_output: String,
    latency_ms: u64,
}

type Slot = Arc<OnceLock<Result<Cached, BackendError>>>;

struct Recorder {
    path: PathBuf,
    file: Mutex<File>,
}

/// Cached handle over a backend. Concurrent identical requests share one upstream call.
pub struct Backend {
    inner: Box<dyn CompletionBackend>,
    id: String,
    cache: Mutex<HashMap<String, Slot>>,
    recorder: Option<Recorder>,
    upstream: AtomicUsize,
    in_flight: AtomicUsize,
    max_in_flight: AtomicUsize,
}

impl Backend {
    pub fn new(inner: impl CompletionBackend + 'static) -> Self {
        let id = inner.id();
        Backend {
            inner: Box::new(inner),
            id,
            cache: Mutex::new(HashMap::new()),
            recorder: None,
            upstream: AtomicUsize::new(0),
            in_flight: AtomicUsize::new(0),
            max_in_flight: AtomicUsize::new(0),
        }
    }

    /// Persist every fresh completion to `store`; entries already there for
    /// this backend are served from cache.
    pub fn recording(inner: impl CompletionBackend + 'static, store: &Path) -> Result<Self, BackendError> {
        let mut b = Backend::new(inner);
        let store_err = |e: std::io::Error| BackendError::Store { path: store.to_path_buf(), message: e.to_string() };
        if store.exists() {
            let text = std::fs::read_to_string(store).map_err(store_err)?;
            let mut cache = b.cache.lock().expect("cache lock");
            for rec in parse_store(&text).map_err(|m| BackendError::Store { path: store.to_path_buf(), message: m })? {
                if rec.backend_id == b.id {
                    let slot: Slot = Arc::new(OnceLock::new());
                    let _ = slot.set(Ok(Cached { raw_output: rec.raw_output, latency_ms: rec.latency_ms }));
                    cache.insert(rec.cache_key, slot);
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(store).map_err(store_err)?;
        b.recorder = Some(Recorder { path: store.to_path_buf(), file: Mutex::new(file) });
        Ok(b)
    }

    pub fn replay(store: &Path, as_backend: Option<&str>) -> Result<Self, BackendError> {
        Ok(Backend::new(ReplayBackend::load(store, as_backend)?))
    }

    pub fn remote(config: RemoteConfig) -> Result<Self, BackendError> {
        Ok(Backend::new(RemoteBackend::new(config)?))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Calls that reached the underlying backend.
    pub fn upstream_calls(&self) -> usize {
        self.upstream.load(Ordering::SeqCst)
    }

    pub fn max_in_flight(&self) -> usize {
        self.max_in_flight.load(Ordering::SeqCst)
    }

    pub fn complete(&self, request: &CompletionRequest) -> Result<CompletionRecord, BackendError> {
        request.validate()?;
        let key = cache_key(&self.id, request);
        let slot = {
            let mut cache = self.cache.lock().expect("cache lock");
            cache.entry(key.clone()).or_default().clone()
        };
        let mut fresh = false;
        let outcome = slot
            .get_or_init(|| {
                fresh = true;
                self.call_upstream(request, &key)
            })
            .clone();
        if fresh && outcome.is_err() {
            let mut cache = self.cache.lock().expect("cache lock");
            if cache.get(&key).is_some_and(|s| Arc::ptr_eq(s, &slot)) {
                cache.remove(&key);
            }
        }
        let cached = outcome?;
        Ok(CompletionRecord {
            request: request.clone(),
            raw_output: cached.raw_output,
            latency_ms: cached.latency_ms,
            backend_id: self.id.clone(),
            cache_hit: !fresh,
            cache_key: key,
        })
    }

    fn call_upstream(&self, request: &CompletionRequest, key: &str) -> Result<Cached, BackendError> {
        self.upstream.fetch_add(1, Ordering::SeqCst);
        let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.max_in_flight.fetch_max(now, Ordering::SeqCst);
        let started = Instant::now();
        let result = self.inner.call(request, key);
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
        let c = result?;
        let cached = Cached {
            latency_ms: c.latency_ms.unwrap_or_else(|| started.elapsed().as_millis() as u64),
            raw_output: c.text,
        };
        if let Some(rec) = &self.recorder {
            let line = serde_json::to_string(&StoredCompletion {
                cache_key: key.to_string(),
                backend_id: self.id.clone(),
                request: request.clone(),
                raw_output: cached.raw_output.clone(),
                latency_ms: cached.latency_ms,
            })
            .expect("record serializes");
            let mut f = rec.file.lock().expect("store lock");
            writeln!(f, "{line}")
                .and_then(|_| f.flush())
                .map_err(|e| BackendError::Store { path: rec.path.clone(), message: e.to_string() })?;
        }
        Ok(cached)
    }

    /// Complete every request with at most `k` upstream calls in flight.
    /// Results come back in request order.
    pub fn complete_all(&self, requests: &[CompletionRequest], k: usize) -> Vec<Result<CompletionRecord, BackendError>> {
        let workers = k.max(1).min(requests.len());
        if workers <= 1 {
            return requests.iter().map(|r| self.complete(r)).collect();
        }
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<Option<Result<CompletionRecord, BackendError>>>> =
            Mutex::new((0..requests.len()).map(|_| None).collect());
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(req) = requests.get(i) else { break };
                    let r = self.complete(req);
                    results.lock().expect("results lock")[i] = Some(r);
                });
            }
        });
        results.into_inner().expect("results lock").into_iter().map(|r| r.expect("every slot filled")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::AtomicUsize;
    use std::time::Duration;

    fn req(prompt: &str) -> CompletionRequest {
        CompletionRequest::new(prompt, "m", RequestTag { instance_id: "i".into(), kind: None })
    }

    struct Counting {
        calls: Arc<AtomicUsize>,
        fail_first: bool,
    }

    impl CompletionBackend for Counting {
        fn id(&self) -> String {
            "counting".into()
        }
        fn call(&self, r: &CompletionRequest, _: &str) -> Result<Completion, BackendError> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst);
            std::thread::sleep(Duration::from_millis(5));
            if self.fail_first && n == 0 {
                return Err(BackendError::Transport { attempts: 1, message: "boom".into() });
            }
            Ok(Completion { text: format!("out:{}", r.prompt_text), latency_ms: None })
        }
    }

    #[test]
    fn second_identical_call_hits_cache() {
        let calls = Arc::new(AtomicUsize::new(0));
        let b = Backend::new(Counting { calls: calls.clone(), fail_first: false });
        let a = b.complete(&req("x")).unwrap();
        let c = b.complete(&req("x")).unwrap();
        assert!(!a.cache_hit);
        assert!(c.cache_hit);
        assert_eq!(a.raw_output, c.raw_output);
        assert_eq!(calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn errors_are_not_cached() {
        let calls = Arc::new(AtomicUsize::new(0));
        let b = Backend::new(Counting { calls: calls.clone(), fail_first: true });
        assert!(b.complete(&req("x")).is_err());
        assert_eq!(b.complete(&req("x")).unwrap().raw_output, "out:x");
    }

    #[test]
    fn key_depends_on_listed_fields_only() {
        let base = req("p");
        let k = cache_key("b", &base);
        let mut t = base.clone();
        t.temperature = 0.7;
        assert_ne!(cache_key("b", &t), k);
        let mut t = base.clone();
        t.max_output_tokens = 5;
        assert_ne!(cache_key("b", &t), k);
        assert_ne!(cache_key("c", &base), k);
        let mut t = base.clone();
        t.request_tag.instance_id = "other".into();
        t.stop_sequences = vec!["x".into()];
        assert_eq!(cache_key("b", &t), k);
    }

    #[test]
    fn concurrent_dispatch_dedups_and_bounds() {
        let calls = Arc::new(AtomicUsize::new(0));
        let b = Backend::new(Counting { calls: calls.clone(), fail_first: false });
        let reqs: Vec<_> = (0..40).map(|i| req(&format!("p{}", i % 10))).collect();
        let out = b.complete_all(&reqs, 4);
        assert_eq!(out.len(), 40);
        for (r, o) in reqs.iter().zip(&out) {
            assert_eq!(o.as_ref().unwrap().raw_output, format!("out:{}", r.prompt_text));
        }
        assert_eq!(calls.load(Ordering::SeqCst), 10);
        assert_eq!(b.upstream_calls(), 10);
        assert!(b.max_in_flight() <= 4);
    }

    #[test]
    fn invalid_request() {
        let b = Backend::new(Counting { calls: Arc::default(), fail_first: false });
        assert!(matches!(b.complete(&req("")), Err(BackendError::InvalidRequest(_))));
    }
}
