use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use super::{BackendError, Completion, CompletionBackend, CompletionRequest, StoredCompletion};
use crate::io;

/// Parse a store file. Later lines win on duplicate keys.
pub fn parse_store(text: &str) -> Result<Vec<StoredCompletion>, String> {
    io::jsonl_lines(text)
        .map(|(line, raw)| serde_json::from_str(raw).map_err(|e| format!("line {line}: {e}")))
        .collect()
}

/// Serves completions recorded earlier; never touches the network.
pub struct ReplayBackend {
    id: String,
    entries: HashMap<String, StoredCompletion>,
}

impl ReplayBackend {
    /// `as_backend` picks which recorded backend to impersonate; it may be
    /// omitted when the store holds exactly one.
    pub fn from_records(records: Vec<StoredCompletion>, as_backend: Option<&str>) -> Result<Self, BackendError> {
        let ids: BTreeSet<&str> = records.iter().map(|r| r.backend_id.as_str()).collect();
        let id = match (as_backend, ids.len()) {
            (Some(id), _) => id.to_string(),
            (None, 0) => "replay".to_string(),
            (None, 1) => ids.first().expect("one id").to_string(),
            (None, _) => {
                return Err(BackendError::Config(format!(
                    "store holds several backends ({}); choose one",
                    ids.into_iter().collect::<Vec<_>>().join(", ")
                )))
            }
        };
        let entries = records.into_iter().filter(|r| r.backend_id == id).map(|r| (r.cache_key.clone(), r)).collect();
        Ok(ReplayBackend { id, entries })
    }

    pub fn load(path: &Path, as_backend: Option<&str>) -> Result<Self, BackendError> {
        let store = |message: String| BackendError::Store { path: path.to_path_buf(), message };
        let text = std::fs::read_to_string(path).map_err(|e| store(e.to_string()))?;
        ReplayBackend::from_records(parse_store(&text).map_err(store)?, as_backend)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl CompletionBackend for ReplayBackend {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn call(&self, _: &CompletionRequest, cache_key: &str) -> Result<Completion, BackendError> {
        let rec = self.entries.get(cache_key).ok_or_else(|| BackendError::ReplayMiss { key: cache_key.to_string() })?;
        Ok(Completion { text: rec.raw_output.clone(), latency_ms: Some(rec.latency_ms) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{cache_key, Backend, RequestTag};

    fn req(p: &str) -> CompletionRequest {
        CompletionRequest::new(p, "m", RequestTag { instance_id: "a".into(), kind: None })
    }

    fn stored(backend: &str, p: &str, out: &str) -> StoredCompletion {
        let r = req(p);
        StoredCompletion { cache_key: cache_key(backend, &r), backend_id: backend.into(), request: r, raw_output: out.into(), latency_ms: 42 }
    }

    #[test]
    fn lookup_and_miss() {
        let b = Backend::new(ReplayBackend::from_records(vec![stored("remote", "p", "int a = 1;")], None).unwrap());
        let r = b.complete(&req("p")).unwrap();
        assert_eq!(r.raw_output, "int a = 1;");
        assert_eq!(r.latency_ms, 42);
        assert_eq!(r.backend_id, "remote");
        let miss = b.complete(&req("q")).unwrap_err();
        assert_eq!(miss, BackendError::ReplayMiss { key: cache_key("remote", &req("q")) });
    }

    #[test]
    fn ambiguous_store_needs_choice() {
        let recs = vec![stored("x", "p", "1"), stored("y", "p", "2")];
        assert!(ReplayBackend::from_records(recs.clone(), None).is_err());
        let b = Backend::new(ReplayBackend::from_records(recs, Some("y")).unwrap());
        assert_eq!(b.complete(&req("p")).unwrap().raw_output, "2");
    }

    #[test]
    fn malformed_store_line() {
        assert!(parse_store("{}\n").unwrap_err().starts_with("line 1"));
        assert!(parse_store("\n\n").unwrap().is_empty());
    }
}
