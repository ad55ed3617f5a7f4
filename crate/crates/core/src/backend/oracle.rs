use std::collections::HashMap;

use super::{Completion, CompletionBackend, CompletionRequest};
use crate::backend::BackendError;
use crate::corpus::Corpus;

/// Answers from the corpus itself, keyed by the request's instance id.
pub struct OracleBackend {
    id: &'static str,
    answers: HashMap<String, String>,
}

impl OracleBackend {
    /// Returns each instance's fixed code.
    pub fn golden(corpus: &Corpus) -> Self {
        OracleBackend {
            id: "golden",
            answers: corpus.instances.iter().map(|i| (i.id.clone(), i.fixed_code.clone())).collect(),
        }
    }

    /// Echoes each instance's buggy code.
    pub fn identity(corpus: &Corpus) -> Self {
        OracleBackend {
            id: "identity",
            answers: corpus.instances.iter().map(|i| (i.id.clone(), i.buggy_code.clone())).collect(),
        }
    }
}

impl CompletionBackend for OracleBackend {
    fn id(&self) -> String {
        self.id.to_string()
    }

    fn call(&self, request: &CompletionRequest, _: &str) -> Result<Completion, BackendError> {
        let id = &request.request_tag.instance_id;
        let text = self.answers.get(id).ok_or_else(|| BackendError::UnknownInstance(id.clone()))?;
        Ok(Completion { text: text.clone(), latency_ms: Some(0) })
    }
}
