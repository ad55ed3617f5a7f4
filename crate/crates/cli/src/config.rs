//! TOML run manifest. Every key is optional; command-line flags override it.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub out_dir: Option<PathBuf>,
    pub format: Option<String>,
    #[serde(default)]
    pub corpus: Vec<CorpusEntry>,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub backend: BackendSection,
    #[serde(default)]
    pub sampling: SamplingSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub prune: PruneSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub path: PathBuf,
    pub source: String,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    pub ratio: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendSection {
    /// golden, identity, replay or remote
    pub kind: Option<String>,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    /// Name of the environment variable holding the API key.
    pub api_key_env: Option<String>,
    pub system_prompt: Option<String>,
    pub concurrency: Option<usize>,
    pub retries: Option<u32>,
    pub timeout_secs: Option<u64>,
    /// Record/replay store.
    pub store: Option<PathBuf>,
    /// Backend id to serve from a store holding several.
    pub replay_as: Option<String>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    pub temperature: Option<f64>,
    pub max_output_tokens: Option<u32>,
    pub stop: Option<Vec<String>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub prompts: Option<Vec<String>>,
    pub code_bleu_weights: Option<[f64; 4]>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PruneSection {
    pub trivial_comments: Option<Vec<String>>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let Some(path) = path else { return Ok(Config::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let config: Config = toml::from_str(&text).map_err(|e| crate::Invalid(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Ok(config.relative_to(base))
    }

    /// Resolve relative paths against the config file's directory.
    fn relative_to(mut self, base: &Path) -> Config {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.out_dir.as_mut() {
            fix(p);
        }
        for c in &mut self.corpus {
            fix(&mut c.path);
        }
        if let Some(p) = self.backend.store.as_mut() {
            fix(p);
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_manifest() {
        let c: Config = toml::from_str(
            r#"
            out_dir = "out"
            [[corpus]]
            path = "rd.jsonl"
            source = "rd"
            [split]
            ratio = 0.9
            seed = 7
            [backend]
            kind = "remote"
            model = "m"
            concurrency = 2
            [sampling]
            temperature = 0.0
            stop = ["```"]
            [run]
            prompts = ["p3", "p7"]
            "#,
        )
        .unwrap();
        assert_eq!(c.corpus.len(), 1);
        assert_eq!(c.split.seed, Some(7));
        assert_eq!(c.backend.concurrency, Some(2));
        assert_eq!(c.run.prompts.as_ref().unwrap().len(), 2);
        let c = c.relative_to(Path::new("/cfg"));
        assert_eq!(c.corpus[0].path, PathBuf::from("/cfg/rd.jsonl"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Config>("[backend]\nkindd = \"x\"").is_err());
        assert!(toml::from_str::<Config>("bogus = 1").is_err());
    }
}
