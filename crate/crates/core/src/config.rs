//! File-based run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::SynthParams;
use crate::em::EmConfig;
use crate::graph::View;
use crate::{Error, Result};

/// Prefix of rule paths that name a shipped rule set, e.g.
/// `builtin:synthetic`.
pub const BUILTIN_PREFIX: &str = "builtin:";

/// Input and output locations. Relative paths are resolved against the
/// directory of the config file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunPaths {
    pub corpus: PathBuf,
    pub rules: PathBuf,
    /// Word vector text file (`token v1 .. vd` per line).
    pub word_vectors: PathBuf,
    pub output_dir: PathBuf,
}

impl Default for RunPaths {
    fn default() -> Self {
        RunPaths {
            corpus: "corpus.jsonl".into(),
            rules: "rules.json".into(),
            word_vectors: "vectors.txt".into(),
            output_dir: "out".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub paths: RunPaths,
    pub view: View,
    pub seed: u64,
    /// Dimension of the vectors in `paths.word_vectors`.
    pub word_vector_dim: usize,
    /// Weak labels file; computed from the rules when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weak_labels: Option<PathBuf>,
    pub include_weak_in_eval: bool,
    /// Generator settings used by `synth`.
    pub synth: SynthParams,
    pub em: EmConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        default_config()
    }
}

/// d = 300, BiLSTM with 150 hidden units, 5 negatives, λ = 1, lr 0.001,
/// batch 16, 100 epochs with patience 10, k = 20, churn threshold 0.10,
/// ensemble of 3, des+net view.
pub fn default_config() -> RunConfig {
    RunConfig {
        paths: RunPaths::default(),
        view: View::DesNet,
        seed: 0,
        word_vector_dim: 300,
        weak_labels: None,
        include_weak_in_eval: true,
        synth: SynthParams::default(),
        em: EmConfig::default(),
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })?;
        if let Some(base) = path.parent() {
            config.resolve_paths(base);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() && !p.to_string_lossy().starts_with(BUILTIN_PREFIX) {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.paths.corpus);
        fix(&mut self.paths.rules);
        fix(&mut self.paths.word_vectors);
        fix(&mut self.paths.output_dir);
        if let Some(w) = self.weak_labels.as_mut() {
            fix(w);
        }
    }

    /// The EM settings with the run seed applied.
    pub fn em_config(&self) -> EmConfig {
        let mut em = self.em.clone();
        em.train.seed = self.seed;
        em
    }

    pub fn synth_params(&self) -> SynthParams {
        SynthParams {
            seed: self.seed,
            ..self.synth.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.word_vector_dim == 0 {
            return Err(Error::InvalidParams("word_vector_dim must be positive".into()));
        }
        self.synth.validate()?;
        self.em.validate()
    }

    /// Stable hash of the serialized config.
    pub fn fingerprint(&self) -> Result<String> {
        Ok(format!("{:016x}", crate::seed::fnv1a(serde_json::to_string(self)?.as_bytes())))
    }
}
