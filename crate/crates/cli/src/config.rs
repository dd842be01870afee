//! Declarative pipeline configuration (TOML) plus flag overrides.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use vidframing::ingest::Segment;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// JSONL manifest of the corpus.
    pub manifest: PathBuf,
    /// All outputs land here.
    pub out_dir: PathBuf,
    /// Segments analyzed by `features`, in output order.
    #[serde(default = "default_segments")]
    pub segments: Vec<String>,
    #[serde(default = "default_frame_rate")]
    pub frame_rate: f64,
    /// External decoder template with {input}, {rate}, {out_pattern}.
    #[serde(default = "default_decoder")]
    pub decoder_cmd: String,
    pub lexicon: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    /// Worker threads; 0 or absent means one per core.
    #[serde(default)]
    pub workers: usize,
    /// Master seed. Must come from here or --seed; there is no entropy
    /// default.
    pub seed: Option<u64>,
    /// BH false-discovery level for `compare`.
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default)]
    pub text: TextConfig,
    #[serde(default)]
    pub model: ModelConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextConfig {
    #[serde(default = "default_word_count_k")]
    pub word_count_k: usize,
    #[serde(default = "default_embedding_dim")]
    pub embedding_dim: usize,
    #[serde(default = "default_embedding_epochs")]
    pub embedding_epochs: usize,
    /// When non-empty, transcripts are reduced to windows around these
    /// keywords before any text feature is computed.
    #[serde(default)]
    pub chunk_keywords: Vec<String>,
    #[serde(default = "default_chunk_span")]
    pub chunk_before: usize,
    #[serde(default = "default_chunk_span")]
    pub chunk_after: usize,
    /// Term-vector components hold counts instead of presence flags.
    #[serde(default)]
    pub count_mode: bool,
}

impl Default for TextConfig {
    fn default() -> TextConfig {
        TextConfig {
            word_count_k: default_word_count_k(),
            embedding_dim: default_embedding_dim(),
            embedding_epochs: default_embedding_epochs(),
            chunk_keywords: Vec::new(),
            chunk_before: default_chunk_span(),
            chunk_after: default_chunk_span(),
            count_mode: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// "rf" or "mlp"; subcommands can override with --model.
    #[serde(default = "default_model_kind")]
    pub kind: String,
    #[serde(default = "default_n_trees")]
    pub n_trees: usize,
    #[serde(default = "default_min_leaf")]
    pub min_leaf: usize,
    pub mtry: Option<usize>,
    #[serde(default = "default_hidden")]
    pub hidden: Vec<usize>,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_batch")]
    pub batch: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_importance_repeats")]
    pub importance_repeats: usize,
}

impl Default for ModelConfig {
    fn default() -> ModelConfig {
        ModelConfig {
            kind: default_model_kind(),
            n_trees: default_n_trees(),
            min_leaf: default_min_leaf(),
            mtry: None,
            hidden: default_hidden(),
            learning_rate: default_learning_rate(),
            batch: default_batch(),
            epochs: default_epochs(),
            patience: default_patience(),
            folds: default_folds(),
            importance_repeats: default_importance_repeats(),
        }
    }
}

fn default_segments() -> Vec<String> {
    vec!["all".to_string()]
}
fn default_frame_rate() -> f64 {
    1.0
}
fn default_decoder() -> String {
    "ffmpeg -hide_banner -loglevel error -i {input} -r {rate} {out_pattern}".to_string()
}
fn default_q() -> f64 {
    0.05
}
fn default_word_count_k() -> usize {
    10_000
}
fn default_embedding_dim() -> usize {
    200
}
fn default_embedding_epochs() -> usize {
    20
}
fn default_chunk_span() -> usize {
    20
}
fn default_model_kind() -> String {
    "rf".to_string()
}
fn default_n_trees() -> usize {
    100
}
fn default_min_leaf() -> usize {
    1
}
fn default_hidden() -> Vec<usize> {
    vec![64, 64]
}
fn default_learning_rate() -> f64 {
    0.001
}
fn default_batch() -> usize {
    32
}
fn default_epochs() -> usize {
    200
}
fn default_patience() -> usize {
    20
}
fn default_folds() -> usize {
    10
}
fn default_importance_repeats() -> usize {
    10
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<PipelineConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: PipelineConfig = toml::from_str(&text)
            .map_err(|e| CliError::config(format!("bad config {}: {e}", path.display())))?;
        // relative paths resolve against the config file's directory
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let anchor = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&p);
            }
        };
        anchor(&mut config.manifest);
        anchor(&mut config.out_dir);
        if let Some(p) = config.lexicon.as_mut() {
            anchor(p);
        }
        if let Some(p) = config.stopwords.as_mut() {
            anchor(p);
        }
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.frame_rate > 0.0) {
            return Err(CliError::config("frame_rate must be positive"));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(CliError::config("q must lie in (0, 1)"));
        }
        for s in &self.segments {
            if Segment::parse(s).is_none() {
                return Err(CliError::config(format!(
                    "unknown segment {s:?}; use all, first<N>s, middle<N>s or thumbnail"
                )));
            }
        }
        if self.segments.is_empty() {
            return Err(CliError::config("segments must not be empty"));
        }
        match self.model.kind.as_str() {
            "rf" | "mlp" => {}
            other => {
                return Err(CliError::config(format!(
                    "unknown model kind {other:?}; expected rf or mlp"
                )))
            }
        }
        Ok(())
    }

    /// Parsed segment list, in config order.
    pub fn parsed_segments(&self) -> Vec<Segment> {
        self.segments
            .iter()
            .map(|s| Segment::parse(s).expect("validated"))
            .collect()
    }

    /// The seed is mandatory after flag merging.
    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::config("no seed configured; set seed = … or pass --seed"))
    }
}
