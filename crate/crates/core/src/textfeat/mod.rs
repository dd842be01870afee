//! Transcript features: preprocessing, keyword-window chunking,
//! emotion-lexicon profiles, top-K term-presence vectors, and
//! distributed-memory document embeddings.

pub mod pvdm;

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use pvdm::{infer_pvdm, train_pvdm, PvdmModel, PvdmParams};

#[derive(Debug, Error)]
pub enum TextFeatError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("lexicon parse error at line {line}: {message}")]
    LexiconParse { line: usize, message: String },
    #[error("unknown emotion category {category:?} at line {line}")]
    UnknownCategory { category: String, line: usize },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("no term reaches min_count; vocabulary is empty")]
    EmptyVocabulary,
}

/// The ten NRC categories, in report order.
pub const EMOTION_CATEGORIES: [&str; 10] = [
    "anger",
    "fear",
    "anticipation",
    "trust",
    "surprise",
    "sadness",
    "joy",
    "disgust",
    "negative",
    "positive",
];

/// A preprocessed transcript.
#[derive(Debug, Clone)]
pub struct Transcript {
    pub video_id: String,
    pub raw: String,
    pub tokens: Vec<String>,
}

/// Term → category-set lookup loaded from the NRC-style TSV.
#[derive(Debug, Clone, Default)]
pub struct EmotionLexicon {
    entries: HashMap<String, u16>,
}

impl EmotionLexicon {
    pub fn from_entries<I: IntoIterator<Item = (String, Vec<usize>)>>(items: I) -> EmotionLexicon {
        let mut entries: HashMap<String, u16> = HashMap::new();
        for (term, categories) in items {
            let mask = entries.entry(term.to_lowercase()).or_insert(0);
            for c in categories {
                *mask |= 1 << c;
            }
        }
        EmotionLexicon { entries }
    }

    /// Parse `term<TAB>category<TAB>{0|1}` lines; 0-flag lines are skipped.
    pub fn parse(text: &str) -> Result<EmotionLexicon, TextFeatError> {
        let mut entries: HashMap<String, u16> = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let (term, category, flag) = match (parts.next(), parts.next(), parts.next()) {
                (Some(t), Some(c), Some(f)) => (t, c, f.trim()),
                _ => {
                    return Err(TextFeatError::LexiconParse {
                        line: lineno,
                        message: format!("expected 3 tab-separated fields, got {line:?}"),
                    })
                }
            };
            let flag: u8 = flag.parse().map_err(|_| TextFeatError::LexiconParse {
                line: lineno,
                message: format!("bad flag {flag:?}"),
            })?;
            if flag == 0 {
                continue;
            }
            let idx = EMOTION_CATEGORIES
                .iter()
                .position(|&c| c == category)
                .ok_or_else(|| TextFeatError::UnknownCategory {
                    category: category.to_string(),
                    line: lineno,
                })?;
            *entries.entry(term.to_lowercase()).or_insert(0) |= 1 << idx;
        }
        Ok(EmotionLexicon { entries })
    }

    pub fn load(path: &Path) -> Result<EmotionLexicon, TextFeatError> {
        let text = std::fs::read_to_string(path).map_err(|source| TextFeatError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        EmotionLexicon::parse(&text)
    }

    pub fn categories_of(&self, term: &str) -> u16 {
        self.entries.get(term).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Load a newline-separated stopword file.
pub fn load_stopwords(path: &Path) -> Result<HashSet<String>, TextFeatError> {
    let text = std::fs::read_to_string(path).map_err(|source| TextFeatError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(text
        .lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect())
}

/// Strip markup, lowercase, split on non-alphanumeric boundaries, drop
/// stopwords.
pub fn preprocess(raw: &str, stopwords: &HashSet<String>) -> Vec<String> {
    let mut stripped = String::with_capacity(raw.len());
    let mut in_tag = false;
    for ch in raw.chars() {
        match ch {
            '<' => in_tag = true,
            '>' if in_tag => {
                in_tag = false;
                stripped.push(' ');
            }
            _ if !in_tag => stripped.push(ch),
            _ => {}
        }
    }
    stripped
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty() && !stopwords.contains(*t))
        .map(|t| t.to_string())
        .collect()
}

/// One token window per keyword occurrence, `before`/`after` tokens on
/// either side, clamped at the transcript boundaries.
pub fn chunk_transcript(
    tokens: &[String],
    keywords: &HashSet<String>,
    before: usize,
    after: usize,
) -> Vec<Vec<String>> {
    let mut windows = Vec::new();
    for (pos, token) in tokens.iter().enumerate() {
        if keywords.contains(token) {
            let start = pos.saturating_sub(before);
            let end = (pos + after).min(tokens.len().saturating_sub(1));
            windows.push(tokens[start..=end].to_vec());
        }
    }
    windows
}

/// Per-category occurrence counts normalized by the token total. With
/// `per_characters` the denominator is the summed token character count
/// instead.
pub fn emotion_profile(
    tokens: &[String],
    lexicon: &EmotionLexicon,
    per_characters: bool,
) -> [f64; 10] {
    let mut counts = [0.0f64; 10];
    if tokens.is_empty() {
        return counts;
    }
    for token in tokens {
        let mask = lexicon.categories_of(token);
        for (c, count) in counts.iter_mut().enumerate() {
            if mask & (1 << c) != 0 {
                *count += 1.0;
            }
        }
    }
    let denom = if per_characters {
        tokens.iter().map(|t| t.chars().count()).sum::<usize>() as f64
    } else {
        tokens.len() as f64
    };
    for count in &mut counts {
        *count /= denom;
    }
    counts
}

/// Top-k terms by total corpus frequency; ties break lexicographically.
pub fn build_vocab(corpus: &[Vec<String>], k: usize) -> Vec<String> {
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for doc in corpus {
        for token in doc {
            *freq.entry(token).or_insert(0) += 1;
        }
    }
    let mut terms: Vec<(&str, usize)> = freq.into_iter().collect();
    terms.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    terms.truncate(k);
    terms.into_iter().map(|(t, _)| t.to_string()).collect()
}

/// Presence vector over a vocabulary; with `count_mode` the components
/// hold occurrence counts instead of indicators.
pub fn vectorize(tokens: &[String], vocab: &[String], count_mode: bool) -> Vec<f64> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for token in tokens {
        *counts.entry(token).or_insert(0) += 1;
    }
    vocab
        .iter()
        .map(|term| {
            let c = counts.get(term.as_str()).copied().unwrap_or(0);
            if count_mode {
                c as f64
            } else {
                (c > 0) as u8 as f64
            }
        })
        .collect()
}
