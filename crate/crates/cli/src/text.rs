//! Transcript loading and feature-set assembly shared by the report
//! commands.

use std::collections::{HashMap, HashSet};

use vidframing::ingest::{Label, VideoRecord};
use vidframing::learn::FeatureMatrix;
use vidframing::textfeat::{
    build_vocab, chunk_transcript, load_stopwords, preprocess, vectorize,
};

use crate::config::PipelineConfig;
use crate::table::FeatureTable;
use crate::CliError;

/// Preprocessed tokens per video id, in manifest order. Videos without
/// a readable transcript are absent (with a warning).
pub fn load_tokens(
    config: &PipelineConfig,
    records: &[VideoRecord],
) -> Result<Vec<(String, Vec<String>)>, CliError> {
    let stopwords: HashSet<String> = match &config.stopwords {
        Some(path) => load_stopwords(path)
            .map_err(|e| CliError::config(format!("stopwords: {e}")))?,
        None => HashSet::new(),
    };
    let keywords: HashSet<String> = config
        .text
        .chunk_keywords
        .iter()
        .map(|k| k.to_lowercase())
        .collect();
    let mut out = Vec::new();
    for record in records {
        let Some(path) = &record.transcript_path else {
            continue;
        };
        let raw = match std::fs::read_to_string(path) {
            Ok(raw) => raw,
            Err(e) => {
                log::warn!("video {}: cannot read transcript {}: {e}", record.id, path.display());
                continue;
            }
        };
        let mut tokens = preprocess(&raw, &stopwords);
        if !keywords.is_empty() {
            tokens = chunk_transcript(
                &tokens,
                &keywords,
                config.text.chunk_before,
                config.text.chunk_after,
            )
            .into_iter()
            .flatten()
            .collect();
        }
        if tokens.is_empty() {
            log::warn!("video {}: transcript has no usable tokens", record.id);
            continue;
        }
        out.push((record.id.clone(), tokens));
    }
    Ok(out)
}

pub const FEATURE_SETS: [&str; 4] = ["visual20", "emotions10", "wordcount10000", "embedding200"];

/// One component of a feature-set union, resolved to value sources.
enum Part {
    /// Columns read straight from the feature CSV.
    Csv(Vec<usize>),
    /// Per-id term vectors computed from the transcripts.
    Wordcount(HashMap<String, Vec<f64>>),
}

/// Build the model matrix and labels for `cv`/`importance`.
///
/// `set_expr` is one of [`FEATURE_SETS`] or a '+'-union of them. Rows
/// come from the feature table's `segment` rows whose manifest label is
/// conspiracy (1) or debunking (0); rows missing any selected cell are
/// dropped with a warning.
pub fn build_matrix(
    config: &PipelineConfig,
    records: &[VideoRecord],
    table: &FeatureTable,
    set_expr: &str,
    segment: &str,
) -> Result<(FeatureMatrix, Vec<u8>), CliError> {
    let labels: HashMap<&str, Label> = records
        .iter()
        .map(|r| (r.id.as_str(), r.label))
        .collect();
    let rows = table.segment_rows(segment);
    if rows.is_empty() {
        return Err(CliError::config(format!(
            "no feature rows for segment {segment:?}"
        )));
    }

    let mut column_names: Vec<String> = Vec::new();
    let mut parts: Vec<Part> = Vec::new();
    for part in set_expr.split('+') {
        match part {
            "visual20" => {
                let mut cols = Vec::new();
                for name in vidframing::colorfeat::feature_vector_names() {
                    cols.push(table.column_index(&name)?);
                    column_names.push(name);
                }
                parts.push(Part::Csv(cols));
            }
            "emotions10" => {
                let cols = table.columns_with_prefix("emo_");
                if cols.is_empty() {
                    return Err(CliError::config(
                        "feature CSV has no emo_ columns; configure a lexicon and rerun features",
                    ));
                }
                column_names.extend(cols.iter().map(|&i| table.columns[i].clone()));
                parts.push(Part::Csv(cols));
            }
            "embedding200" => {
                let cols = table.columns_with_prefix("emb_");
                if cols.is_empty() {
                    return Err(CliError::config(
                        "feature CSV has no emb_ columns; rerun features with transcripts",
                    ));
                }
                column_names.extend(cols.iter().map(|&i| table.columns[i].clone()));
                parts.push(Part::Csv(cols));
            }
            "wordcount10000" => {
                let tokens = load_tokens(config, records)?;
                if tokens.is_empty() {
                    return Err(CliError::config(
                        "no transcripts available for wordcount10000",
                    ));
                }
                let corpus: Vec<Vec<String>> = tokens.iter().map(|(_, t)| t.clone()).collect();
                let vocab = build_vocab(&corpus, config.text.word_count_k);
                let vectors: HashMap<String, Vec<f64>> = tokens
                    .iter()
                    .map(|(id, t)| (id.clone(), vectorize(t, &vocab, config.text.count_mode)))
                    .collect();
                column_names.extend(vocab.iter().map(|term| format!("word_{term}")));
                parts.push(Part::Wordcount(vectors));
            }
            other => {
                return Err(CliError::config(format!(
                    "unknown feature set {other:?}; valid: {}",
                    FEATURE_SETS.join(", ")
                )));
            }
        }
    }

    let mut matrix_rows: Vec<Vec<f64>> = Vec::new();
    let mut row_ids: Vec<String> = Vec::new();
    let mut y: Vec<u8> = Vec::new();
    for row in rows {
        let class = match labels.get(row.id.as_str()) {
            Some(Label::Conspiracy) => 1u8,
            Some(Label::Debunking) => 0u8,
            _ => continue,
        };
        let mut values = Vec::with_capacity(column_names.len());
        let mut complete = true;
        'parts: for part in &parts {
            match part {
                Part::Csv(cols) => {
                    for &ci in cols {
                        match row.values[ci] {
                            Some(v) => values.push(v),
                            None => {
                                complete = false;
                                break 'parts;
                            }
                        }
                    }
                }
                Part::Wordcount(vectors) => match vectors.get(&row.id) {
                    Some(v) => values.extend_from_slice(v),
                    None => {
                        complete = false;
                        break 'parts;
                    }
                },
            }
        }
        if !complete {
            log::warn!("video {}: dropped from model matrix (missing cells)", row.id);
            continue;
        }
        matrix_rows.push(values);
        row_ids.push(row.id.clone());
        y.push(class);
    }
    if matrix_rows.is_empty() {
        return Err(CliError::partial(
            "no labeled, complete rows available for the model matrix",
        ));
    }
    let x = FeatureMatrix::new(column_names, matrix_rows, row_ids)
        .map_err(|e| CliError::config(format!("model matrix: {e}")))?;
    Ok((x, y))
}
