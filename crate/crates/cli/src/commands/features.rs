//! The `features` command: one CSV row per (video, segment).

use std::collections::HashMap;
use std::time::Duration;

use vidframing::colorfeat::{
    aggregate_video, features_for_frames, visual_csv_columns, visual_csv_values, ColorOptions,
};
use vidframing::ingest::{self, Frame, Segment, VideoRecord};
use vidframing::par;
use vidframing::textfeat::{emotion_profile, train_pvdm, EmotionLexicon, PvdmParams};

use crate::config::PipelineConfig;
use crate::table::{FeatureRow, FeatureTable};
use crate::text::load_tokens;
use crate::CliError;

use super::{frames_source, manifest, write_output};

struct VisualCells {
    n_frames: Option<usize>,
    values: Vec<Option<f64>>,
}

fn empty_visual() -> VisualCells {
    VisualCells {
        n_frames: None,
        values: vec![None; visual_csv_columns().len()],
    }
}

fn analyze_frames(frames: &[Frame], segment: Segment, rate: f64, opts: &ColorOptions) -> VisualCells {
    let selected = match ingest::select_segment(frames, segment, rate) {
        Ok(s) => s,
        Err(_) => return empty_visual(),
    };
    let feats = features_for_frames(&selected, opts);
    match aggregate_video(&feats, segment) {
        Ok(vf) => VisualCells {
            n_frames: Some(vf.n_frames),
            values: visual_csv_values(&vf),
        },
        Err(_) => empty_visual(),
    }
}

/// Resolve the thumbnail still for a record, downloading it if the
/// manifest gives a URL.
fn thumbnail_frame(config: &PipelineConfig, record: &VideoRecord) -> Option<Frame> {
    let source = record.thumbnail.as_ref()?;
    let path = if source.starts_with("http://") || source.starts_with("https://") {
        let dir = config.out_dir.join("thumbnails");
        if let Err(e) = std::fs::create_dir_all(&dir) {
            log::warn!("video {}: cannot create {}: {e}", record.id, dir.display());
            return None;
        }
        let target = dir.join(format!("{}.img", record.id));
        match ingest::fetch_thumbnail(source, &target, Duration::from_secs(30)) {
            Ok(p) => p,
            Err(e) => {
                log::warn!("video {}: thumbnail fetch failed: {e}", record.id);
                return None;
            }
        }
    } else {
        let p = std::path::PathBuf::from(source);
        if p.is_relative() {
            config
                .manifest
                .parent()
                .map(|b| b.join(&p))
                .unwrap_or(p)
        } else {
            p
        }
    };
    match ingest::decode_image(&path) {
        Ok(frame) => Some(frame),
        Err(e) => {
            log::warn!("video {}: cannot decode thumbnail {}: {e}", record.id, path.display());
            None
        }
    }
}

/// Per-record visual cells for every configured segment, fanned out
/// over the worker pool in manifest order.
fn visual_rows(
    config: &PipelineConfig,
    records: &[VideoRecord],
    segments: &[Segment],
) -> Vec<Vec<VisualCells>> {
    let opts = ColorOptions::default();
    par::map_ordered(records, |record| {
        let frames = frames_source(config, record).and_then(|dir| {
            match ingest::load_frames_dir(&dir, config.frame_rate) {
                Ok(frames) if !frames.is_empty() => Some(frames),
                Ok(_) => None,
                Err(e) => {
                    log::warn!("video {}: cannot load frames from {}: {e}", record.id, dir.display());
                    None
                }
            }
        });
        let thumb = if segments.contains(&Segment::Thumbnail) {
            thumbnail_frame(config, record)
        } else {
            None
        };
        segments
            .iter()
            .map(|&segment| match segment {
                Segment::Thumbnail => match &thumb {
                    Some(frame) => {
                        analyze_frames(std::slice::from_ref(frame), segment, config.frame_rate, &opts)
                    }
                    None => {
                        log::warn!("video {}: no thumbnail available", record.id);
                        empty_visual()
                    }
                },
                _ => match &frames {
                    Some(frames) => analyze_frames(frames, segment, config.frame_rate, &opts),
                    None => {
                        log::warn!("video {}: no frames for segment {}", record.id, segment.name());
                        empty_visual()
                    }
                },
            })
            .collect()
    })
}

pub fn features(config: &PipelineConfig) -> Result<(), CliError> {
    let seed = config.require_seed()?;
    let records = manifest(config)?;
    let segments = config.parsed_segments();

    let lexicon = match &config.lexicon {
        Some(path) => Some(
            EmotionLexicon::load(path).map_err(|e| CliError::config(format!("lexicon: {e}")))?,
        ),
        None => None,
    };
    let tokens = load_tokens(config, &records)?;

    // one embedding model over every transcript, then per-video vectors
    let emb_dim = config.text.embedding_dim;
    let embeddings: HashMap<String, Vec<f64>> = if tokens.is_empty() {
        HashMap::new()
    } else {
        let corpus: Vec<Vec<String>> = tokens.iter().map(|(_, t)| t.clone()).collect();
        let params = PvdmParams {
            dim: emb_dim,
            epochs: config.text.embedding_epochs,
            seed,
            ..PvdmParams::default()
        };
        match train_pvdm(&corpus, &params) {
            Ok(model) => tokens
                .iter()
                .zip(&model.doc_vecs)
                .map(|((id, _), v)| (id.clone(), v.clone()))
                .collect(),
            Err(e) => {
                log::warn!("embedding training skipped: {e}");
                HashMap::new()
            }
        }
    };
    let token_map: HashMap<&str, &Vec<String>> =
        tokens.iter().map(|(id, t)| (id.as_str(), t)).collect();

    let visual = visual_rows(config, &records, &segments);

    let mut columns = visual_csv_columns();
    for cat in vidframing::textfeat::EMOTION_CATEGORIES {
        columns.push(format!("emo_{cat}"));
    }
    for i in 0..emb_dim {
        columns.push(format!("emb_{i}"));
    }

    let mut rows = Vec::new();
    let mut analyzable = false;
    for (record, per_segment) in records.iter().zip(visual) {
        let emo: Vec<Option<f64>> = match (&lexicon, token_map.get(record.id.as_str())) {
            (Some(lex), Some(toks)) => emotion_profile(toks, lex, false)
                .iter()
                .map(|&v| Some(v))
                .collect(),
            _ => {
                if lexicon.is_some() {
                    log::warn!("video {}: no transcript, emotion cells empty", record.id);
                }
                vec![None; 10]
            }
        };
        let emb: Vec<Option<f64>> = match embeddings.get(&record.id) {
            Some(v) => v.iter().map(|&x| Some(x)).collect(),
            None => vec![None; emb_dim],
        };
        for (segment, cells) in segments.iter().zip(per_segment) {
            let mut values = cells.values;
            values.extend(emo.iter().copied());
            values.extend(emb.iter().copied());
            if values.iter().any(|v| v.is_some()) {
                analyzable = true;
            }
            rows.push(FeatureRow {
                id: record.id.clone(),
                segment: segment.name(),
                n_frames: cells.n_frames,
                values,
            });
        }
    }
    if !analyzable {
        return Err(CliError::partial("no analyzable videos in the manifest"));
    }

    let table = FeatureTable { columns, rows };
    let path = write_output(config, "features.csv", &table.to_csv())?;
    log::info!("wrote {}", path.display());
    Ok(())
}
