//! Subcommand implementations.

mod features;
mod reports;

pub use features::features;
pub use reports::{compare, cv, extremes, importance, plot_data};

use std::path::{Path, PathBuf};

use vidframing::ingest::{self, VideoRecord};
use vidframing::learn::{ForestParams, MlpParams, ModelSpec};

use crate::config::PipelineConfig;
use crate::CliError;

/// Load the manifest and anchor its relative paths against the manifest
/// file's directory.
pub fn manifest(config: &PipelineConfig) -> Result<Vec<VideoRecord>, CliError> {
    let mut records = ingest::load_manifest(&config.manifest)
        .map_err(|e| CliError::config(format!("manifest: {e}")))?;
    let base = config
        .manifest
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    for r in &mut records {
        for p in [&mut r.video_path, &mut r.frames_dir, &mut r.transcript_path] {
            if let Some(p) = p {
                if p.is_relative() {
                    *p = base.join(&p);
                }
            }
        }
    }
    Ok(records)
}

/// Where extracted frames for a video live under the output directory.
pub fn frames_out_dir(config: &PipelineConfig, id: &str) -> PathBuf {
    config.out_dir.join("frames").join(id)
}

fn dir_has_files(dir: &Path) -> bool {
    std::fs::read_dir(dir)
        .map(|mut it| it.any(|e| e.map(|e| e.path().is_file()).unwrap_or(false)))
        .unwrap_or(false)
}

/// The frame directory to analyze for a record: an explicit manifest
/// `frames_dir` wins, otherwise a populated extraction directory.
pub fn frames_source(config: &PipelineConfig, record: &VideoRecord) -> Option<PathBuf> {
    if let Some(dir) = &record.frames_dir {
        return Some(dir.clone());
    }
    let extracted = frames_out_dir(config, &record.id);
    if dir_has_files(&extracted) {
        return Some(extracted);
    }
    None
}

/// Assemble a model spec from config plus an optional --model override.
pub fn model_spec(
    config: &PipelineConfig,
    kind: Option<&str>,
    seed: u64,
) -> Result<(String, ModelSpec), CliError> {
    let kind = kind.unwrap_or(&config.model.kind);
    let spec = match kind {
        "rf" => ModelSpec::Forest(ForestParams {
            n_trees: config.model.n_trees,
            mtry: config.model.mtry,
            min_leaf: config.model.min_leaf,
            seed,
        }),
        "mlp" => ModelSpec::Mlp(MlpParams {
            hidden: config.model.hidden.clone(),
            lr: config.model.learning_rate,
            batch: config.model.batch,
            epochs: config.model.epochs,
            patience: config.model.patience,
            seed,
            threshold: 0.5,
        }),
        other => {
            return Err(CliError::config(format!(
                "unknown model {other:?}; expected rf or mlp"
            )))
        }
    };
    Ok((kind.to_string(), spec))
}

pub fn write_output(config: &PipelineConfig, name: &str, content: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&config.out_dir)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", config.out_dir.display())))?;
    let path = config.out_dir.join(name);
    std::fs::write(&path, content)
        .map_err(|e| CliError::partial(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Run the decoder for every record that has a video but no frames yet.
pub fn extract(config: &PipelineConfig) -> Result<(), CliError> {
    let records = manifest(config)?;
    let mut failed: Vec<String> = Vec::new();
    for record in &records {
        if record.video_path.is_none() || record.frames_dir.is_some() {
            continue;
        }
        let dir = frames_out_dir(config, &record.id);
        if dir_has_files(&dir) {
            log::info!("video {}: frames already extracted, skipping", record.id);
            continue;
        }
        match ingest::extract_frames(record, config.frame_rate, &dir, &config.decoder_cmd) {
            Ok(n) => log::info!("video {}: extracted {n} frames", record.id),
            Err(e) => {
                log::error!(
                    "video {}: decoder failed ({e}); template was {:?}",
                    record.id,
                    config.decoder_cmd
                );
                failed.push(record.id.clone());
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::partial(format!(
            "extraction failed for {} video(s): {}",
            failed.len(),
            failed.join(", ")
        )))
    }
}
