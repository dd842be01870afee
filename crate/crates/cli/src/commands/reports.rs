//! The report commands: compare, cv, importance, plot-data, extremes.

use std::collections::{BTreeSet, HashMap};

use vidframing::colorfeat::{format_sig6, visual_csv_columns};
use vidframing::ingest::Label;
use vidframing::learn::{kfold_cv, permutation_importance, CvReport, ImportanceMetric};
use vidframing::stats::{self, comparison_csv};

use crate::config::PipelineConfig;
use crate::table::FeatureTable;
use crate::text::build_matrix;
use crate::CliError;

use super::{manifest, model_spec, write_output};

fn load_table(config: &PipelineConfig) -> Result<FeatureTable, CliError> {
    FeatureTable::load(&config.out_dir.join("features.csv"))
}

fn label_map(config: &PipelineConfig) -> Result<HashMap<String, Label>, CliError> {
    Ok(manifest(config)?
        .into_iter()
        .map(|r| (r.id, r.label))
        .collect())
}

fn parse_group_label(s: &str, labels: &HashMap<String, Label>) -> Result<Label, CliError> {
    Label::parse(s).ok_or_else(|| {
        let available: BTreeSet<&str> = labels.values().map(|l| l.as_str()).collect();
        CliError::config(format!(
            "unknown label {s:?}; labels in this corpus: {}",
            available.into_iter().collect::<Vec<_>>().join(", ")
        ))
    })
}

/// Welch/BH comparison of the visual feature distributions of two label
/// groups.
pub fn compare(
    config: &PipelineConfig,
    group_a: &str,
    group_b: &str,
    segment: &str,
) -> Result<(), CliError> {
    let labels = label_map(config)?;
    let label_a = parse_group_label(group_a, &labels)?;
    let label_b = parse_group_label(group_b, &labels)?;
    let table = load_table(config)?;
    let columns = visual_csv_columns();
    let col_idx: Vec<usize> = columns
        .iter()
        .map(|c| table.column_index(c))
        .collect::<Result<_, _>>()?;
    let rows = table.segment_rows(segment);
    if rows.is_empty() {
        return Err(CliError::config(format!("no feature rows for segment {segment:?}")));
    }
    let collect_group = |label: Label| -> Vec<Vec<Option<f64>>> {
        rows.iter()
            .filter(|r| labels.get(&r.id) == Some(&label))
            .map(|r| col_idx.iter().map(|&i| r.values[i]).collect())
            .collect()
    };
    let a = collect_group(label_a);
    let b = collect_group(label_b);
    for (label, group) in [(label_a, &a), (label_b, &b)] {
        if group.is_empty() {
            let available: BTreeSet<&str> = rows
                .iter()
                .filter_map(|r| labels.get(&r.id).map(|l| l.as_str()))
                .collect();
            return Err(CliError::config(format!(
                "no {} rows in segment {segment:?}; labels present: {}",
                label.as_str(),
                available.into_iter().collect::<Vec<_>>().join(", ")
            )));
        }
    }
    let results = stats::compare_groups(&columns, &a, &b, config.q)
        .map_err(|e| CliError::partial(format!("comparison failed: {e}")))?;
    let name = format!("compare_{}_vs_{}_{}.csv", label_a.as_str(), label_b.as_str(), segment);
    let path = write_output(config, &name, &comparison_csv(&results))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn sanitize_set(set_expr: &str) -> String {
    set_expr.replace('+', "_")
}

/// Stratified k-fold CV over one feature set; writes a one-row CSV.
pub fn cv(
    config: &PipelineConfig,
    model: Option<&str>,
    set_expr: &str,
    segment: &str,
) -> Result<(), CliError> {
    let seed = config.require_seed()?;
    let records = manifest(config)?;
    let table = load_table(config)?;
    let (x, y) = build_matrix(config, &records, &table, set_expr, segment)?;
    let (kind, spec) = model_spec(config, model, seed)?;
    let mut report = kfold_cv(&x, &y, config.model.folds, &spec, seed)
        .map_err(|e| CliError::partial(format!("cross-validation failed: {e}")))?;
    report.features = set_expr.to_string();
    let content = format!("{}\n{}\n", CvReport::csv_header(), report.csv_row());
    let name = format!("cv_{kind}_{}.csv", sanitize_set(set_expr));
    let path = write_output(config, &name, &content)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

/// Permutation importance of a model trained on all labeled rows.
pub fn importance(
    config: &PipelineConfig,
    model: Option<&str>,
    set_expr: &str,
    segment: &str,
) -> Result<(), CliError> {
    let seed = config.require_seed()?;
    let records = manifest(config)?;
    let table = load_table(config)?;
    let (x, y) = build_matrix(config, &records, &table, set_expr, segment)?;
    let (kind, spec) = model_spec(config, model, seed)?;
    let trained = spec
        .train(&x, &y)
        .map_err(|e| CliError::partial(format!("training failed: {e}")))?;
    let report = permutation_importance(
        trained.as_ref(),
        &x,
        &y,
        config.model.importance_repeats,
        seed,
        ImportanceMetric::Accuracy,
    );
    let name = format!("importance_{kind}_{}.csv", sanitize_set(set_expr));
    let path = write_output(config, &name, &report.csv())?;
    log::info!("wrote {}", path.display());
    Ok(())
}

/// Freedman–Diaconis bin count over pooled values; at least 1, capped
/// so degenerate IQRs stay plottable.
fn fd_bins(sorted: &[f64]) -> usize {
    let n = sorted.len();
    let quantile = |q: f64| -> f64 {
        let pos = q * (n - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    };
    let iqr = quantile(0.75) - quantile(0.25);
    let range = sorted[n - 1] - sorted[0];
    if iqr <= 0.0 || range <= 0.0 {
        return 1;
    }
    let h = 2.0 * iqr / (n as f64).cbrt();
    ((range / h).ceil() as usize).clamp(1, 512)
}

/// Per-group density over Freedman–Diaconis bins of the pooled range.
pub fn plot_data(config: &PipelineConfig, feature: &str, segment: &str) -> Result<(), CliError> {
    let labels = label_map(config)?;
    let table = load_table(config)?;
    let col = table.column_index(feature)?;
    let rows = table.segment_rows(segment);
    let mut by_group: HashMap<&str, Vec<f64>> = HashMap::new();
    let mut pooled: Vec<f64> = Vec::new();
    for row in &rows {
        let Some(v) = row.values[col] else { continue };
        let Some(label) = labels.get(&row.id) else {
            continue;
        };
        by_group.entry(label.as_str()).or_default().push(v);
        pooled.push(v);
    }
    if pooled.is_empty() {
        return Err(CliError::config(format!(
            "no values for feature {feature:?} in segment {segment:?}"
        )));
    }
    pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let bins = fd_bins(&pooled);
    let min = pooled[0];
    let range = pooled[pooled.len() - 1] - min;
    // a flat feature still gets one unit-width bin so densities stay finite
    let width = if range > 0.0 { range / bins as f64 } else { 1.0 };

    let mut groups: Vec<&str> = by_group.keys().copied().collect();
    groups.sort();
    let mut out = String::from("group,bin_center,density\n");
    for group in groups {
        let values = &by_group[group];
        let mut counts = vec![0usize; bins];
        for &v in values {
            let i = (((v - min) / width) as usize).min(bins - 1);
            counts[i] += 1;
        }
        let n = values.len() as f64;
        for (i, &c) in counts.iter().enumerate() {
            let center = min + (i as f64 + 0.5) * width;
            let density = c as f64 / (n * width);
            out.push_str(&format!("{group},{},{}\n", format_sig6(center), format_sig6(density)));
        }
    }
    let path = write_output(config, &format!("plot_{feature}_{segment}.csv"), &out)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

/// Top/bottom-k videos by one feature, ties broken by id.
pub fn extremes(
    config: &PipelineConfig,
    feature: &str,
    segment: &str,
    k: usize,
) -> Result<(), CliError> {
    let records = manifest(config)?;
    let sources: HashMap<&str, String> = records
        .iter()
        .map(|r| {
            let source = r
                .video_path
                .as_ref()
                .map(|p| p.display().to_string())
                .or_else(|| r.frames_dir.as_ref().map(|p| p.display().to_string()))
                .or_else(|| r.thumbnail.clone())
                .unwrap_or_default();
            (r.id.as_str(), source)
        })
        .collect();
    let table = load_table(config)?;
    let col = table.column_index(feature)?;
    let mut scored: Vec<(&str, f64)> = table
        .segment_rows(segment)
        .into_iter()
        .filter_map(|r| r.values[col].map(|v| (r.id.as_str(), v)))
        .collect();
    scored.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(b.0)));
    let k = if k > scored.len() {
        log::warn!("k = {k} exceeds {} scored videos; clamping", scored.len());
        scored.len()
    } else {
        k
    };
    let mut out = String::from("end,rank,id,value,source\n");
    let mut push = |end: &str, rank: usize, id: &str, value: f64| {
        let source = sources.get(id).cloned().unwrap_or_default();
        out.push_str(&format!("{end},{rank},{id},{},{source}\n", format_sig6(value)));
    };
    for (rank, (id, value)) in scored.iter().take(k).enumerate() {
        push("bottom", rank + 1, id, *value);
    }
    let mut top: Vec<(&str, f64)> = scored.clone();
    top.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(b.0)));
    for (rank, (id, value)) in top.iter().take(k).enumerate() {
        push("top", rank + 1, id, *value);
    }
    let path = write_output(config, &format!("extremes_{feature}_{segment}.csv"), &out)?;
    log::info!("wrote {}", path.display());
    Ok(())
}
