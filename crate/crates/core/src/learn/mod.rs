//! Tabular classifiers and their evaluation harness: random forest,
//! multilayer perceptron, stratified k-fold cross-validation with
//! precision/recall confidence intervals, and permutation feature
//! importance.

pub mod forest;
pub mod mlp;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use forest::{train_forest, ForestModel, ForestParams};
pub use mlp::{train_mlp, MlpModel, MlpParams};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("labels contain a single class only")]
    SingleClass,
    #[error("feature matrix has no columns")]
    NoFeatures,
    #[error("feature matrix contains a non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),
    #[error("row {row} has {got} values, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },
    #[error("feature dimension mismatch: model expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("class {class} has {count} samples, fewer than k = {k}")]
    ClassSmallerThanK { class: u8, count: usize, k: usize },
    #[error("need at least 2 samples")]
    TooFewSamples,
}

/// n × p samples with named columns and per-row ids.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub column_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub row_ids: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(
        column_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        row_ids: Vec<String>,
    ) -> Result<FeatureMatrix, LearnError> {
        if column_names.is_empty() {
            return Err(LearnError::NoFeatures);
        }
        let mut seen = std::collections::HashSet::new();
        for name in &column_names {
            if !seen.insert(name) {
                return Err(LearnError::DuplicateColumn(name.clone()));
            }
        }
        for (ri, row) in rows.iter().enumerate() {
            if row.len() != column_names.len() {
                return Err(LearnError::RaggedRow {
                    row: ri,
                    got: row.len(),
                    expected: column_names.len(),
                });
            }
            for (ci, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(LearnError::NonFinite { row: ri, col: ci });
                }
            }
        }
        Ok(FeatureMatrix {
            column_names,
            rows,
            row_ids,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    fn subset(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            column_names: self.column_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            row_ids: indices
                .iter()
                .map(|&i| self.row_ids.get(i).cloned().unwrap_or_default())
                .collect(),
        }
    }
}

/// Anything that maps a feature row to a binary class.
pub trait Classifier {
    fn predict_class(&self, row: &[f64]) -> u8;
}

/// Which model to train inside cross-validation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ModelSpec {
    Forest(ForestParams),
    Mlp(MlpParams),
}

impl ModelSpec {
    pub fn descriptor(&self) -> &'static str {
        match self {
            ModelSpec::Forest(_) => "rf",
            ModelSpec::Mlp(_) => "mlp",
        }
    }

    pub fn with_seed(&self, seed: u64) -> ModelSpec {
        match self {
            ModelSpec::Forest(p) => {
                let mut p = p.clone();
                p.seed = seed;
                ModelSpec::Forest(p)
            }
            ModelSpec::Mlp(p) => {
                let mut p = p.clone();
                p.seed = seed;
                ModelSpec::Mlp(p)
            }
        }
    }

    pub fn train(&self, x: &FeatureMatrix, y: &[u8]) -> Result<Box<dyn Classifier>, LearnError> {
        match self {
            ModelSpec::Forest(params) => Ok(Box::new(train_forest(x, y, params)?)),
            ModelSpec::Mlp(params) => Ok(Box::new(train_mlp(x, y, params)?)),
        }
    }
}

/// Cross-validated precision/recall with 95% intervals (mean ± 1.96·SE
/// across folds).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvReport {
    pub model: String,
    pub features: String,
    pub k: usize,
    pub fold_precision: Vec<f64>,
    pub fold_recall: Vec<f64>,
    pub precision_mean: f64,
    pub precision_ci: f64,
    pub recall_mean: f64,
    pub recall_ci: f64,
}

impl CvReport {
    pub fn csv_header() -> &'static str {
        "model,features,precision_mean,precision_ci,recall_mean,recall_ci"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.4},{:.4},{:.4},{:.4}",
            self.model,
            self.features,
            self.precision_mean,
            self.precision_ci,
            self.recall_mean,
            self.recall_ci
        )
    }
}

/// Permutation importance of every feature column.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub baseline: f64,
    /// Per column: (name, mean score drop, sd over repeats).
    pub features: Vec<(String, f64, f64)>,
}

impl ImportanceReport {
    /// Rows sorted by descending mean drop, ties by name.
    pub fn ranked(&self) -> Vec<(String, f64, f64)> {
        let mut rows = self.features.clone();
        rows.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        rows
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("feature,mean_drop,sd,baseline\n");
        for (name, drop, sd) in self.ranked() {
            out.push_str(&format!("{name},{drop:.6},{sd:.6},{:.6}\n", self.baseline));
        }
        out
    }
}

/// Precision and recall of the positive class. Empty denominators score
/// 1.0 with a warning, so a fold with no positive predictions does not
/// zero out the average artificially.
pub fn precision_recall(y_true: &[u8], y_pred: &[u8]) -> (f64, f64) {
    assert_eq!(y_true.len(), y_pred.len());
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => tp += 1,
            (0, 1) => fp += 1,
            (1, 0) => fn_ += 1,
            _ => {}
        }
    }
    let precision = if tp + fp == 0 {
        log::warn!("no positive predictions; precision defaults to 1.0");
        1.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        log::warn!("no positive ground truth; recall defaults to 1.0");
        1.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    (precision, recall)
}

/// Stratified fold assignment: per class, shuffle with the seeded RNG
/// then deal round-robin. Fold sizes per class differ by at most one.
pub fn stratified_folds(y: &[u8], k: usize, seed: u64) -> Result<Vec<usize>, LearnError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; y.len()];
    for class in [0u8, 1u8] {
        let mut indices: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if indices.is_empty() {
            return Err(LearnError::SingleClass);
        }
        if indices.len() < k {
            return Err(LearnError::ClassSmallerThanK {
                class,
                count: indices.len(),
                k,
            });
        }
        indices.shuffle(&mut rng);
        for (pos, &i) in indices.iter().enumerate() {
            assignment[i] = pos % k;
        }
    }
    Ok(assignment)
}

/// Stratified k-fold cross-validation. Each fold trains a fresh model
/// with a fold-derived seed and scores the held-out part.
pub fn kfold_cv(
    x: &FeatureMatrix,
    y: &[u8],
    k: usize,
    model_spec: &ModelSpec,
    seed: u64,
) -> Result<CvReport, LearnError> {
    assert_eq!(x.n_rows(), y.len());
    let folds = stratified_folds(y, k, seed)?;
    let mut fold_precision = Vec::with_capacity(k);
    let mut fold_recall = Vec::with_capacity(k);
    for fold in 0..k {
        let train_idx: Vec<usize> = (0..y.len()).filter(|&i| folds[i] != fold).collect();
        let test_idx: Vec<usize> = (0..y.len()).filter(|&i| folds[i] == fold).collect();
        let x_train = x.subset(&train_idx);
        let y_train: Vec<u8> = train_idx.iter().map(|&i| y[i]).collect();
        let spec = model_spec.with_seed(seed.wrapping_add(fold as u64).wrapping_mul(0x9e3779b9));
        let model = spec.train(&x_train, &y_train)?;
        let y_test: Vec<u8> = test_idx.iter().map(|&i| y[i]).collect();
        let y_pred: Vec<u8> = test_idx
            .iter()
            .map(|&i| model.predict_class(&x.rows[i]))
            .collect();
        let (p, r) = precision_recall(&y_test, &y_pred);
        fold_precision.push(p);
        fold_recall.push(r);
    }
    let (p_mean, p_ci) = mean_ci(&fold_precision);
    let (r_mean, r_ci) = mean_ci(&fold_recall);
    Ok(CvReport {
        model: model_spec.descriptor().to_string(),
        features: String::new(),
        k,
        fold_precision,
        fold_recall,
        precision_mean: p_mean,
        precision_ci: p_ci,
        recall_mean: r_mean,
        recall_ci: r_ci,
    })
}

fn mean_ci(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var.sqrt() / n.sqrt()))
}

/// Score metric for permutation importance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ImportanceMetric {
    #[default]
    Accuracy,
    F1,
}

fn score(metric: ImportanceMetric, y_true: &[u8], y_pred: &[u8]) -> f64 {
    match metric {
        ImportanceMetric::Accuracy => {
            y_true.iter().zip(y_pred).filter(|(t, p)| t == p).count() as f64 / y_true.len() as f64
        }
        ImportanceMetric::F1 => {
            let (p, r) = precision_recall(y_true, y_pred);
            if p + r == 0.0 {
                0.0
            } else {
                2.0 * p * r / (p + r)
            }
        }
    }
}

/// Mean and sd of the score drop when each feature column is shuffled,
/// over `repeats` seeded shuffles. The input matrix is left untouched.
pub fn permutation_importance(
    model: &dyn Classifier,
    x: &FeatureMatrix,
    y: &[u8],
    repeats: usize,
    seed: u64,
    metric: ImportanceMetric,
) -> ImportanceReport {
    let predict_all = |rows: &[Vec<f64>]| -> Vec<u8> {
        rows.iter().map(|r| model.predict_class(r)).collect()
    };
    let baseline = score(metric, y, &predict_all(&x.rows));
    let n = x.n_rows();
    let mut features = Vec::with_capacity(x.n_cols());
    let mut working = x.rows.clone();
    for col in 0..x.n_cols() {
        let original: Vec<f64> = working.iter().map(|r| r[col]).collect();
        let mut drops = Vec::with_capacity(repeats);
        for rep in 0..repeats {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ (col as u64) << 32 ^ rep as u64);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            for (i, &src) in perm.iter().enumerate() {
                working[i][col] = original[src];
            }
            drops.push(baseline - score(metric, y, &predict_all(&working)));
        }
        for (i, v) in original.into_iter().enumerate() {
            working[i][col] = v;
        }
        let mean = drops.iter().sum::<f64>() / repeats as f64;
        let sd = if repeats > 1 {
            (drops.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (repeats as f64 - 1.0))
                .sqrt()
        } else {
            0.0
        };
        features.push((x.column_names[col].clone(), mean, sd));
    }
    ImportanceReport { baseline, features }
}
