//! Multilayer perceptron: two ReLU hidden layers, logistic output,
//! binary cross-entropy loss, Adam updates over seeded mini-batches.
//! Feature standardization is part of the model so prediction is
//! self-contained.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Classifier, FeatureMatrix, LearnError};

pub const MLP_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: Vec<usize>,
    pub lr: f64,
    pub batch: usize,
    pub epochs: usize,
    /// Epochs without training-loss improvement before stopping.
    pub patience: usize,
    pub seed: u64,
    /// Probability cut for the positive class.
    pub threshold: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: vec![64, 64],
            lr: 1e-3,
            batch: 32,
            epochs: 200,
            patience: 20,
            seed: 0,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MlpModel {
    pub version: u32,
    /// Layer widths, input through output: [p, h1, h2, 1].
    pub sizes: Vec<usize>,
    /// Per layer, row-major (out × in).
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub feat_mean: Vec<f64>,
    pub feat_sd: Vec<f64>,
    pub params: MlpParams,
    /// Mean training loss per completed epoch.
    pub loss_history: Vec<f64>,
}

/// Per-layer gradients matching the model's weight/bias layout.
#[derive(Debug, Clone)]
pub struct MlpGradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl MlpModel {
    fn standardize(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(i, &v)| {
                if self.feat_sd[i] == 0.0 {
                    0.0
                } else {
                    (v - self.feat_mean[i]) / self.feat_sd[i]
                }
            })
            .collect()
    }

    /// Activations per layer for one standardized input; last entry is
    /// the sigmoid output.
    fn forward(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let n_layers = self.weights.len();
        let mut activations = vec![input.to_vec()];
        for l in 0..n_layers {
            let (n_out, n_in) = (self.sizes[l + 1], self.sizes[l]);
            let prev = &activations[l];
            let mut out = Vec::with_capacity(n_out);
            for j in 0..n_out {
                let mut z = self.biases[l][j];
                let row = &self.weights[l][j * n_in..(j + 1) * n_in];
                for (w, a) in row.iter().zip(prev) {
                    z += w * a;
                }
                out.push(if l + 1 == n_layers { sigmoid(z) } else { z.max(0.0) });
            }
            activations.push(out);
        }
        activations
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let input = self.standardize(row);
        *self.forward(&input).last().unwrap().first().unwrap()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("mlp serialization")
    }

    pub fn from_json(json: &str) -> Result<MlpModel, serde_json::Error> {
        serde_json::from_str(json)
    }
}

impl Classifier for MlpModel {
    fn predict_class(&self, row: &[f64]) -> u8 {
        (self.predict_proba(row) >= self.params.threshold) as u8
    }
}

/// Mean binary cross-entropy over a batch of raw feature rows.
pub fn mlp_loss(model: &MlpModel, batch_x: &[Vec<f64>], batch_y: &[u8]) -> f64 {
    let eps = 1e-12;
    let mut total = 0.0;
    for (row, &y) in batch_x.iter().zip(batch_y) {
        let p = model.predict_proba(row).clamp(eps, 1.0 - eps);
        total -= if y == 1 { p.ln() } else { (1.0 - p).ln() };
    }
    total / batch_x.len() as f64
}

/// Exact batch-mean gradients of the binary cross-entropy by reverse
/// accumulation.
pub fn mlp_gradients(model: &MlpModel, batch_x: &[Vec<f64>], batch_y: &[u8]) -> MlpGradients {
    let n_layers = model.weights.len();
    let mut grad_w: Vec<Vec<f64>> = model.weights.iter().map(|w| vec![0.0; w.len()]).collect();
    let mut grad_b: Vec<Vec<f64>> = model.biases.iter().map(|b| vec![0.0; b.len()]).collect();
    let scale = 1.0 / batch_x.len() as f64;

    for (row, &y) in batch_x.iter().zip(batch_y) {
        let input = model.standardize(row);
        let activations = model.forward(&input);
        // sigmoid + BCE collapses to (p - y) at the output pre-activation
        let mut delta: Vec<f64> = vec![activations[n_layers][0] - y as f64];
        for l in (0..n_layers).rev() {
            let n_in = model.sizes[l];
            let prev = &activations[l];
            for (j, &d) in delta.iter().enumerate() {
                grad_b[l][j] += scale * d;
                for (i, &a) in prev.iter().enumerate() {
                    grad_w[l][j * n_in + i] += scale * d * a;
                }
            }
            if l > 0 {
                let mut next_delta = vec![0.0; n_in];
                for (j, &d) in delta.iter().enumerate() {
                    let row_w = &model.weights[l][j * n_in..(j + 1) * n_in];
                    for (i, &w) in row_w.iter().enumerate() {
                        next_delta[i] += d * w;
                    }
                }
                // ReLU gate
                for (i, nd) in next_delta.iter_mut().enumerate() {
                    if activations[l][i] <= 0.0 {
                        *nd = 0.0;
                    }
                }
                delta = next_delta;
            }
        }
    }
    MlpGradients {
        weights: grad_w,
        biases: grad_b,
    }
}

/// Train with Adam over seeded shuffled mini-batches; stops early when
/// the epoch-mean training loss stops improving for `patience` epochs.
/// Deterministic given data, params and seed on a single thread.
pub fn train_mlp(x: &FeatureMatrix, y: &[u8], params: &MlpParams) -> Result<MlpModel, LearnError> {
    assert_eq!(x.n_rows(), y.len());
    if x.n_cols() == 0 {
        return Err(LearnError::NoFeatures);
    }
    if x.n_rows() < 2 {
        return Err(LearnError::TooFewSamples);
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(LearnError::SingleClass);
    }

    let p = x.n_cols();
    let n = x.n_rows();
    let mut feat_mean = vec![0.0; p];
    let mut feat_sd = vec![0.0; p];
    for c in 0..p {
        let column: Vec<f64> = x.rows.iter().map(|r| r[c]).collect();
        let mean = column.iter().sum::<f64>() / n as f64;
        let var = column.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        feat_mean[c] = mean;
        feat_sd[c] = var.sqrt();
    }

    let mut sizes = vec![p];
    sizes.extend(&params.hidden);
    sizes.push(1);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for l in 0..sizes.len() - 1 {
        let (n_in, n_out) = (sizes[l], sizes[l + 1]);
        let limit = (6.0 / (n_in + n_out) as f64).sqrt();
        weights.push(
            (0..n_in * n_out)
                .map(|_| rng.gen_range(-limit..limit))
                .collect::<Vec<f64>>(),
        );
        biases.push(vec![0.0; n_out]);
    }

    let mut model = MlpModel {
        version: MLP_FORMAT_VERSION,
        sizes,
        weights,
        biases,
        feat_mean,
        feat_sd,
        params: params.clone(),
        loss_history: Vec::new(),
    };

    // Adam state
    let mut m_w: Vec<Vec<f64>> = model.weights.iter().map(|w| vec![0.0; w.len()]).collect();
    let mut v_w = m_w.clone();
    let mut m_b: Vec<Vec<f64>> = model.biases.iter().map(|b| vec![0.0; b.len()]).collect();
    let mut v_b = m_b.clone();
    let (beta1, beta2, eps): (f64, f64, f64) = (0.9, 0.999, 1e-8);
    let mut step = 0u64;

    let batch_size = params.batch.max(1).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut best_loss = f64::INFINITY;
    let mut stale = 0usize;

    for _epoch in 0..params.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(batch_size) {
            let batch_x: Vec<Vec<f64>> = chunk.iter().map(|&i| x.rows[i].clone()).collect();
            let batch_y: Vec<u8> = chunk.iter().map(|&i| y[i]).collect();
            epoch_loss += mlp_loss(&model, &batch_x, &batch_y);
            batches += 1;
            let grads = mlp_gradients(&model, &batch_x, &batch_y);
            step += 1;
            let corr1 = 1.0 - beta1.powi(step as i32);
            let corr2 = 1.0 - beta2.powi(step as i32);
            for l in 0..model.weights.len() {
                for (i, g) in grads.weights[l].iter().enumerate() {
                    m_w[l][i] = beta1 * m_w[l][i] + (1.0 - beta1) * g;
                    v_w[l][i] = beta2 * v_w[l][i] + (1.0 - beta2) * g * g;
                    model.weights[l][i] -=
                        params.lr * (m_w[l][i] / corr1) / ((v_w[l][i] / corr2).sqrt() + eps);
                }
                for (i, g) in grads.biases[l].iter().enumerate() {
                    m_b[l][i] = beta1 * m_b[l][i] + (1.0 - beta1) * g;
                    v_b[l][i] = beta2 * v_b[l][i] + (1.0 - beta2) * g * g;
                    model.biases[l][i] -=
                        params.lr * (m_b[l][i] / corr1) / ((v_b[l][i] / corr2).sqrt() + eps);
                }
            }
        }
        let mean_loss = epoch_loss / batches as f64;
        model.loss_history.push(mean_loss);
        if mean_loss < best_loss - 1e-6 {
            best_loss = mean_loss;
            stale = 0;
        } else {
            stale += 1;
            if stale >= params.patience {
                break;
            }
        }
    }
    Ok(model)
}
