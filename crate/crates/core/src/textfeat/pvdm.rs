//! Distributed-memory paragraph vectors with negative sampling.
//!
//! The context representation for a position is the mean of the document
//! vector and the input vectors of the surrounding window; the target is
//! scored against one positive and `negative` noise words drawn from the
//! unigram^0.75 distribution. Training is single-threaded so a fixed seed
//! reproduces the run exactly.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TextFeatError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PvdmParams {
    pub dim: usize,
    pub window: usize,
    pub negative: usize,
    pub epochs: usize,
    pub min_count: usize,
    pub lr_start: f64,
    pub lr_min: f64,
    pub seed: u64,
}

impl Default for PvdmParams {
    fn default() -> PvdmParams {
        PvdmParams {
            dim: 200,
            window: 5,
            negative: 5,
            epochs: 20,
            min_count: 2,
            lr_start: 0.025,
            lr_min: 0.0001,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PvdmModel {
    pub params: PvdmParams,
    pub vocab: Vec<String>,
    /// Input (context) vectors, one per vocab term, row-major dim each.
    pub word_in: Vec<Vec<f64>>,
    /// Output (target) vectors, one per vocab term.
    pub word_out: Vec<Vec<f64>>,
    /// Trained document vectors, in corpus order.
    pub doc_vecs: Vec<Vec<f64>>,
    /// Mean negative-sampling loss per epoch.
    pub loss_history: Vec<f64>,
    /// Cumulative unigram^0.75 table for negative draws.
    noise_cdf: Vec<f64>,
}

impl PvdmModel {
    pub fn vocab_index(&self) -> HashMap<&str, usize> {
        self.vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("pvdm model serializes")
    }

    pub fn from_json(text: &str) -> Result<PvdmModel, serde_json::Error> {
        serde_json::from_str(text)
    }

    fn sample_negative(&self, rng: &mut ChaCha8Rng) -> usize {
        sample_cdf(&self.noise_cdf, rng)
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn sample_cdf(cdf: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen::<f64>() * cdf[cdf.len() - 1];
    match cdf.binary_search_by(|probe| probe.partial_cmp(&u).unwrap()) {
        Ok(i) => (i + 1).min(cdf.len() - 1),
        Err(i) => i,
    }
}

/// Gradients of the negative-sampling loss for one prediction step.
///
/// `ctx` holds the window's input vectors, `outs` the scored output
/// vectors with `labels[i]` 1.0 for the positive and 0.0 for noise.
/// `grad_input` applies identically to the document vector and each
/// context vector (they enter through the same mean).
pub struct StepGrads {
    pub loss: f64,
    pub grad_input: Vec<f64>,
    pub grad_outs: Vec<Vec<f64>>,
}

/// Loss and analytic gradients for h = (doc + Σ ctx) / (1 + |ctx|)
/// scored against each output vector with a logistic loss.
pub fn step_gradients(doc: &[f64], ctx: &[&[f64]], outs: &[&[f64]], labels: &[f64]) -> StepGrads {
    assert_eq!(outs.len(), labels.len());
    let dim = doc.len();
    let scale = 1.0 / (1.0 + ctx.len() as f64);
    let mut h = doc.to_vec();
    for c in ctx {
        for (hk, ck) in h.iter_mut().zip(c.iter()) {
            *hk += ck;
        }
    }
    for hk in &mut h {
        *hk *= scale;
    }

    let mut loss = 0.0;
    let mut grad_h = vec![0.0; dim];
    let mut grad_outs = Vec::with_capacity(outs.len());
    for (out, &label) in outs.iter().zip(labels) {
        let z: f64 = h.iter().zip(out.iter()).map(|(a, b)| a * b).sum();
        let p = sigmoid(z);
        // -[l ln p + (1-l) ln(1-p)], clamped away from 0
        let p_for_loss = if label > 0.5 { p } else { 1.0 - p };
        loss -= p_for_loss.max(1e-12).ln();
        let g = p - label;
        for k in 0..dim {
            grad_h[k] += g * out[k];
        }
        grad_outs.push(h.iter().map(|&hk| g * hk).collect());
    }
    let grad_input: Vec<f64> = grad_h.iter().map(|&g| g * scale).collect();
    StepGrads {
        loss,
        grad_input,
        grad_outs,
    }
}

/// Train document vectors over the corpus. Tokens below `min_count`
/// are dropped; the vocabulary orders by frequency then term.
pub fn train_pvdm(corpus: &[Vec<String>], params: &PvdmParams) -> Result<PvdmModel, TextFeatError> {
    if corpus.is_empty() {
        return Err(TextFeatError::EmptyCorpus);
    }
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for doc in corpus {
        for token in doc {
            *freq.entry(token).or_insert(0) += 1;
        }
    }
    let mut terms: Vec<(&str, usize)> = freq
        .into_iter()
        .filter(|&(_, n)| n >= params.min_count)
        .collect();
    terms.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    if terms.is_empty() {
        return Err(TextFeatError::EmptyVocabulary);
    }
    let vocab: Vec<String> = terms.iter().map(|(t, _)| t.to_string()).collect();
    let index: HashMap<&str, usize> = terms
        .iter()
        .enumerate()
        .map(|(i, &(t, _))| (t, i))
        .collect();

    let mut noise_cdf = Vec::with_capacity(vocab.len());
    let mut acc = 0.0;
    for &(_, n) in &terms {
        acc += (n as f64).powf(0.75);
        noise_cdf.push(acc);
    }

    let docs: Vec<Vec<usize>> = corpus
        .iter()
        .map(|doc| doc.iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .collect();

    let dim = params.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let init = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..dim).map(|_| (rng.gen::<f64>() - 0.5) / dim as f64).collect()
    };
    let word_in: Vec<Vec<f64>> = (0..vocab.len()).map(|_| init(&mut rng)).collect();
    let word_out: Vec<Vec<f64>> = (0..vocab.len()).map(|_| vec![0.0; dim]).collect();
    let doc_vecs: Vec<Vec<f64>> = (0..docs.len()).map(|_| init(&mut rng)).collect();

    let mut model = PvdmModel {
        params: params.clone(),
        vocab,
        word_in,
        word_out,
        doc_vecs,
        loss_history: Vec::with_capacity(params.epochs),
        noise_cdf,
    };

    let positions_per_epoch: usize = docs.iter().map(|d| d.len()).sum();
    if positions_per_epoch == 0 {
        // every token fell below min_count in every doc
        return Err(TextFeatError::EmptyVocabulary);
    }
    let total = (positions_per_epoch * params.epochs) as f64;
    let mut processed = 0usize;

    for _ in 0..params.epochs {
        let mut epoch_loss = 0.0;
        let mut epoch_steps = 0usize;
        for (d, doc) in docs.iter().enumerate() {
            for t in 0..doc.len() {
                let lr = params.lr_start
                    + (params.lr_min - params.lr_start) * processed as f64 / total;
                let lr = lr.max(params.lr_min);
                processed += 1;

                let target = doc[t];
                let start = t.saturating_sub(params.window);
                let end = (t + params.window).min(doc.len() - 1);
                let ctx_ids: Vec<usize> = (start..=end).filter(|&j| j != t).map(|j| doc[j]).collect();

                let mut out_ids = Vec::with_capacity(1 + params.negative);
                let mut labels = Vec::with_capacity(1 + params.negative);
                out_ids.push(target);
                labels.push(1.0);
                for _ in 0..params.negative {
                    let neg = model.sample_negative(&mut rng);
                    if neg == target {
                        continue;
                    }
                    out_ids.push(neg);
                    labels.push(0.0);
                }

                let ctx_vecs: Vec<&[f64]> =
                    ctx_ids.iter().map(|&i| model.word_in[i].as_slice()).collect();
                let out_vecs: Vec<&[f64]> =
                    out_ids.iter().map(|&i| model.word_out[i].as_slice()).collect();
                let grads = step_gradients(&model.doc_vecs[d], &ctx_vecs, &out_vecs, &labels);
                epoch_loss += grads.loss;
                epoch_steps += 1;

                for (oi, &o) in out_ids.iter().enumerate() {
                    for k in 0..dim {
                        model.word_out[o][k] -= lr * grads.grad_outs[oi][k];
                    }
                }
                for k in 0..dim {
                    model.doc_vecs[d][k] -= lr * grads.grad_input[k];
                }
                for &c in &ctx_ids {
                    for k in 0..dim {
                        model.word_in[c][k] -= lr * grads.grad_input[k];
                    }
                }
            }
        }
        model.loss_history.push(epoch_loss / epoch_steps as f64);
    }
    Ok(model)
}

/// Infer a vector for an unseen document against frozen word vectors.
/// All-out-of-vocabulary input yields the zero vector with a warning.
pub fn infer_pvdm(model: &PvdmModel, tokens: &[String], steps: usize, seed: u64) -> Vec<f64> {
    let index = model.vocab_index();
    let doc: Vec<usize> = tokens
        .iter()
        .filter_map(|t| index.get(t.as_str()).copied())
        .collect();
    let dim = model.params.dim;
    if doc.is_empty() {
        log::warn!("infer_pvdm: no in-vocabulary tokens; returning zero vector");
        return vec![0.0; dim];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vec: Vec<f64> = (0..dim).map(|_| (rng.gen::<f64>() - 0.5) / dim as f64).collect();
    let params = &model.params;
    let total = (doc.len() * steps) as f64;
    let mut processed = 0usize;
    for _ in 0..steps {
        for t in 0..doc.len() {
            let lr =
                params.lr_start + (params.lr_min - params.lr_start) * processed as f64 / total;
            let lr = lr.max(params.lr_min);
            processed += 1;

            let target = doc[t];
            let start = t.saturating_sub(params.window);
            let end = (t + params.window).min(doc.len() - 1);
            let ctx_ids: Vec<usize> = (start..=end).filter(|&j| j != t).map(|j| doc[j]).collect();

            let mut out_ids = vec![target];
            let mut labels = vec![1.0];
            for _ in 0..params.negative {
                let neg = model.sample_negative(&mut rng);
                if neg == target {
                    continue;
                }
                out_ids.push(neg);
                labels.push(0.0);
            }
            let ctx_vecs: Vec<&[f64]> =
                ctx_ids.iter().map(|&i| model.word_in[i].as_slice()).collect();
            let out_vecs: Vec<&[f64]> =
                out_ids.iter().map(|&i| model.word_out[i].as_slice()).collect();
            let grads = step_gradients(&vec, &ctx_vecs, &out_vecs, &labels);
            // only the document vector moves at inference time
            for k in 0..dim {
                vec[k] -= lr * grads.grad_input[k];
            }
        }
    }
    vec
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}
