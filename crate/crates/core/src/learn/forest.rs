//! Random forest with axis-aligned splits chosen by Gini impurity
//! decrease. Every tree derives its RNG from the master seed and its
//! own index, so thread count never changes the model.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Classifier, FeatureMatrix, LearnError};
use crate::par;

pub const FOREST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Candidate features per split; default floor(sqrt(p)).
    pub mtry: Option<usize>,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            mtry: None,
            min_leaf: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: [usize; 2],
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, row: &[f64]) -> u8 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf { counts } => {
                    // majority within the leaf, ties to class 0
                    return (counts[1] > counts[0]) as u8;
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestModel {
    pub version: u32,
    pub trees: Vec<Tree>,
    pub n_features: usize,
    pub params: ForestParams,
}

impl Classifier for ForestModel {
    fn predict_class(&self, row: &[f64]) -> u8 {
        self.predict(row).expect("dimension mismatch").0
    }
}

impl ForestModel {
    /// Majority vote over trees; probability is the fraction voting for
    /// class 1. A 50/50 vote resolves to class 0.
    pub fn predict(&self, row: &[f64]) -> Result<(u8, f64), LearnError> {
        if row.len() != self.n_features {
            return Err(LearnError::DimensionMismatch {
                expected: self.n_features,
                got: row.len(),
            });
        }
        let votes = self.trees.iter().filter(|t| t.predict(row) == 1).count();
        let probability = votes as f64 / self.trees.len() as f64;
        Ok(((probability > 0.5) as u8, probability))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("forest serialization")
    }

    pub fn from_json(json: &str) -> Result<ForestModel, serde_json::Error> {
        serde_json::from_str(json)
    }
}

/// Train on bootstrap samples (n draws with replacement per tree).
/// Deterministic given data, params and seed, independent of worker count.
pub fn train_forest(
    x: &FeatureMatrix,
    y: &[u8],
    params: &ForestParams,
) -> Result<ForestModel, LearnError> {
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
    let mtry = params.mtry.unwrap_or(((p as f64).sqrt().floor() as usize).max(1)).min(p);
    let tree_ids: Vec<u64> = (0..params.n_trees as u64).collect();
    let trees = par::map_ordered(&tree_ids, |&tree_idx| {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(tree_idx));
        let n = x.n_rows();
        let sample: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        let mut builder = TreeBuilder {
            x,
            y,
            mtry,
            min_leaf: params.min_leaf.max(1),
            rng,
            nodes: Vec::new(),
        };
        builder.build(&sample);
        Tree {
            nodes: builder.nodes,
        }
    });
    Ok(ForestModel {
        version: FOREST_FORMAT_VERSION,
        trees,
        n_features: p,
        params: params.clone(),
    })
}

struct TreeBuilder<'a> {
    x: &'a FeatureMatrix,
    y: &'a [u8],
    mtry: usize,
    min_leaf: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn gini(counts: [usize; 2]) -> f64 {
    let total = (counts[0] + counts[1]) as f64;
    if total == 0.0 {
        return 0.0;
    }
    let p0 = counts[0] as f64 / total;
    let p1 = counts[1] as f64 / total;
    1.0 - p0 * p0 - p1 * p1
}

impl TreeBuilder<'_> {
    fn build(&mut self, indices: &[usize]) -> usize {
        let counts = self.class_counts(indices);
        if counts[0] == 0 || counts[1] == 0 || indices.len() < 2 * self.min_leaf {
            return self.leaf(counts);
        }
        match self.best_split(indices) {
            Some(split) => {
                let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
                    .iter()
                    .partition(|&&i| self.x.rows[i][split.feature] <= split.threshold);
                if left_idx.len() < self.min_leaf || right_idx.len() < self.min_leaf {
                    return self.leaf(counts);
                }
                let at = self.nodes.len();
                self.nodes.push(Node::Leaf { counts }); // placeholder
                let left = self.build(&left_idx);
                let right = self.build(&right_idx);
                self.nodes[at] = Node::Split {
                    feature: split.feature,
                    threshold: split.threshold,
                    left,
                    right,
                };
                at
            }
            None => self.leaf(counts),
        }
    }

    fn leaf(&mut self, counts: [usize; 2]) -> usize {
        self.nodes.push(Node::Leaf { counts });
        self.nodes.len() - 1
    }

    fn class_counts(&self, indices: &[usize]) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for &i in indices {
            counts[self.y[i] as usize] += 1;
        }
        counts
    }

    /// Candidate thresholds sit at midpoints of consecutive sorted unique
    /// values; ties in gain break toward the lower feature index and then
    /// the lower threshold.
    fn best_split(&mut self, indices: &[usize]) -> Option<BestSplit> {
        let p = self.x.n_cols();
        let mut candidates: Vec<usize> = (0..p).collect();
        candidates.shuffle(&mut self.rng);
        candidates.truncate(self.mtry);
        candidates.sort_unstable();

        let parent = gini(self.class_counts(indices));
        let total = indices.len() as f64;
        let mut best: Option<BestSplit> = None;
        for &feature in &candidates {
            let mut pairs: Vec<(f64, u8)> = indices
                .iter()
                .map(|&i| (self.x.rows[i][feature], self.y[i]))
                .collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let total_counts = self.class_counts(indices);
            let mut left = [0usize; 2];
            for w in 0..pairs.len() - 1 {
                left[pairs[w].1 as usize] += 1;
                if pairs[w].0 == pairs[w + 1].0 {
                    continue;
                }
                let threshold = 0.5 * (pairs[w].0 + pairs[w + 1].0);
                let right = [total_counts[0] - left[0], total_counts[1] - left[1]];
                let nl = (left[0] + left[1]) as f64;
                let nr = (right[0] + right[1]) as f64;
                let gain = parent - (nl / total) * gini(left) - (nr / total) * gini(right);
                let better = match &best {
                    None => gain > 1e-12,
                    Some(b) => {
                        gain > b.gain + 1e-12
                            || ((gain - b.gain).abs() <= 1e-12
                                && (feature, threshold) < (b.feature, b.threshold))
                    }
                };
                if better {
                    best = Some(BestSplit {
                        feature,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }
}
