//! Tree-ensemble scorers over mixed-type features with missing values.

mod binning;
mod encoding;
mod importance;
mod tree;

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{FeatureRow, LabeledDataset, MinuteSample, VariableSchema};

pub use binning::{BinMapper, MAX_BINS};
pub use encoding::{encode_ordered_categorical, ColumnSource, EncodedColumn, FeatureEncoder};
pub use importance::{aggregate_importance, variable_importance, ImportanceReport};
pub use tree::{Node, Split, Tree};

use tree::{BinnedData, GrowParams, Grower};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScorerFamily {
    GradientBoosted,
    BaggedEnsemble,
    SingleTree,
}

impl std::fmt::Display for ScorerFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScorerFamily::GradientBoosted => "gradient_boosted",
            ScorerFamily::BaggedEnsemble => "bagged_ensemble",
            ScorerFamily::SingleTree => "single_tree",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScorerConfig {
    pub family: ScorerFamily,
    /// Boosting rounds, or number of trees for the bagged family.
    pub rounds: usize,
    /// Ignored by the bagged and single-tree families, which grow until
    /// `min_samples_leaf` stops them.
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
    pub l2_leaf_reg: f64,
    /// Prior weight of the ordered target statistics.
    pub encoding_prior: f64,
    pub seed: u64,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        ScorerConfig {
            family: ScorerFamily::GradientBoosted,
            rounds: 200,
            max_depth: 6,
            learning_rate: 0.1,
            min_samples_leaf: 5,
            l2_leaf_reg: 1.0,
            encoding_prior: 1.0,
            seed: 0,
        }
    }
}

impl ScorerConfig {
    /// Conventional defaults for each family.
    pub fn for_family(family: ScorerFamily) -> Self {
        let base = ScorerConfig::default();
        match family {
            ScorerFamily::GradientBoosted => base,
            ScorerFamily::BaggedEnsemble => ScorerConfig {
                family,
                rounds: 100,
                ..base
            },
            ScorerFamily::SingleTree => ScorerConfig {
                family,
                rounds: 1,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 || self.max_depth == 0 || self.min_samples_leaf == 0 {
            return Err(Error::InvalidInput("rounds, max_depth and min_samples_leaf must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidInput(format!("learning_rate {} outside (0, 1]", self.learning_rate)));
        }
        if !(self.l2_leaf_reg >= 0.0 && self.encoding_prior > 0.0) {
            return Err(Error::InvalidInput("l2_leaf_reg must be >= 0 and encoding_prior > 0".into()));
        }
        Ok(())
    }
}

/// Inverse-frequency class weights with mean 1 over classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub weights: BTreeMap<String, f64>,
}

impl ClassWeights {
    pub fn uniform(classes: &[String]) -> Self {
        ClassWeights {
            weights: classes.iter().map(|c| (c.clone(), 1.0)).collect(),
        }
    }

    pub fn get(&self, class: &str) -> f64 {
        self.weights.get(class).copied().unwrap_or(1.0)
    }
}

/// `weight(k) = N / (K * count(k))` over the labels belonging to `classes`.
pub fn compute_class_weights<S: AsRef<str>>(labels: &[S], classes: &[String]) -> Result<ClassWeights> {
    if classes.is_empty() {
        return Err(Error::InvalidInput("no classes".into()));
    }
    let mut counts: BTreeMap<&str, usize> = classes.iter().map(|c| (c.as_str(), 0)).collect();
    for l in labels {
        if let Some(c) = counts.get_mut(l.as_ref()) {
            *c += 1;
        }
    }
    if let Some((c, _)) = counts.iter().find(|(_, &n)| n == 0) {
        return Err(Error::InvalidInput(format!("class `{c}` has no samples")));
    }
    let n: usize = counts.values().sum();
    let k = classes.len() as f64;
    Ok(ClassWeights {
        weights: counts
            .into_iter()
            .map(|(c, m)| (c.to_string(), n as f64 / (k * m as f64)))
            .collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    /// Raw score = base + sum of per-class tree outputs.
    Additive,
    /// Raw score = ln of the tree-averaged class probabilities.
    AveragedProbability,
}

/// A trained scorer. Immutable after fitting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsembleModel {
    pub config: ScorerConfig,
    pub class_order: Vec<String>,
    pub schema: VariableSchema,
    pub encoder: FeatureEncoder,
    pub output: OutputKind,
    pub base_scores: Vec<f64>,
    pub trees: Vec<Tree>,
    /// Weighted training log-loss before the first and after every boosting round.
    pub training_loss: Vec<f64>,
}

const LEAF_PSEUDOCOUNT: f64 = 0.5;

fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    v.iter_mut().for_each(|x| *x /= sum);
}

pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let mut v = scores.to_vec();
    softmax_in_place(&mut v);
    v
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn weighted_log_loss(f: &[f64], labels: &[usize], weights: &[f64], k: usize) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, (&y, &w)) in labels.iter().zip(weights).enumerate() {
        let row = &f[i * k..(i + 1) * k];
        num += w * (log_sum_exp(row) - row[y]);
        den += w;
    }
    num / den
}

/// Trains a scorer on the samples of `train` whose label is in `classes`.
pub fn fit_scorer(train: &LabeledDataset, classes: &[String], config: &ScorerConfig, weights: &ClassWeights) -> Result<TreeEnsembleModel> {
    config.validate()?;
    if classes.len() < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 classes, got {}", classes.len())));
    }
    let class_index: BTreeMap<&str, usize> = classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    if class_index.len() != classes.len() {
        return Err(Error::InvalidInput("duplicate class labels".into()));
    }
    let samples: Vec<&MinuteSample> = train.samples.iter().filter(|s| class_index.contains_key(s.label.as_str())).collect();
    if samples.is_empty() {
        return Err(Error::Empty("training set has no samples of the requested classes".into()));
    }
    let k = classes.len();
    let labels: Vec<usize> = samples.iter().map(|s| class_index[s.label.as_str()]).collect();
    for (c, name) in classes.iter().enumerate() {
        if !labels.contains(&c) {
            return Err(Error::InvalidInput(format!("class `{name}` has no training samples")));
        }
    }
    let sample_w: Vec<f64> = samples.iter().map(|s| weights.get(&s.label)).collect();
    if sample_w.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidInput("class weights must be positive".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = samples.len();
    let mut permutation: Vec<usize> = (0..n).collect();
    permutation.shuffle(&mut rng);
    let rows: Vec<&FeatureRow> = samples.iter().map(|s| &s.features).collect();
    let (encoder, matrix) = FeatureEncoder::fit(&train.schema, &rows, &labels, k, config.encoding_prior, &permutation)?;
    let data = BinnedData::new(&matrix);

    let mut model = TreeEnsembleModel {
        config: config.clone(),
        class_order: classes.to_vec(),
        schema: train.schema.clone(),
        encoder,
        output: OutputKind::Additive,
        base_scores: vec![0.0; k],
        trees: Vec::new(),
        training_loss: Vec::new(),
    };
    match config.family {
        ScorerFamily::GradientBoosted => boost(&mut model, &data, &labels, &sample_w, &mut rng),
        ScorerFamily::BaggedEnsemble | ScorerFamily::SingleTree => grow_forest(&mut model, &data, &labels, &sample_w, &mut rng),
    }
    Ok(model)
}

fn boost(model: &mut TreeEnsembleModel, data: &BinnedData, labels: &[usize], w: &[f64], rng: &mut ChaCha8Rng) {
    let cfg = model.config.clone();
    let k = model.class_order.len();
    let n = labels.len();
    let mut class_w = vec![0.0; k];
    for (&y, &wi) in labels.iter().zip(w) {
        class_w[y] += wi;
    }
    let total: f64 = class_w.iter().sum();
    let mut base: Vec<f64> = class_w.iter().map(|c| (c / total).ln()).collect();
    let mean = base.iter().sum::<f64>() / k as f64;
    base.iter_mut().for_each(|b| *b -= mean);
    model.base_scores = base.clone();

    let mut f: Vec<f64> = (0..n).flat_map(|_| base.iter().copied()).collect();
    let mut loss = weighted_log_loss(&f, labels, w, k);
    model.training_loss.push(loss);
    let params = GrowParams {
        max_depth: Some(cfg.max_depth),
        min_samples_leaf: cfg.min_samples_leaf,
        lambda: cfg.l2_leaf_reg,
        min_gain: 1e-12,
        columns_per_split: None,
    };
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut prob = vec![0.0; n * k];
    for _ in 0..cfg.rounds {
        prob.copy_from_slice(&f);
        prob.chunks_mut(k).for_each(softmax_in_place);
        let mut round_trees = Vec::with_capacity(k);
        let mut delta = vec![0.0; n * k];
        for c in 0..k {
            for i in 0..n {
                let p = prob[i * k + c];
                let y = if labels[i] == c { 1.0 } else { 0.0 };
                grad[i] = w[i] * (p - y);
                hess[i] = (w[i] * p * (1.0 - p)).max(1e-16);
            }
            let grower = Grower {
                data,
                grad: &grad,
                hess: &hess,
                dim: 1,
                params: &params,
            };
            let (g, h, lr, lambda) = (&grad, &hess, cfg.learning_rate, cfg.l2_leaf_reg);
            let leaf = |rows: &[usize]| {
                let gs: f64 = rows.iter().map(|&r| g[r]).sum();
                let hs: f64 = rows.iter().map(|&r| h[r]).sum();
                vec![-lr * gs / (hs + lambda)]
            };
            let (tree, leaves) = grower.grow((0..n).collect(), Some(c), rng, &leaf);
            for (node, rows) in leaves {
                let Node::Leaf { values } = &tree.nodes[node] else { unreachable!() };
                for r in rows {
                    delta[r * k + c] = values[0];
                }
            }
            round_trees.push(tree);
        }
        // backtrack the step so the training loss never increases
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let trial: Vec<f64> = f.iter().zip(&delta).map(|(a, d)| a + step * d).collect();
            let trial_loss = weighted_log_loss(&trial, labels, w, k);
            if trial_loss <= loss {
                accepted = Some((trial, trial_loss));
                break;
            }
            step *= 0.5;
        }
        let Some((next, next_loss)) = accepted else { break };
        if step < 1.0 {
            round_trees.iter_mut().for_each(|t| t.scale_leaves(step));
        }
        f = next;
        loss = next_loss;
        model.training_loss.push(loss);
        model.trees.extend(round_trees);
    }
}

fn grow_forest(model: &mut TreeEnsembleModel, data: &BinnedData, labels: &[usize], w: &[f64], rng: &mut ChaCha8Rng) {
    let cfg = &model.config;
    let k = model.class_order.len();
    let n = labels.len();
    let bagged = cfg.family == ScorerFamily::BaggedEnsemble;
    model.output = OutputKind::AveragedProbability;
    // gradients of the multinomial loss at a uniform prediction
    let p = 1.0 / k as f64;
    let mut grad = vec![0.0; n * k];
    let mut hess = vec![0.0; n * k];
    for i in 0..n {
        for c in 0..k {
            let y = if labels[i] == c { 1.0 } else { 0.0 };
            grad[i * k + c] = w[i] * (p - y);
            hess[i * k + c] = w[i] * p * (1.0 - p);
        }
    }
    let n_cols = data.n_columns();
    let params = GrowParams {
        max_depth: None,
        min_samples_leaf: cfg.min_samples_leaf,
        lambda: 1e-9,
        min_gain: 1e-12,
        columns_per_split: bagged.then(|| ((n_cols as f64).sqrt().ceil() as usize).max(1)),
    };
    let grower = Grower {
        data,
        grad: &grad,
        hess: &hess,
        dim: k,
        params: &params,
    };
    let leaf = |rows: &[usize]| {
        let mut counts = vec![LEAF_PSEUDOCOUNT; k];
        for &r in rows {
            counts[labels[r]] += w[r];
        }
        let total: f64 = counts.iter().sum();
        counts.iter().map(|c| c / total).collect::<Vec<f64>>()
    };
    let n_trees = if bagged { cfg.rounds } else { 1 };
    for _ in 0..n_trees {
        let rows: Vec<usize> = if bagged {
            (0..n).map(|_| rng.gen_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let (tree, _) = grower.grow(rows, None, rng, &leaf);
        model.trees.push(tree);
    }
}

impl TreeEnsembleModel {
    pub fn n_classes(&self) -> usize {
        self.class_order.len()
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.class_order.iter().position(|c| c == label)
    }

    /// Raw per-class scores of an already encoded row.
    pub fn score_encoded(&self, row: &[f64]) -> Vec<f64> {
        let k = self.n_classes();
        match self.output {
            OutputKind::Additive => {
                let mut s = self.base_scores.clone();
                for t in &self.trees {
                    let v = t.predict(row);
                    match t.class {
                        Some(c) => s[c] += v[0],
                        None => s.iter_mut().zip(v).for_each(|(a, b)| *a += b),
                    }
                }
                s
            }
            OutputKind::AveragedProbability => {
                let mut p = vec![0.0; k];
                for t in &self.trees {
                    p.iter_mut().zip(t.predict(row)).for_each(|(a, b)| *a += b);
                }
                let m = self.trees.len().max(1) as f64;
                p.iter().map(|x| (x / m).ln()).collect()
            }
        }
    }

    pub fn score_row(&self, features: &FeatureRow) -> Vec<f64> {
        self.score_encoded(&self.encoder.encode_row(features))
    }

    /// Raw score vector in `class_order`. Unknown tokens count as missing.
    pub fn score(&self, sample: &MinuteSample) -> Vec<f64> {
        self.score_row(&sample.features)
    }

    /// Index of the highest raw score; ties go to the earliest class.
    pub fn predict_class(&self, sample: &MinuteSample) -> usize {
        argmax(&self.score(sample))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        TreeEnsembleModel::from_json(&std::fs::read_to_string(path)?)
    }
}

/// First index of the maximum.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}
