use std::collections::{BTreeMap, BTreeSet};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, multilevel_bootstrap, subjectwise_folds, BootstrapPlan, ExperimentConfig};
use crate::error::{Error, Result};
use crate::ingest::{LabeledDataset, Provenance};
use crate::metrics::{accuracy, cmxe, MulticlassEvalSet};
use crate::scorer::{argmax, compute_class_weights, fit_scorer, ClassWeights, ScorerConfig, TreeEnsembleModel};

/// Named groups of activity labels. Groups are disjoint.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActivityGrouping {
    pub groups: BTreeMap<String, Vec<String>>,
}

impl ActivityGrouping {
    pub fn new(groups: BTreeMap<String, Vec<String>>) -> Result<Self> {
        let g = ActivityGrouping { groups };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (name, members) in &self.groups {
            if members.is_empty() {
                return Err(Error::Validation(format!("group `{name}` is empty")));
            }
            for m in members {
                if !seen.insert(m.as_str()) {
                    return Err(Error::Validation(format!("activity `{m}` belongs to more than one group")));
                }
            }
        }
        Ok(())
    }

    /// Checks that every grouped activity is in `vocabulary`.
    pub fn validate_against(&self, vocabulary: &[String]) -> Result<()> {
        self.validate()?;
        for (name, members) in &self.groups {
            if let Some(m) = members.iter().find(|m| !vocabulary.contains(m)) {
                return Err(Error::Validation(format!("group `{name}` lists unknown activity `{m}`")));
            }
        }
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.groups.keys().cloned().collect()
    }

    pub fn group_of(&self, activity: &str) -> Option<&str> {
        self.groups.iter().find(|(_, m)| m.iter().any(|a| a == activity)).map(|(g, _)| g.as_str())
    }

    /// Relabels `data` by group, keeping only activities of `selected` groups.
    pub fn relabel(&self, data: &LabeledDataset, selected: &[String]) -> Result<LabeledDataset> {
        if let Some(s) = selected.iter().find(|s| !self.groups.contains_key(*s)) {
            return Err(Error::InvalidInput(format!("unknown group `{s}`")));
        }
        Ok(data.relabel(selected.to_vec(), |label| {
            self.group_of(label).filter(|g| selected.iter().any(|s| s == g)).map(str::to_string)
        }))
    }
}

/// Expert grouping of the default activity vocabulary.
pub fn default_grouping() -> ActivityGrouping {
    let g = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let mut groups = BTreeMap::new();
    groups.insert("movement".to_string(), g(&["cycling", "running", "walking"]));
    groups.insert("transport".to_string(), g(&["bus", "car", "train", "tram"]));
    groups.insert("dynamic".to_string(), g(&["dragging", "kicking", "punching", "throwing"]));
    groups.insert(
        "elevation".to_string(),
        g(&["elevator_up", "elevator_down", "escalator_up", "escalator_down", "stairs_up", "stairs_down"]),
    );
    groups.insert("stationary".to_string(), g(&["sitting", "standing"]));
    ActivityGrouping { groups }
}

/// Cross-validated multiclass performance over a set of classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MulticlassResult {
    pub classes: Vec<String>,
    pub cmxe: f64,
    /// Cmxe divided by log2 of the class count; 1 is uninformative.
    pub normalized_cmxe: f64,
    pub normalized_std_error: f64,
    pub accuracy: f64,
    pub n_validation: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSweepRow {
    pub groups: Vec<String>,
    pub result: MulticlassResult,
}

/// Natural-log class likelihoods of a multiclass model (log-softmax of its scores).
pub fn log_likelihoods(model: &TreeEnsembleModel, sample: &crate::ingest::MinuteSample) -> Vec<f64> {
    let s = model.score(sample);
    let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + s.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    s.iter().map(|v| v - lse).collect()
}

pub(crate) fn class_weights(data: &LabeledDataset, classes: &[String], weighted: bool) -> Result<ClassWeights> {
    if weighted {
        let labels: Vec<&str> = data.samples.iter().map(|s| s.label.as_str()).collect();
        compute_class_weights(&labels, classes)
    } else {
        Ok(ClassWeights::uniform(classes))
    }
}

/// Multiclass model over `classes` trained on `train` with the configured scorer.
pub fn fit_multiclass(train: &LabeledDataset, classes: &[String], cfg: &ExperimentConfig, id: &str) -> Result<TreeEnsembleModel> {
    let scorer = ScorerConfig {
        seed: derive_seed(cfg.seed, &format!("scorer|{id}")),
        ..cfg.system.scorer.clone()
    };
    let weights = class_weights(train, classes, cfg.system.class_weighting)?;
    fit_scorer(train, classes, &scorer, &weights)
}

/// Subject-wise cross-validation of a multiclass system on data already
/// labelled with `classes`.
fn evaluate_multiclass(data: &LabeledDataset, classes: &[String], cfg: &ExperimentConfig, id: &str) -> Result<MulticlassResult> {
    let plan = subjectwise_folds(data, cfg.n_folds(data), derive_seed(cfg.seed, "folds"))?;
    let mut loglik = Vec::new();
    let mut labels = Vec::new();
    let mut prov: Vec<Provenance> = Vec::new();
    for fold in &plan.folds {
        let train = fold.train(data);
        let val = fold.validation(data);
        let present: BTreeSet<&str> = train.samples.iter().map(|s| s.label.as_str()).collect();
        if val.is_empty() || present.len() < 2 {
            continue;
        }
        let model = match fit_multiclass(&train, classes, cfg, &format!("{id}|fold{}", fold.index)) {
            Ok(m) => m,
            Err(e) => {
                warn!("{id}, fold {}: {e}", fold.index);
                continue;
            }
        };
        for s in &val.samples {
            let Some(y) = classes.iter().position(|c| *c == s.label) else { continue };
            loglik.push(log_likelihoods(&model, s));
            labels.push(y);
            prov.push(s.provenance.clone());
        }
    }
    let set = MulticlassEvalSet::new(classes.len(), loglik, labels)?;
    let point = cmxe(&set)?;
    let predictions: Vec<usize> = set.loglik.iter().map(|r| argmax(r)).collect();
    let acc = accuracy(&predictions, &set.labels)?;
    let plan = BootstrapPlan {
        seed: derive_seed(cfg.seed, &format!("bootstrap|{id}")),
        ..cfg.bootstrap.clone()
    };
    let refs: Vec<&Provenance> = prov.iter().collect();
    let boot = multilevel_bootstrap(&refs, &plan, |idx| {
        let sub = MulticlassEvalSet {
            n_classes: set.n_classes,
            loglik: idx.iter().map(|&i| set.loglik[i].clone()).collect(),
            labels: idx.iter().map(|&i| set.labels[i]).collect(),
        };
        Ok(vec![cmxe(&sub)?.normalized])
    })?;
    Ok(MulticlassResult {
        classes: classes.to_vec(),
        cmxe: point.cmxe,
        normalized_cmxe: boot.means[0],
        normalized_std_error: boot.std_errors[0],
        accuracy: acc,
        n_validation: set.labels.len(),
    })
}

/// The naive system that separates every configured activity at once.
pub fn naive_cmxe(data: &LabeledDataset, cfg: &ExperimentConfig) -> Result<MulticlassResult> {
    let classes = cfg.activity_list(data);
    if classes.len() < 2 {
        return Err(Error::InvalidInput("naive multiclass system needs at least 2 activities".into()));
    }
    let data = cfg.restrict(data);
    evaluate_multiclass(&data, &classes, cfg, "naive")
}

/// Index subsets of `n` items with at least two members, by size then lexicographically.
fn subsets(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (1u32..(1 << n)).filter(|m| m.count_ones() >= 2).map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect()).collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Multiclass performance of every combination of two or more groups.
/// Combinations with fewer than two groups present in the data are skipped.
pub fn group_sweep(data: &LabeledDataset, grouping: &ActivityGrouping, cfg: &ExperimentConfig) -> Result<Vec<GroupSweepRow>> {
    grouping.validate()?;
    let names = grouping.names();
    if names.len() < 2 {
        return Err(Error::InvalidInput("group sweep needs at least 2 groups".into()));
    }
    let data = cfg.restrict(data);
    let rows = subsets(names.len())
        .par_iter()
        .map(|idx| {
            let selected: Vec<String> = idx.iter().map(|&i| names[i].clone()).collect();
            let relabelled = grouping.relabel(&data, &selected)?;
            let present = relabelled.present_labels();
            if present.len() < selected.len() {
                warn!("groups {}: {} without samples, skipped", selected.join("+"), selected.len() - present.len());
                return Ok(None);
            }
            let result = evaluate_multiclass(&relabelled, &selected, cfg, &format!("groups|{}", selected.join("+")))?;
            Ok(Some(GroupSweepRow { groups: selected, result }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}
