use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use super::groups::{default_grouping, fit_multiclass, log_likelihoods, ActivityGrouping};
use super::{derive_seed, subjectwise_folds, ExperimentConfig};
use crate::error::{Error, Result};
use crate::ingest::{LabeledDataset, MinuteSample};
use crate::scorer::TreeEnsembleModel;

/// `minutes` consecutive minutes of `activity` in a reconstructed sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptStep {
    pub activity: String,
    pub minutes: usize,
}

/// Per-minute class likelihoods of a multiclass model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub minutes: Vec<DateTime<Utc>>,
    pub classes: Vec<String>,
    /// One row per minute, summing to 1.
    pub likelihoods: Vec<Vec<f64>>,
    pub predicted: Vec<usize>,
    /// True class per minute when the sample's label maps to one.
    pub truth: Vec<Option<usize>>,
}

impl Timeline {
    pub fn len(&self) -> usize {
        self.minutes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minutes.is_empty()
    }

    /// `(correct, labelled)` minute counts.
    pub fn hits(&self) -> (usize, usize) {
        let labelled: Vec<(usize, usize)> = self.predicted.iter().zip(&self.truth).filter_map(|(&p, t)| t.map(|t| (p, t))).collect();
        (labelled.iter().filter(|(p, t)| p == t).count(), labelled.len())
    }

    pub fn accuracy(&self) -> Option<f64> {
        let (hit, n) = self.hits();
        (n > 0).then(|| hit as f64 / n as f64)
    }
}

/// Highest-likelihood class; ties go to the earliest class.
fn first_argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Scores `samples` in order. Labels are mapped to classes through
/// `grouping` when given, otherwise used directly.
pub fn build_timeline(model: &TreeEnsembleModel, samples: &[MinuteSample], grouping: Option<&ActivityGrouping>) -> Timeline {
    let classes = model.class_order.clone();
    let likelihoods: Vec<Vec<f64>> = samples.iter().map(|s| log_likelihoods(model, s).iter().map(|l| l.exp()).collect()).collect();
    let truth = samples
        .iter()
        .map(|s| {
            let label = match grouping {
                Some(g) => g.group_of(&s.label)?,
                None => s.label.as_str(),
            };
            classes.iter().position(|c| c == label)
        })
        .collect();
    Timeline {
        minutes: samples.iter().map(|s| s.minute).collect(),
        predicted: likelihoods.iter().map(|r| first_argmax(r)).collect(),
        classes,
        likelihoods,
        truth,
    }
}

/// Builds a sequence following `script` from the samples of `data`. Each
/// step takes the next unused minutes of its activity (in dataset order) and
/// the result is re-stamped as consecutive minutes from `start`.
pub fn reconstruct_script(data: &LabeledDataset, script: &[ScriptStep], start: DateTime<Utc>) -> Result<Vec<MinuteSample>> {
    let mut used = vec![false; data.len()];
    let mut out = Vec::new();
    for step in script {
        let mut taken = 0;
        for (i, s) in data.samples.iter().enumerate() {
            if taken == step.minutes {
                break;
            }
            if !used[i] && s.label == step.activity {
                used[i] = true;
                taken += 1;
                out.push(s.clone());
            }
        }
        if taken < step.minutes {
            return Err(Error::InvalidInput(format!(
                "script needs {} minutes of `{}`, only {taken} available",
                step.minutes, step.activity
            )));
        }
    }
    for (k, s) in out.iter_mut().enumerate() {
        s.minute = start + Duration::minutes(k as i64);
    }
    Ok(out)
}

/// Trains a group model on the training subjects of the configured fold and
/// scores the scripted sequence built from its validation subjects.
pub fn timeline_from_config(data: &LabeledDataset, cfg: &ExperimentConfig) -> Result<Timeline> {
    let grouping = cfg.grouping.clone().unwrap_or_else(default_grouping);
    let plan = &cfg.timeline;
    if plan.groups.len() < 2 {
        return Err(Error::InvalidInput("timeline needs at least 2 groups".into()));
    }
    let data = cfg.restrict(data);
    let cv = subjectwise_folds(&data, cfg.n_folds(&data), derive_seed(cfg.seed, "folds"))?;
    let fold = cv
        .folds
        .get(plan.fold)
        .ok_or_else(|| Error::InvalidInput(format!("fold {} does not exist ({} folds)", plan.fold, cv.folds.len())))?;
    let train = grouping.relabel(&fold.train(&data), &plan.groups)?;
    let model = fit_multiclass(&train, &plan.groups, cfg, "timeline")?;
    let val = fold.validation(&data);
    let start = val.samples.first().map(|s| s.minute).unwrap_or_default();
    let sequence = reconstruct_script(&val, &plan.script, start)?;
    Ok(build_timeline(&model, &sequence, Some(&grouping)))
}
