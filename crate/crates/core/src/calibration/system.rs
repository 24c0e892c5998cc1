//! Scorer plus calibrator: the complete likelihood-ratio system.

use std::collections::BTreeSet;
use std::path::Path;

use log::debug;
use serde::{Deserialize, Serialize};

use super::{CalibratorKind, ScoreCalibration};
use crate::error::{Error, Result};
use crate::ingest::{LabeledDataset, MinuteSample};
use crate::metrics::Hyp;
use crate::scorer::{compute_class_weights, fit_scorer, softmax, ClassWeights, ScorerConfig, TreeEnsembleModel};

/// Activity label sets for the two competing hypotheses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub h1: Vec<String>,
    pub h2: Vec<String>,
}

impl Hypotheses {
    pub fn new(h1: Vec<String>, h2: Vec<String>) -> Result<Self> {
        if h1.is_empty() || h2.is_empty() {
            return Err(Error::InvalidInput("both hypotheses need at least one activity".into()));
        }
        let a: BTreeSet<&String> = h1.iter().collect();
        if let Some(shared) = h2.iter().find(|x| a.contains(x)) {
            return Err(Error::InvalidInput(format!("activity `{shared}` is in both hypotheses")));
        }
        Ok(Hypotheses { h1, h2 })
    }

    /// One activity against another.
    pub fn pair(h1: &str, h2: &str) -> Result<Self> {
        Hypotheses::new(vec![h1.to_string()], vec![h2.to_string()])
    }

    pub fn classify(&self, label: &str) -> Option<Hyp> {
        if self.h1.iter().any(|x| x == label) {
            Some(Hyp::H1)
        } else if self.h2.iter().any(|x| x == label) {
            Some(Hyp::H2)
        } else {
            None
        }
    }

    /// Samples of either hypothesis, relabelled to `H1` / `H2`.
    pub fn restrict(&self, data: &LabeledDataset) -> LabeledDataset {
        data.relabel(vec!["H1".into(), "H2".into()], |l| self.classify(l).map(|h| h.to_string()))
    }
}

impl std::fmt::Display for Hypotheses {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} vs {}", self.h1.join("+"), self.h2.join("+"))
    }
}

pub const DEFAULT_CALIBRATION_FOLDS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LrSystemConfig {
    pub scorer: ScorerConfig,
    pub calibrator: CalibratorKind,
    /// Inverse-frequency class weights for the scorer.
    pub class_weighting: bool,
    /// Inverse-frequency weights for the logistic calibration fit as well.
    pub weighted_calibration: bool,
    /// Calibrate on out-of-fold scores from this many subject-wise folds of
    /// the training set (capped at the number of subjects). `None` calibrates
    /// on the scorer's in-sample training scores.
    pub calibration_folds: Option<usize>,
}

impl Default for LrSystemConfig {
    fn default() -> Self {
        LrSystemConfig {
            scorer: ScorerConfig::default(),
            calibrator: CalibratorKind::Logistic,
            class_weighting: true,
            weighted_calibration: false,
            calibration_folds: Some(DEFAULT_CALIBRATION_FOLDS),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrSystem {
    pub hypotheses: Hypotheses,
    pub model: TreeEnsembleModel,
    pub calibration: ScoreCalibration,
}

fn binary_classes() -> Vec<String> {
    vec!["H1".into(), "H2".into()]
}

fn fit_binary_scorer(data: &LabeledDataset, config: &LrSystemConfig) -> Result<TreeEnsembleModel> {
    let classes = binary_classes();
    let weights = if config.class_weighting {
        let labels: Vec<&str> = data.samples.iter().map(|s| s.label.as_str()).collect();
        compute_class_weights(&labels, &classes)?
    } else {
        ClassWeights::uniform(&classes)
    };
    fit_scorer(data, &classes, &config.scorer, &weights)
}

fn hyp_of(sample: &MinuteSample) -> Hyp {
    if sample.label == "H1" {
        Hyp::H1
    } else {
        Hyp::H2
    }
}

/// Binary margin `score[H1] - score[H2]` of a model with classes `[H1, H2]`.
fn margin(model: &TreeEnsembleModel, sample: &MinuteSample) -> f64 {
    let s = model.score(sample);
    s[0] - s[1]
}

/// Out-of-fold margins over `min(folds, subjects)` subject-wise folds, or
/// `None` when fewer than two folds are possible or a fold lacks a class.
fn out_of_fold_scores(data: &LabeledDataset, config: &LrSystemConfig, folds: usize) -> Result<Option<Vec<f64>>> {
    if folds < 2 {
        return Err(Error::InvalidInput(format!("calibration_folds must be at least 2, got {folds}")));
    }
    let subjects: Vec<String> = data.levels(crate::ingest::Factor::Subject);
    let folds = folds.min(subjects.len());
    if folds < 2 {
        return Ok(None);
    }
    let fold_of = |subject: &str| subjects.iter().position(|s| s == subject).unwrap() % folds;
    let mut scores = vec![f64::NAN; data.len()];
    for f in 0..folds {
        let train = data.filter(|s| fold_of(&s.provenance.subject_id) != f);
        let n1 = train.samples.iter().filter(|s| s.label == "H1").count();
        if n1 == 0 || n1 == train.len() {
            return Ok(None);
        }
        let model = fit_binary_scorer(&train, config)?;
        for (i, s) in data.samples.iter().enumerate() {
            if fold_of(&s.provenance.subject_id) == f {
                scores[i] = margin(&model, s);
            }
        }
    }
    Ok(Some(scores))
}

impl LrSystem {
    /// Trains the scorer on the samples of `train` covered by `hypotheses` and
    /// calibrates it on (by default out-of-fold) training scores.
    pub fn fit(train: &LabeledDataset, hypotheses: &Hypotheses, config: &LrSystemConfig) -> Result<Self> {
        LrSystem::fit_many(train, hypotheses, config, &[config.calibrator])?.remove(0)
    }

    /// One scorer shared by systems with each calibrator in `kinds`. The outer
    /// error covers scorer training; each calibrator can fail on its own.
    pub fn fit_many(train: &LabeledDataset, hypotheses: &Hypotheses, config: &LrSystemConfig, kinds: &[CalibratorKind]) -> Result<Vec<Result<Self>>> {
        let data = hypotheses.restrict(train);
        let model = fit_binary_scorer(&data, config)?;
        let oof = match config.calibration_folds {
            Some(k) => out_of_fold_scores(&data, config, k)?,
            None => None,
        };
        let scores = match oof {
            Some(s) => s,
            None => {
                if config.calibration_folds.is_some() {
                    debug!("{hypotheses}: out-of-fold calibration impossible, calibrating in-sample");
                }
                data.samples.iter().map(|s| margin(&model, s)).collect()
            }
        };
        Ok(kinds
            .iter()
            .map(|&kind| {
                let cfg = LrSystemConfig {
                    calibrator: kind,
                    ..config.clone()
                };
                LrSystem::from_scores(hypotheses.clone(), model.clone(), &data, &scores, &cfg)
            })
            .collect())
    }

    /// Reuses a trained scorer with a freshly fitted calibrator.
    pub fn recalibrate(&self, train: &LabeledDataset, config: &LrSystemConfig) -> Result<Self> {
        let data = self.hypotheses.restrict(train);
        let scores: Vec<f64> = data.samples.iter().map(|s| margin(&self.model, s)).collect();
        LrSystem::from_scores(self.hypotheses.clone(), self.model.clone(), &data, &scores, config)
    }

    fn from_scores(hypotheses: Hypotheses, model: TreeEnsembleModel, data: &LabeledDataset, scores: &[f64], config: &LrSystemConfig) -> Result<Self> {
        let labels: Vec<Hyp> = data.samples.iter().map(hyp_of).collect();
        let weights = if config.weighted_calibration {
            let names: Vec<&str> = data.samples.iter().map(|s| s.label.as_str()).collect();
            let cw = compute_class_weights(&names, &binary_classes())?;
            Some(names.iter().map(|n| cw.get(n)).collect::<Vec<f64>>())
        } else {
            None
        };
        let calibration = ScoreCalibration::fit(config.calibrator, scores, &labels, weights.as_deref())?;
        Ok(LrSystem {
            hypotheses,
            model,
            calibration,
        })
    }

    /// Uncalibrated binary score.
    pub fn score(&self, sample: &MinuteSample) -> f64 {
        margin(&self.model, sample)
    }

    pub fn log10_lr(&self, sample: &MinuteSample) -> f64 {
        self.calibration.log10_lr(self.score(sample))
    }

    /// Bounded likelihood ratio of H1 against H2.
    pub fn evaluate(&self, sample: &MinuteSample) -> f64 {
        10f64.powf(self.log10_lr(sample))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("system serializes")
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
        LrSystem::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Softmax of the raw scores, in the model's class order.
pub fn multiclass_likelihoods(model: &TreeEnsembleModel, sample: &MinuteSample) -> Vec<f64> {
    softmax(&model.score(sample))
}
