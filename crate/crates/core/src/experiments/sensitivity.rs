use log::warn;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, subjectwise_folds, wilcoxon_signed_rank, Alternative, ExperimentConfig, Fold, WilcoxonResult};
use crate::calibration::{Hypotheses, LrSystem, LrSystemConfig};
use crate::error::{Error, Result};
use crate::ingest::{Factor, LabeledDataset};
use crate::metrics::{cllr, BinaryEvalSet, Hyp};
use crate::scorer::ScorerConfig;

/// Training rows of `fold` without `level`, validation rows of `fold` with it.
pub fn leave_level_split(data: &LabeledDataset, fold: &Fold, factor: Factor, level: &str) -> (LabeledDataset, LabeledDataset) {
    let train = fold.train(data).filter(|s| s.provenance.level(factor) != level);
    let val = fold.validation(data).filter(|s| s.provenance.level(factor) == level);
    (train, val)
}

/// `train` with `n_remove` rows dropped uniformly at random.
pub fn random_removal(train: &LabeledDataset, n_remove: usize, seed: u64) -> LabeledDataset {
    let n = train.len();
    let mut drop = vec![false; n];
    for i in sample(&mut ChaCha8Rng::seed_from_u64(seed), n, n_remove.min(n)) {
        drop[i] = true;
    }
    LabeledDataset {
        samples: train.samples.iter().zip(&drop).filter(|(_, d)| !**d).map(|(s, _)| s.clone()).collect(),
        ..train.clone()
    }
}

/// Cllr change for one pairing when a factor level is unseen in training.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityCell {
    pub h1: String,
    pub h2: String,
    pub cllr_left_out: f64,
    pub cllr_control: f64,
    /// `cllr_left_out - cllr_control`; positive when the level matters.
    pub delta: f64,
    pub n_validation: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub level: String,
    pub cells: Vec<SensitivityCell>,
    pub mean_delta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub factor: Factor,
    pub levels: Vec<LevelResult>,
    /// Levels without validation rows.
    pub skipped_levels: Vec<String>,
    pub mean_delta: Option<f64>,
    /// One-sided test that leaving the level out increases Cllr.
    pub wilcoxon: WilcoxonResult,
}

impl SensitivityReport {
    pub fn deltas(&self) -> Vec<f64> {
        self.levels.iter().flat_map(|l| l.cells.iter().map(|c| c.delta)).collect()
    }
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn has_both(d: &LabeledDataset) -> bool {
    let n1 = d.samples.iter().filter(|s| s.label == "H1").count();
    n1 > 0 && n1 < d.len()
}

/// Pooled validation Cllr of the left-out and control systems for one pairing.
fn level_cell(data: &LabeledDataset, folds: &[Fold], hyp: &Hypotheses, factor: Factor, level: &str, cfg: &ExperimentConfig) -> Result<Option<SensitivityCell>> {
    let relabelled = Hypotheses::pair("H1", "H2")?;
    let data = hyp.restrict(data);
    let mut left = BinaryEvalSet::default();
    let mut control = BinaryEvalSet::default();
    for fold in folds {
        let (train, val) = leave_level_split(&data, fold, factor, level);
        if val.is_empty() {
            continue;
        }
        let full = fold.train(&data);
        let id = format!("sensitivity|{level}|{hyp}|fold{}", fold.index);
        let ctrl_train = random_removal(&full, full.len() - train.len(), derive_seed(cfg.seed, &format!("{id}|removal")));
        if !has_both(&train) || !has_both(&ctrl_train) {
            continue;
        }
        let system = LrSystemConfig {
            scorer: ScorerConfig {
                seed: derive_seed(cfg.seed, &id),
                ..cfg.system.scorer.clone()
            },
            ..cfg.system.clone()
        };
        for (t, set) in [(&train, &mut left), (&ctrl_train, &mut control)] {
            let sys = LrSystem::fit(t, &relabelled, &system)?;
            for s in &val.samples {
                set.llrs.push(sys.log10_lr(s) * std::f64::consts::LN_10);
                set.labels.push(if s.label == "H1" { Hyp::H1 } else { Hyp::H2 });
            }
        }
    }
    let (n1, n2) = left.counts();
    if n1 == 0 || n2 == 0 {
        return Ok(None);
    }
    let (a, b) = (cllr(&left)?, cllr(&control)?);
    Ok(Some(SensitivityCell {
        h1: hyp.h1.join("+"),
        h2: hyp.h2.join("+"),
        cllr_left_out: a,
        cllr_control: b,
        delta: a - b,
        n_validation: left.len(),
    }))
}

/// Leave-one-level-out analysis of `factor` (phone model or carry location)
/// over all pairings of the configured sensitivity activities.
pub fn sensitivity_leave_factor(data: &LabeledDataset, cfg: &ExperimentConfig, factor: Factor) -> Result<SensitivityReport> {
    if !matches!(factor, Factor::Phone | Factor::Location) {
        return Err(Error::InvalidInput(format!("sensitivity factor must be phone or location, got {factor:?}")));
    }
    let data = cfg.restrict(data);
    let mut activities = cfg.activity_list(&data);
    if let Some(keep) = &cfg.sensitivity.activities {
        activities.retain(|a| keep.contains(a));
    }
    if activities.len() < 2 {
        return Err(Error::InvalidInput("sensitivity analysis needs at least 2 activities".into()));
    }
    let levels = data.levels(factor);
    if levels.len() < 2 {
        return Err(Error::InvalidInput(format!("sensitivity analysis needs at least 2 levels of {factor:?}, found {}", levels.len())));
    }
    let plan = subjectwise_folds(&data, cfg.n_folds(&data), derive_seed(cfg.seed, "folds"))?;
    let pairs: Vec<Hypotheses> = (0..activities.len())
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| Hypotheses::pair(&activities[i], &activities[j]))
        .collect::<Result<_>>()?;
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for level in &levels {
        let cells = pairs
            .par_iter()
            .map(|h| level_cell(&data, &plan.folds, h, factor, level, cfg))
            .collect::<Result<Vec<_>>>()?;
        let cells: Vec<SensitivityCell> = cells.into_iter().flatten().collect();
        if cells.is_empty() {
            warn!("level `{level}` has no usable validation rows, skipped");
            skipped.push(level.clone());
            continue;
        }
        let deltas: Vec<f64> = cells.iter().map(|c| c.delta).collect();
        results.push(LevelResult {
            level: level.clone(),
            mean_delta: mean(&deltas),
            cells,
        });
    }
    let deltas: Vec<f64> = results.iter().flat_map(|l| l.cells.iter().map(|c| c.delta)).collect();
    Ok(SensitivityReport {
        factor,
        wilcoxon: wilcoxon_signed_rank(&deltas, Alternative::Greater),
        mean_delta: mean(&deltas),
        levels: results,
        skipped_levels: skipped,
    })
}
