use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, multilevel_bootstrap, subjectwise_folds, BootstrapPlan, CvPlan, ExperimentConfig, FoldAggregation};
use crate::calibration::{CalibratorKind, Hypotheses, LrSystem, LrSystemConfig};
use crate::error::{Error, Result};
use crate::ingest::{LabeledDataset, Provenance};
use crate::metrics::{cllr, cllr_min, BinaryEvalSet, Hyp};
use crate::scorer::{aggregate_importance, variable_importance, ImportanceReport, ScorerConfig, ScorerFamily};

/// Cllr thresholds reported by the ablation table.
pub const CLLR_THRESHOLDS: [f64; 4] = [1.0, 0.75, 0.5, 0.25];

/// One validation sample scored by the system of its fold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub fold: usize,
    pub hyp: Hyp,
    pub score: f64,
    pub log10_lr: f64,
    /// The scorer's own decision (margin > 0 means H1) was right.
    pub correct: bool,
    pub provenance: Provenance,
}

/// Cross-validated output of one hypothesis pair under one calibrator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairEvaluation {
    pub hypotheses: Hypotheses,
    pub calibrator: CalibratorKind,
    pub rows: Vec<ValidationRow>,
    pub folds_used: usize,
    pub folds_failed: usize,
}

impl PairEvaluation {
    pub fn eval_set(&self) -> BinaryEvalSet {
        eval_set(&self.rows.iter().collect::<Vec<_>>())
    }

    pub fn accuracy(&self) -> Option<f64> {
        if self.rows.is_empty() {
            return None;
        }
        Some(self.rows.iter().filter(|r| r.correct).count() as f64 / self.rows.len() as f64)
    }

    fn counts(rows: &[&ValidationRow]) -> (usize, usize) {
        let n1 = rows.iter().filter(|r| r.hyp == Hyp::H1).count();
        (n1, rows.len() - n1)
    }
}

fn eval_set(rows: &[&ValidationRow]) -> BinaryEvalSet {
    BinaryEvalSet {
        llrs: rows.iter().map(|r| r.log10_lr * std::f64::consts::LN_10).collect(),
        labels: rows.iter().map(|r| r.hyp).collect(),
    }
}

/// Bootstrapped `[cllr, cllr_min]` of `rows`; PAV orders samples by their LRs.
fn bootstrap_cllr(rows: &[&ValidationRow], plan: &BootstrapPlan) -> Result<(f64, f64, f64)> {
    let prov: Vec<&Provenance> = rows.iter().map(|r| &r.provenance).collect();
    let res = multilevel_bootstrap(&prov, plan, |idx| {
        let sub: Vec<&ValidationRow> = idx.iter().map(|&i| rows[i]).collect();
        let set = eval_set(&sub);
        Ok(vec![cllr(&set)?, cllr_min(&set, &set.llrs)?])
    })?;
    Ok((res.means[0], res.means[1], res.std_errors[0]))
}

fn pair_id(h: &Hypotheses) -> String {
    h.to_string()
}

/// Trains one scorer per fold on the training subjects and scores the
/// validation subjects with a system per calibrator.
fn cross_validate(
    data: &LabeledDataset,
    hypotheses: &Hypotheses,
    plan: &CvPlan,
    system: &LrSystemConfig,
    kinds: &[CalibratorKind],
    master_seed: u64,
) -> Result<Vec<PairEvaluation>> {
    let mut out: Vec<PairEvaluation> = kinds
        .iter()
        .map(|&k| PairEvaluation {
            hypotheses: hypotheses.clone(),
            calibrator: k,
            rows: Vec::new(),
            folds_used: 0,
            folds_failed: 0,
        })
        .collect();
    let id = pair_id(hypotheses);
    for fold in &plan.folds {
        let train = hypotheses.restrict(&fold.train(data));
        let val = hypotheses.restrict(&fold.validation(data));
        let n1 = train.samples.iter().filter(|s| s.label == "H1").count();
        if val.is_empty() || n1 == 0 || n1 == train.len() {
            continue;
        }
        let cfg = LrSystemConfig {
            scorer: ScorerConfig {
                seed: derive_seed(master_seed, &format!("scorer|{id}|fold{}", fold.index)),
                ..system.scorer.clone()
            },
            ..system.clone()
        };
        // `train` is already relabelled to H1/H2
        let relabelled = Hypotheses::pair("H1", "H2")?;
        let systems = match LrSystem::fit_many(&train, &relabelled, &cfg, kinds) {
            Ok(s) => s,
            Err(e) => {
                warn!("{id}, fold {}: scorer failed: {e}", fold.index);
                out.iter_mut().for_each(|o| o.folds_failed += 1);
                continue;
            }
        };
        for (o, sys) in out.iter_mut().zip(systems) {
            let sys = match sys {
                Ok(s) => s,
                Err(e) => {
                    warn!("{id}, fold {}, {} calibrator: {e}", fold.index, o.calibrator);
                    o.folds_failed += 1;
                    continue;
                }
            };
            o.folds_used += 1;
            for s in &val.samples {
                let score = sys.score(s);
                let hyp = if s.label == "H1" { Hyp::H1 } else { Hyp::H2 };
                o.rows.push(ValidationRow {
                    fold: fold.index,
                    hyp,
                    score,
                    log10_lr: sys.calibration.log10_lr(score),
                    correct: (score > 0.0) == (hyp == Hyp::H1),
                    provenance: s.provenance.clone(),
                });
            }
        }
    }
    Ok(out)
}

fn cv_plan(data: &LabeledDataset, cfg: &ExperimentConfig) -> Result<CvPlan> {
    subjectwise_folds(data, cfg.n_folds(data), derive_seed(cfg.seed, "folds"))
}

/// Cross-validated validation LRs of one hypothesis pair (used for the
/// per-system diagnostics).
pub fn evaluate_pair(data: &LabeledDataset, cfg: &ExperimentConfig, hypotheses: &Hypotheses) -> Result<PairEvaluation> {
    let plan = cv_plan(data, cfg)?;
    let mut ev = cross_validate(data, hypotheses, &plan, &cfg.system, &[cfg.system.calibrator], cfg.seed)?;
    Ok(ev.remove(0))
}

/// Metrics of one cell of the pairwise matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCell {
    pub h1: String,
    pub h2: String,
    pub cllr: Option<f64>,
    pub cllr_min: Option<f64>,
    pub cllr_std_error: Option<f64>,
    pub accuracy: Option<f64>,
    pub n_validation: usize,
    pub folds_used: usize,
}

fn summarize(ev: &PairEvaluation, cfg: &ExperimentConfig) -> Result<PairCell> {
    let id = pair_id(&ev.hypotheses);
    let plan = BootstrapPlan {
        seed: derive_seed(cfg.seed, &format!("bootstrap|{id}")),
        ..cfg.bootstrap.clone()
    };
    let min = cfg.min_validation_per_class.max(1);
    let enough = |rows: &[&ValidationRow]| {
        let (a, b) = PairEvaluation::counts(rows);
        a >= min && b >= min
    };
    let all: Vec<&ValidationRow> = ev.rows.iter().collect();
    let metrics = match cfg.fold_aggregation {
        FoldAggregation::Pooled if enough(&all) => Some(bootstrap_cllr(&all, &plan)?),
        FoldAggregation::Pooled => None,
        FoldAggregation::PerFold => {
            let mut folds: Vec<usize> = ev.rows.iter().map(|r| r.fold).collect();
            folds.dedup();
            let mut acc = Vec::new();
            for f in folds {
                let rows: Vec<&ValidationRow> = ev.rows.iter().filter(|r| r.fold == f).collect();
                if enough(&rows) {
                    acc.push(bootstrap_cllr(&rows, &plan)?);
                }
            }
            if acc.is_empty() {
                None
            } else {
                let n = acc.len() as f64;
                Some((
                    acc.iter().map(|a| a.0).sum::<f64>() / n,
                    acc.iter().map(|a| a.1).sum::<f64>() / n,
                    (acc.iter().map(|a| a.2 * a.2).sum::<f64>()).sqrt() / n,
                ))
            }
        }
    };
    if metrics.is_none() {
        warn!("{id}: not enough validation samples, cell left empty");
    }
    Ok(PairCell {
        h1: ev.hypotheses.h1.join("+"),
        h2: ev.hypotheses.h2.join("+"),
        cllr: metrics.map(|m| m.0),
        cllr_min: metrics.map(|m| m.1),
        cllr_std_error: metrics.map(|m| m.2),
        accuracy: ev.accuracy(),
        n_validation: ev.rows.len(),
        folds_used: ev.folds_used,
    })
}

/// Cells of every unordered pair for each calibrator in `kinds`, with row
/// activity `i` as H1 against column activity `j < i`.
fn run_pairs(data: &LabeledDataset, cfg: &ExperimentConfig, system: &LrSystemConfig, kinds: &[CalibratorKind]) -> Result<(Vec<String>, Vec<(usize, usize)>, Vec<Vec<PairCell>>)> {
    let activities = cfg.activity_list(data);
    if activities.len() < 2 {
        return Err(Error::InvalidInput(format!("pairwise analysis needs at least 2 activities, found {}", activities.len())));
    }
    let data = cfg.restrict(data);
    let plan = cv_plan(&data, cfg)?;
    let pairs: Vec<(usize, usize)> = (0..activities.len()).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
    let cells = pairs
        .par_iter()
        .map(|&(i, j)| {
            let hyp = Hypotheses::pair(&activities[i], &activities[j])?;
            let evs = cross_validate(&data, &hyp, &plan, system, kinds, cfg.seed)?;
            evs.iter().map(|ev| summarize(ev, cfg)).collect::<Result<Vec<PairCell>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((activities, pairs, cells))
}

/// Pairwise matrix: Cllr below the diagonal, Cllr_min above it and the
/// mean Cllr of each activity's pairings on the diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairwiseMatrixReport {
    pub activities: Vec<String>,
    pub calibrator: CalibratorKind,
    pub family: ScorerFamily,
    pub cells: Vec<PairCell>,
    /// `matrix[i][j]`: Cllr for `i > j`, Cllr_min for `i < j`, diagonal mean for `i == j`.
    pub matrix: Vec<Vec<Option<f64>>>,
}

impl PairwiseMatrixReport {
    fn build(activities: Vec<String>, calibrator: CalibratorKind, family: ScorerFamily, pairs: &[(usize, usize)], cells: Vec<PairCell>) -> Self {
        let n = activities.len();
        let mut matrix = vec![vec![None; n]; n];
        for (&(i, j), c) in pairs.iter().zip(&cells) {
            matrix[i][j] = c.cllr;
            matrix[j][i] = c.cllr_min;
        }
        for k in 0..n {
            let vals: Vec<f64> = pairs.iter().zip(&cells).filter(|((i, j), _)| *i == k || *j == k).filter_map(|(_, c)| c.cllr).collect();
            matrix[k][k] = (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64);
        }
        PairwiseMatrixReport {
            activities,
            calibrator,
            family,
            cells,
            matrix,
        }
    }

    pub fn diagonal(&self) -> Vec<Option<f64>> {
        (0..self.activities.len()).map(|k| self.matrix[k][k]).collect()
    }

    pub fn cell(&self, a: &str, b: &str) -> Option<&PairCell> {
        self.cells.iter().find(|c| (c.h1 == a && c.h2 == b) || (c.h1 == b && c.h2 == a))
    }

    pub fn present_cllrs(&self) -> Vec<f64> {
        self.cells.iter().filter_map(|c| c.cllr).collect()
    }

    pub fn mean_cllr(&self) -> Option<f64> {
        let v = self.present_cllrs();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Percentage of all pairings (absent ones count as failures) with Cllr below `t`.
    pub fn percent_below(&self, t: f64) -> f64 {
        if self.cells.is_empty() {
            return 0.0;
        }
        100.0 * self.present_cllrs().iter().filter(|&&c| c < t).count() as f64 / self.cells.len() as f64
    }

    pub fn mean_accuracy(&self) -> Option<f64> {
        let v: Vec<f64> = self.cells.iter().filter_map(|c| c.accuracy).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

pub fn pairwise_matrix(data: &LabeledDataset, cfg: &ExperimentConfig) -> Result<PairwiseMatrixReport> {
    let kind = cfg.system.calibrator;
    let (activities, pairs, mut cells) = run_pairs(data, cfg, &cfg.system, &[kind])?;
    let cells = cells.iter_mut().map(|c| c.remove(0)).collect();
    Ok(PairwiseMatrixReport::build(activities, kind, cfg.system.scorer.family, &pairs, cells))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub family: ScorerFamily,
    pub calibrator: CalibratorKind,
    /// Mean validation accuracy over pairings, in percent.
    pub accuracy: Option<f64>,
    pub mean_cllr: Option<f64>,
    /// `(threshold, percent of pairings below it)`.
    pub percent_below: Vec<(f64, f64)>,
    pub n_pairs: usize,
    pub n_absent: usize,
}

/// Scorer settings of `family` derived from the configured ones.
pub fn family_config(base: &ScorerConfig, family: ScorerFamily) -> ScorerConfig {
    if family == base.family {
        return base.clone();
    }
    let d = ScorerConfig::for_family(family);
    ScorerConfig {
        family,
        rounds: d.rounds,
        ..base.clone()
    }
}

/// Pairwise evaluation of every (family, calibrator) combination. Each
/// family's scorers are trained once per pair and fold and shared by all
/// calibrators.
pub fn ablation_sweep(data: &LabeledDataset, cfg: &ExperimentConfig) -> Result<Vec<AblationRow>> {
    let plan = &cfg.ablation;
    if plan.families.is_empty() || plan.calibrators.is_empty() {
        return Err(Error::InvalidInput("ablation needs at least one family and one calibrator".into()));
    }
    let mut rows = Vec::new();
    for &family in &plan.families {
        let system = LrSystemConfig {
            scorer: family_config(&cfg.system.scorer, family),
            ..cfg.system.clone()
        };
        let (activities, pairs, cells) = run_pairs(data, cfg, &system, &plan.calibrators)?;
        for (k, &kind) in plan.calibrators.iter().enumerate() {
            let report = PairwiseMatrixReport::build(activities.clone(), kind, family, &pairs, cells.iter().map(|c| c[k].clone()).collect());
            rows.push(AblationRow {
                family,
                calibrator: kind,
                accuracy: report.mean_accuracy().map(|a| 100.0 * a),
                mean_cllr: report.mean_cllr(),
                percent_below: CLLR_THRESHOLDS.iter().map(|&t| (t, report.percent_below(t))).collect(),
                n_pairs: report.cells.len(),
                n_absent: report.cells.iter().filter(|c| c.cllr.is_none()).count(),
            });
        }
    }
    Ok(rows)
}

/// Variable importance of every pairing's scorer (trained on all subjects),
/// averaged per activity over its pairings.
pub fn importance_map(data: &LabeledDataset, cfg: &ExperimentConfig) -> Result<ImportanceReport> {
    let activities = cfg.activity_list(data);
    if activities.len() < 2 {
        return Err(Error::InvalidInput("importance needs at least 2 activities".into()));
    }
    let data = cfg.restrict(data);
    let pairs: Vec<(usize, usize)> = (0..activities.len()).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
    let reports = pairs
        .par_iter()
        .map(|&(i, j)| {
            let hyp = Hypotheses::pair(&activities[i], &activities[j])?;
            let system = LrSystemConfig {
                scorer: ScorerConfig {
                    seed: derive_seed(cfg.seed, &format!("importance|{hyp}")),
                    ..cfg.system.scorer.clone()
                },
                ..cfg.system.clone()
            };
            let sys = LrSystem::fit(&data, &hyp, &system)?;
            let mut rep = variable_importance(&sys.model, &hyp.restrict(&data));
            rep.activities = vec![activities[i].clone(), activities[j].clone()];
            Ok(rep)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut agg = aggregate_importance(&reports);
    // present activities in vocabulary order
    let order: Vec<usize> = activities.iter().filter_map(|a| agg.activities.iter().position(|x| x == a)).collect();
    agg.values = order.iter().map(|&i| agg.values[i].clone()).collect();
    agg.activities = order.iter().map(|&i| agg.activities[i].clone()).collect();
    Ok(agg)
}
