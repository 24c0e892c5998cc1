//! Score calibration, likelihood-ratio conversion and ELUB bounding.

mod density;
mod logistic;
mod system;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::Hyp;

pub use density::{fit_gaussian, fit_kde, silverman_bandwidth, GaussianCalibrator, KdeCalibrator};
pub use logistic::{fit_logistic, LogisticCalibrator, MAX_SLOPE, MIN_SLOPE};
pub use system::{multiclass_likelihoods, Hypotheses, LrSystem, LrSystemConfig, DEFAULT_CALIBRATION_FOLDS};

/// Posteriors are clamped to `[POSTERIOR_CLAMP, 1 - POSTERIOR_CLAMP]`
/// before conversion to odds.
pub const POSTERIOR_CLAMP: f64 = 1e-9;

fn max_log_odds() -> f64 {
    ((1.0 - POSTERIOR_CLAMP) / POSTERIOR_CLAMP).ln()
}

pub(crate) fn check_inputs(scores: &[f64], labels: &[Hyp]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidInput(format!("{} scores but {} labels", scores.len(), labels.len())));
    }
    if let Some(s) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite score {s}")));
    }
    let n1 = labels.iter().filter(|h| **h == Hyp::H1).count();
    let n2 = labels.len() - n1;
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidInput(format!("calibration needs both hypotheses (H1: {n1}, H2: {n2})")));
    }
    Ok((n1, n2))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibratorKind {
    #[default]
    Logistic,
    Gaussian,
    Kde,
}

impl std::fmt::Display for CalibratorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CalibratorKind::Logistic => "logistic",
            CalibratorKind::Gaussian => "gaussian",
            CalibratorKind::Kde => "kde",
        })
    }
}

impl std::str::FromStr for CalibratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logistic" | "logreg" => Ok(CalibratorKind::Logistic),
            "gaussian" | "gauss" => Ok(CalibratorKind::Gaussian),
            "kde" => Ok(CalibratorKind::Kde),
            other => Err(Error::InvalidInput(format!("unknown calibrator `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Calibrator {
    Logistic(LogisticCalibrator),
    Gaussian(GaussianCalibrator),
    Kde(KdeCalibrator),
}

impl Calibrator {
    /// Fits a calibrator. `weights` are used by the logistic fit only.
    pub fn fit(kind: CalibratorKind, scores: &[f64], labels: &[Hyp], weights: Option<&[f64]>) -> Result<Self> {
        Ok(match kind {
            CalibratorKind::Logistic => Calibrator::Logistic(fit_logistic(scores, labels, weights)?),
            CalibratorKind::Gaussian => Calibrator::Gaussian(fit_gaussian(scores, labels)?),
            CalibratorKind::Kde => Calibrator::Kde(fit_kde(scores, labels)?),
        })
    }

    pub fn kind(&self) -> CalibratorKind {
        match self {
            Calibrator::Logistic(_) => CalibratorKind::Logistic,
            Calibrator::Gaussian(_) => CalibratorKind::Gaussian,
            Calibrator::Kde(_) => CalibratorKind::Kde,
        }
    }

    /// Natural-log posterior odds of H1, unclamped.
    pub fn log_odds(&self, s: f64) -> f64 {
        match self {
            Calibrator::Logistic(c) => c.log_odds(s),
            Calibrator::Gaussian(c) => c.log_odds(s),
            Calibrator::Kde(c) => c.log_odds(s),
        }
    }

    pub fn posterior(&self, s: f64) -> f64 {
        logistic::sigmoid(self.log_odds(s))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorOdds {
    pub value: f64,
    pub n1: usize,
    pub n2: usize,
}

pub fn prior_odds_from_counts(n1: usize, n2: usize) -> Result<PriorOdds> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidInput(format!("prior odds need positive counts, got {n1}/{n2}")));
    }
    Ok(PriorOdds {
        value: n1 as f64 / n2 as f64,
        n1,
        n2,
    })
}

/// `(p / (1 - p)) / prior`, with `p` clamped away from 0 and 1.
pub fn posterior_to_lr(p: f64, prior: &PriorOdds) -> f64 {
    let p = p.clamp(POSTERIOR_CLAMP, 1.0 - POSTERIOR_CLAMP);
    (p / (1.0 - p)) / prior.value
}

/// Label carried by bounds produced by [`compute_elub`].
pub const ELUB_SURROGATE: &str = "elub_surrogate";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElubBounds {
    pub lower_log10: f64,
    pub upper_log10: f64,
    pub method: String,
}

impl ElubBounds {
    pub fn new(lower_log10: f64, upper_log10: f64) -> Result<Self> {
        if !(lower_log10 <= 0.0 && 0.0 <= upper_log10) {
            return Err(Error::InvalidInput(format!("bounds [{lower_log10}, {upper_log10}] must contain 0")));
        }
        Ok(ElubBounds {
            lower_log10,
            upper_log10,
            method: "fixed".into(),
        })
    }

    pub fn clamp_log10(&self, log10_lr: f64) -> f64 {
        log10_lr.clamp(self.lower_log10, self.upper_log10)
    }
}

/// Conservative empirical bounds: the range of training LRs, capped at
/// `log10(n + 1)` of the opposing class count, and always containing 0.
pub fn compute_elub(scores: &[f64], labels: &[Hyp], calibrator: &Calibrator, prior: &PriorOdds) -> Result<ElubBounds> {
    let (n1, n2) = check_inputs(scores, labels)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &s in scores {
        let l = raw_log10_lr(calibrator, prior, s);
        lo = lo.min(l);
        hi = hi.max(l);
    }
    Ok(ElubBounds {
        lower_log10: lo.max(-((n1 + 1) as f64).log10()).min(0.0),
        upper_log10: hi.min(((n2 + 1) as f64).log10()).max(0.0),
        method: ELUB_SURROGATE.into(),
    })
}

/// `log10(result) = clamp(log10(lr), lower, upper)`.
pub fn apply_bounds(lr: f64, bounds: &ElubBounds) -> f64 {
    10f64.powf(bounds.clamp_log10(lr.log10()))
}

/// log10 LR before bounding, with the posterior clamp applied.
pub fn raw_log10_lr(calibrator: &Calibrator, prior: &PriorOdds, score: f64) -> f64 {
    let l = max_log_odds();
    (calibrator.log_odds(score).clamp(-l, l) - prior.value.ln()) / std::f64::consts::LN_10
}

/// Calibrator, prior odds and bounds fitted together on one set of scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreCalibration {
    pub calibrator: Calibrator,
    pub prior_odds: PriorOdds,
    pub bounds: ElubBounds,
}

impl ScoreCalibration {
    /// With `weights`, the prior odds become the ratio of total H1 to H2
    /// weight, which is the prior the weighted logistic fit has learned.
    pub fn fit(kind: CalibratorKind, scores: &[f64], labels: &[Hyp], weights: Option<&[f64]>) -> Result<Self> {
        let (n1, n2) = check_inputs(scores, labels)?;
        let weights = weights.filter(|_| kind == CalibratorKind::Logistic);
        let calibrator = Calibrator::fit(kind, scores, labels, weights)?;
        let mut prior_odds = prior_odds_from_counts(n1, n2)?;
        if let Some(w) = weights {
            let w1: f64 = w.iter().zip(labels).filter(|p| *p.1 == Hyp::H1).map(|p| p.0).sum();
            let w2: f64 = w.iter().zip(labels).filter(|p| *p.1 == Hyp::H2).map(|p| p.0).sum();
            prior_odds.value = w1 / w2;
        }
        let bounds = compute_elub(scores, labels, &calibrator, &prior_odds)?;
        Ok(ScoreCalibration {
            calibrator,
            prior_odds,
            bounds,
        })
    }

    pub fn log10_lr(&self, score: f64) -> f64 {
        self.bounds.clamp_log10(raw_log10_lr(&self.calibrator, &self.prior_odds, score))
    }

    pub fn lr(&self, score: f64) -> f64 {
        10f64.powf(self.log10_lr(score))
    }
}

#[cfg(test)]
mod tests;
