//! Log-likelihood-ratio cost, its decomposition, multiclass cross-entropy and
//! diagnostic curves. Internal llrs are natural-log.

mod curves;
mod pav;

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use curves::{default_ece_grid, ece_curve, ece_value, pav_curve, tippett_curve, CurveData, CurveKind, Series};
pub use pav::{pav_llrs, pav_pools, pav_posteriors, PavPool};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Hyp {
    H1,
    H2,
}

impl std::fmt::Display for Hyp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Hyp::H1 => "H1",
            Hyp::H2 => "H2",
        })
    }
}

/// Natural-log llrs with their true hypotheses.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BinaryEvalSet {
    pub llrs: Vec<f64>,
    pub labels: Vec<Hyp>,
}

impl BinaryEvalSet {
    pub fn new(llrs: Vec<f64>, labels: Vec<Hyp>) -> Result<Self> {
        if llrs.len() != labels.len() {
            return Err(Error::InvalidInput(format!("{} llrs but {} labels", llrs.len(), labels.len())));
        }
        if llrs.iter().any(|x| x.is_nan()) {
            return Err(Error::InvalidInput("llr is NaN".into()));
        }
        Ok(BinaryEvalSet { llrs, labels })
    }

    /// From base-10 log LRs.
    pub fn from_log10(log10_lrs: &[f64], labels: Vec<Hyp>) -> Result<Self> {
        BinaryEvalSet::new(log10_lrs.iter().map(|x| x * std::f64::consts::LN_10).collect(), labels)
    }

    pub fn len(&self) -> usize {
        self.llrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.llrs.is_empty()
    }

    pub fn counts(&self) -> (usize, usize) {
        let n1 = self.labels.iter().filter(|h| **h == Hyp::H1).count();
        (n1, self.labels.len() - n1)
    }

    pub fn extend(&mut self, other: &BinaryEvalSet) {
        self.llrs.extend_from_slice(&other.llrs);
        self.labels.extend_from_slice(&other.labels);
    }

    fn require_both(&self) -> Result<(usize, usize)> {
        let (n1, n2) = self.counts();
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidInput(format!("evaluation set needs both hypotheses (H1: {n1}, H2: {n2})")));
        }
        Ok((n1, n2))
    }
}

/// `log2(1 + exp(x))` without overflow.
pub(crate) fn log2_1p_exp(x: f64) -> f64 {
    let v = if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
    v / LN_2
}

/// Log-likelihood-ratio cost in bits.
pub fn cllr(set: &BinaryEvalSet) -> Result<f64> {
    let (n1, n2) = set.require_both()?;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for (&l, h) in set.llrs.iter().zip(&set.labels) {
        match h {
            Hyp::H1 => s1 += log2_1p_exp(-l),
            Hyp::H2 => s2 += log2_1p_exp(l),
        }
    }
    Ok(0.5 * (s1 / n1 as f64 + s2 / n2 as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CllrReport {
    pub cllr: f64,
    pub cllr_min: f64,
    pub cllr_cal: f64,
}

/// Cllr after the optimal monotone recalibration of `scores`. Pools with
/// posterior 0 or 1 contribute their limiting cost of zero.
pub fn cllr_min(set: &BinaryEvalSet, scores: &[f64]) -> Result<f64> {
    let (n1, n2) = set.require_both()?;
    if scores.len() != set.len() {
        return Err(Error::InvalidInput("scores and evaluation set differ in length".into()));
    }
    let prior = (n1 as f64 / n2 as f64).ln();
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for pool in pav_pools(scores, &set.labels) {
        let h1 = pool.n1 as f64;
        let h2 = (pool.n - pool.n1) as f64;
        if h1 == 0.0 || h2 == 0.0 {
            continue;
        }
        let llr = (h1 / h2).ln() - prior;
        s1 += h1 * log2_1p_exp(-llr);
        s2 += h2 * log2_1p_exp(llr);
    }
    Ok(0.5 * (s1 / n1 as f64 + s2 / n2 as f64))
}

/// Cllr with its discrimination (`cllr_min`) and calibration (`cllr_cal`)
/// parts, using `scores` to order the samples.
pub fn cllr_decompose(set: &BinaryEvalSet, scores: &[f64]) -> Result<CllrReport> {
    let c = cllr(set)?;
    let m = cllr_min(set, scores)?;
    Ok(CllrReport {
        cllr: c,
        cllr_min: m,
        cllr_cal: c - m,
    })
}

impl CllrReport {
    /// Decomposition ordering samples by their own llrs.
    pub fn of(set: &BinaryEvalSet) -> Result<Self> {
        cllr_decompose(set, &set.llrs)
    }
}

/// `T x K` natural-log likelihoods with true class indices.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MulticlassEvalSet {
    pub n_classes: usize,
    pub loglik: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl MulticlassEvalSet {
    pub fn new(n_classes: usize, loglik: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if n_classes < 2 {
            return Err(Error::InvalidInput("need at least 2 classes".into()));
        }
        if loglik.len() != labels.len() {
            return Err(Error::InvalidInput(format!("{} rows but {} labels", loglik.len(), labels.len())));
        }
        for (row, &y) in loglik.iter().zip(&labels) {
            if row.len() != n_classes || y >= n_classes {
                return Err(Error::InvalidInput("row width or label outside the class range".into()));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("non-finite log-likelihood".into()));
            }
        }
        Ok(MulticlassEvalSet { n_classes, loglik, labels })
    }

    /// From likelihood (not log) vectors such as softmax outputs.
    pub fn from_likelihoods(n_classes: usize, likelihoods: &[Vec<f64>], labels: Vec<usize>) -> Result<Self> {
        let loglik = likelihoods.iter().map(|r| r.iter().map(|p| p.ln()).collect()).collect();
        MulticlassEvalSet::new(n_classes, loglik, labels)
    }

    pub fn extend(&mut self, other: &MulticlassEvalSet) {
        self.loglik.extend(other.loglik.iter().cloned());
        self.labels.extend_from_slice(&other.labels);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmxeReport {
    pub cmxe: f64,
    /// `cmxe / log2 K`; 1 means uninformative.
    pub normalized: f64,
}

/// Multiclass cross-entropy cost in bits, averaged per class.
pub fn cmxe(set: &MulticlassEvalSet) -> Result<CmxeReport> {
    let k = set.n_classes;
    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for (row, &y) in set.loglik.iter().zip(&set.labels) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        sums[y] += (lse - row[y]) / LN_2;
        counts[y] += 1;
    }
    if let Some(c) = counts.iter().position(|&c| c == 0) {
        return Err(Error::InvalidInput(format!("class {c} has no samples")));
    }
    let value = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).sum::<f64>() / k as f64;
    Ok(CmxeReport {
        cmxe: value,
        normalized: value / (k as f64).log2(),
    })
}

/// Fraction of exact matches.
pub fn accuracy(predictions: &[usize], labels: &[usize]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::InvalidInput("predictions and labels differ in length".into()));
    }
    if labels.is_empty() {
        return Err(Error::Empty("accuracy of an empty set".into()));
    }
    let hits = predictions.iter().zip(labels).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / labels.len() as f64)
}

#[cfg(test)]
mod tests;
