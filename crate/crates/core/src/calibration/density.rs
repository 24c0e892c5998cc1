//! Density-ratio calibrators: one Gaussian or one kernel density per hypothesis.

use serde::{Deserialize, Serialize};

use super::check_inputs;
use crate::error::{Error, Result};
use crate::metrics::Hyp;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

fn log_normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    -0.5 * z * z - sigma.ln() - LN_SQRT_2PI
}

fn split(scores: &[f64], labels: &[Hyp]) -> (Vec<f64>, Vec<f64>) {
    let mut h1 = Vec::new();
    let mut h2 = Vec::new();
    for (&s, h) in scores.iter().zip(labels) {
        match h {
            Hyp::H1 => h1.push(s),
            Hyp::H2 => h2.push(s),
        }
    }
    (h1, h2)
}

/// Sample mean and unbiased standard deviation.
fn moments(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn class_moments(x: &[f64], hyp: &str) -> Result<(f64, f64)> {
    if x.len() < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 {hyp} scores, got {}", x.len())));
    }
    let (mean, sd) = moments(x);
    if !(sd > 0.0) {
        return Err(Error::InvalidInput(format!(
            "{hyp} scores have zero variance; use the logistic calibrator instead"
        )));
    }
    Ok((mean, sd))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianCalibrator {
    pub mu1: f64,
    pub sigma1: f64,
    pub mu2: f64,
    pub sigma2: f64,
    /// Training proportion of H1 scores.
    pub prior1: f64,
}

impl GaussianCalibrator {
    pub fn log_odds(&self, s: f64) -> f64 {
        log_normal_pdf(s, self.mu1, self.sigma1) - log_normal_pdf(s, self.mu2, self.sigma2) + (self.prior1 / (1.0 - self.prior1)).ln()
    }

    pub fn posterior(&self, s: f64) -> f64 {
        super::logistic::sigmoid(self.log_odds(s))
    }
}

pub fn fit_gaussian(scores: &[f64], labels: &[Hyp]) -> Result<GaussianCalibrator> {
    check_inputs(scores, labels)?;
    let (h1, h2) = split(scores, labels);
    let (mu1, sigma1) = class_moments(&h1, "H1")?;
    let (mu2, sigma2) = class_moments(&h2, "H2")?;
    Ok(GaussianCalibrator {
        mu1,
        sigma1,
        mu2,
        sigma2,
        prior1: h1.len() as f64 / scores.len() as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KdeCalibrator {
    pub scores1: Vec<f64>,
    pub scores2: Vec<f64>,
    pub bandwidth1: f64,
    pub bandwidth2: f64,
}

/// Rule-of-thumb bandwidth `1.06 sd n^(-1/5)`.
pub fn silverman_bandwidth(x: &[f64]) -> f64 {
    1.06 * moments(x).1 * (x.len() as f64).powf(-0.2)
}

fn log_kde(s: f64, points: &[f64], h: f64) -> f64 {
    let logs: Vec<f64> = points.iter().map(|&x| log_normal_pdf(s, x, h)).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln() - (points.len() as f64).ln()
}

impl KdeCalibrator {
    pub fn log_density1(&self, s: f64) -> f64 {
        log_kde(s, &self.scores1, self.bandwidth1)
    }

    pub fn log_density2(&self, s: f64) -> f64 {
        log_kde(s, &self.scores2, self.bandwidth2)
    }

    pub fn log_odds(&self, s: f64) -> f64 {
        let (n1, n2) = (self.scores1.len() as f64, self.scores2.len() as f64);
        let ratio = self.log_density1(s) - self.log_density2(s) + (n1 / n2).ln();
        // far from both samples the log-densities are dominated by quadratics
        // of different widths and stay finite; guard the degenerate case anyway
        if ratio.is_nan() {
            0.0
        } else {
            ratio
        }
    }

    pub fn posterior(&self, s: f64) -> f64 {
        super::logistic::sigmoid(self.log_odds(s))
    }
}

pub fn fit_kde(scores: &[f64], labels: &[Hyp]) -> Result<KdeCalibrator> {
    check_inputs(scores, labels)?;
    let (h1, h2) = split(scores, labels);
    class_moments(&h1, "H1")?;
    class_moments(&h2, "H2")?;
    Ok(KdeCalibrator {
        bandwidth1: silverman_bandwidth(&h1),
        bandwidth2: silverman_bandwidth(&h2),
        scores1: h1,
        scores2: h2,
    })
}
