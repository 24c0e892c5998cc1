//! Pool-adjacent-violators isotonic regression of H1 indicators on scores.

use serde::{Deserialize, Serialize};

use super::{BinaryEvalSet, Hyp};
use crate::error::{Error, Result};

/// A maximal run of score-sorted samples sharing one fitted posterior.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PavPool {
    pub lo: f64,
    pub hi: f64,
    pub n1: usize,
    pub n: usize,
}

impl PavPool {
    pub fn posterior(&self) -> f64 {
        self.n1 as f64 / self.n as f64
    }

    /// `a.posterior() >= b.posterior()` in exact integer arithmetic.
    fn not_below(&self, other: &PavPool) -> bool {
        (self.n1 as u128) * (other.n as u128) >= (other.n1 as u128) * (self.n as u128)
    }

    fn merge(&mut self, other: PavPool) {
        self.hi = other.hi;
        self.n1 += other.n1;
        self.n += other.n;
    }
}

fn sorted_order(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    idx
}

/// Pools in increasing score order. Tied scores always share a pool, and
/// adjacent pools with equal posteriors are merged, so posteriors strictly
/// increase from pool to pool.
pub fn pav_pools(scores: &[f64], labels: &[Hyp]) -> Vec<PavPool> {
    let order = sorted_order(scores);
    let mut stack: Vec<PavPool> = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let mut block = PavPool { lo: s, hi: s, n1: 0, n: 0 };
        while i < order.len() && scores[order[i]] == s {
            block.n += 1;
            if labels[order[i]] == Hyp::H1 {
                block.n1 += 1;
            }
            i += 1;
        }
        while let Some(top) = stack.last() {
            if top.not_below(&block) {
                let mut top = stack.pop().unwrap();
                top.merge(block);
                block = top;
            } else {
                break;
            }
        }
        stack.push(block);
    }
    stack
}

/// Fitted H1 posterior of each sample, in input order.
pub fn pav_posteriors(scores: &[f64], labels: &[Hyp]) -> Vec<f64> {
    let order = sorted_order(scores);
    let mut out = vec![0.0; scores.len()];
    let mut pos = 0;
    for pool in pav_pools(scores, labels) {
        for &i in &order[pos..pos + pool.n] {
            out[i] = pool.posterior();
        }
        pos += pool.n;
    }
    out
}

/// Optimal llrs for `scores` relative to the prior odds of `set`. Pools with
/// posterior 0 or 1 use `(n1 + 0.5) / (n + 1)`, limited by the neighbouring
/// pool, so the llrs stay finite and monotone.
pub fn pav_llrs(set: &BinaryEvalSet, scores: &[f64]) -> Result<Vec<f64>> {
    let (n1, n2) = set.require_both()?;
    if scores.len() != set.len() {
        return Err(Error::InvalidInput("scores and evaluation set differ in length".into()));
    }
    let prior = (n1 as f64 / n2 as f64).ln();
    let order = sorted_order(scores);
    let mut out = vec![0.0; scores.len()];
    let mut pos = 0;
    let pools = pav_pools(scores, &set.labels);
    for (j, pool) in pools.iter().enumerate() {
        let smoothed = (pool.n1 as f64 + 0.5) / (pool.n as f64 + 1.0);
        // smoothing must not cross a neighbouring pool
        let p = if pool.n1 == 0 {
            pools.get(j + 1).map_or(smoothed, |next| smoothed.min(next.posterior()))
        } else if pool.n1 == pool.n {
            j.checked_sub(1).map_or(smoothed, |prev| smoothed.max(pools[prev].posterior()))
        } else {
            pool.posterior()
        };
        let llr = (p / (1.0 - p)).ln() - prior;
        for &i in &order[pos..pos + pool.n] {
            out[i] = llr;
        }
        pos += pool.n;
    }
    Ok(out)
}
