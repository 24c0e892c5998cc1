use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::derive_seed;
use crate::error::{Error, Result};
use crate::ingest::{Factor, Provenance};

const MAX_REDRAWS: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapPlan {
    pub replicates: usize,
    pub seed: u64,
    /// Factors whose levels are resampled with replacement.
    pub factors: Vec<Factor>,
}

impl Default for BootstrapPlan {
    fn default() -> Self {
        BootstrapPlan {
            replicates: 1000,
            seed: 0,
            factors: vec![Factor::Phone, Factor::Location],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    /// Mean of each metric over replicates.
    pub means: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// `replicates[r][m]`: metric `m` in replicate `r`.
    pub replicates: Vec<Vec<f64>>,
    /// Draws rejected because they selected no usable rows.
    pub redraws: usize,
}

/// Resamples the levels of each factor with replacement. A row enters a
/// replicate once per combination of drawn levels it matches, i.e. with
/// multiplicity equal to the product of its levels' draw counts. `metric`
/// receives the row indices (with repeats) and returns one or more values; a
/// draw it rejects with an error is redrawn, at most 100 times in a row.
pub fn multilevel_bootstrap<F>(provenance: &[&Provenance], plan: &BootstrapPlan, metric: F) -> Result<BootstrapResult>
where
    F: Fn(&[usize]) -> Result<Vec<f64>> + Sync,
{
    if provenance.is_empty() {
        return Err(Error::Empty("bootstrap over zero rows".into()));
    }
    if plan.replicates == 0 {
        return Err(Error::InvalidInput("bootstrap needs at least one replicate".into()));
    }
    // level index of every row for every factor
    let mut level_names: Vec<Vec<&str>> = Vec::new();
    let mut row_levels: Vec<Vec<usize>> = vec![Vec::new(); provenance.len()];
    for &factor in &plan.factors {
        let mut names: Vec<&str> = provenance.iter().map(|p| p.level(factor)).collect();
        names.sort_unstable();
        names.dedup();
        let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        for (r, p) in provenance.iter().enumerate() {
            row_levels[r].push(index[p.level(factor)]);
        }
        level_names.push(names);
    }
    let results: Vec<Result<(Vec<f64>, usize)>> = (0..plan.replicates)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(plan.seed, &format!("replicate-{rep}")));
            let mut last_err = None;
            for attempt in 0..=MAX_REDRAWS {
                let counts: Vec<Vec<usize>> = level_names
                    .iter()
                    .map(|names| {
                        let mut c = vec![0usize; names.len()];
                        for _ in 0..names.len() {
                            c[rng.gen_range(0..names.len())] += 1;
                        }
                        c
                    })
                    .collect();
                let mut rows = Vec::new();
                for (r, levels) in row_levels.iter().enumerate() {
                    let mult: usize = levels.iter().zip(&counts).map(|(&l, c)| c[l]).product();
                    rows.extend(std::iter::repeat_n(r, mult));
                }
                if rows.is_empty() {
                    continue;
                }
                match metric(&rows) {
                    Ok(v) => return Ok((v, attempt)),
                    Err(e) => last_err = Some(e),
                }
            }
            Err(last_err.unwrap_or_else(|| Error::Validation(format!("bootstrap replicate {rep}: no usable draw in {MAX_REDRAWS} redraws"))))
        })
        .collect();
    let mut replicates = Vec::with_capacity(plan.replicates);
    let mut redraws = 0;
    for r in results {
        let (v, a) = r?;
        redraws += a;
        replicates.push(v);
    }
    let m = replicates[0].len();
    let n = replicates.len() as f64;
    let means: Vec<f64> = (0..m).map(|j| replicates.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let std_errors = (0..m)
        .map(|j| {
            if replicates.len() < 2 {
                return 0.0;
            }
            let var = replicates.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / (n - 1.0);
            var.sqrt()
        })
        .collect();
    Ok(BootstrapResult {
        means,
        std_errors,
        replicates,
        redraws,
    })
}
