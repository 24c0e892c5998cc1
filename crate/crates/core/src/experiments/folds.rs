use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Factor, LabeledDataset};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub index: usize,
    pub train_subjects: BTreeSet<String>,
    pub validation_subjects: BTreeSet<String>,
}

impl Fold {
    pub fn train(&self, data: &LabeledDataset) -> LabeledDataset {
        data.filter(|s| self.train_subjects.contains(&s.provenance.subject_id))
    }

    pub fn validation(&self, data: &LabeledDataset) -> LabeledDataset {
        data.filter(|s| self.validation_subjects.contains(&s.provenance.subject_id))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvPlan {
    pub folds: Vec<Fold>,
}

/// Partitions the subjects of `dataset` into `n_folds` validation groups
/// after a seeded shuffle; fold `i` trains on all other groups.
pub fn subjectwise_folds(dataset: &LabeledDataset, n_folds: usize, seed: u64) -> Result<CvPlan> {
    let mut subjects = dataset.levels(Factor::Subject);
    if n_folds < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 folds, got {n_folds}")));
    }
    if subjects.len() < n_folds {
        return Err(Error::InvalidInput(format!(
            "{n_folds} folds need at least {n_folds} subjects, dataset has {}",
            subjects.len()
        )));
    }
    subjects.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut groups = vec![BTreeSet::new(); n_folds];
    for (i, s) in subjects.iter().enumerate() {
        groups[i % n_folds].insert(s.clone());
    }
    let folds = (0..n_folds)
        .map(|i| Fold {
            index: i,
            validation_subjects: groups[i].clone(),
            train_subjects: groups.iter().enumerate().filter(|(j, _)| *j != i).flat_map(|(_, g)| g.iter().cloned()).collect(),
        })
        .collect();
    Ok(CvPlan { folds })
}
