use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Factor, LabeledDataset, VariableKind};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableSummary {
    pub name: String,
    pub kind: VariableKind,
    pub missing_rate: f64,
}

/// Inventory of a labelled dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemaReport {
    pub n_samples: usize,
    pub variables: Vec<VariableSummary>,
    /// One entry per vocabulary activity, zero counts included.
    pub activity_counts: BTreeMap<String, usize>,
    pub subjects: BTreeMap<String, usize>,
    pub phones: BTreeMap<String, usize>,
    pub locations: BTreeMap<String, usize>,
    pub sessions: BTreeMap<String, usize>,
}

pub fn dataset_summary(dataset: &LabeledDataset) -> Result<SchemaReport> {
    if dataset.is_empty() {
        return Err(Error::Empty("dataset has no samples".into()));
    }
    let n = dataset.len();
    let variables = dataset
        .schema
        .variables()
        .iter()
        .enumerate()
        .map(|(i, v)| VariableSummary {
            name: v.name.clone(),
            kind: v.kind,
            missing_rate: dataset.samples.iter().filter(|s| s.features[i].is_none()).count() as f64 / n as f64,
        })
        .collect();
    let mut activity_counts: BTreeMap<String, usize> = dataset.activity_vocabulary.iter().map(|a| (a.clone(), 0)).collect();
    for s in &dataset.samples {
        *activity_counts.entry(s.label.clone()).or_default() += 1;
    }
    let levels = |f: Factor| {
        let mut m = BTreeMap::new();
        for s in &dataset.samples {
            *m.entry(s.provenance.level(f).to_string()).or_insert(0) += 1;
        }
        m
    };
    Ok(SchemaReport {
        n_samples: n,
        variables,
        activity_counts,
        subjects: levels(Factor::Subject),
        phones: levels(Factor::Phone),
        locations: levels(Factor::Location),
        sessions: levels(Factor::Session),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{default_vocabulary, FeatureValue, MinuteSample, Provenance, Variable, VariableSchema};
    use crate::synthetic::{SyntheticConfig, SyntheticDataset};

    #[test]
    fn empty_dataset_is_error() {
        let d = LabeledDataset::new(VariableSchema::new(vec![]).unwrap(), vec![], default_vocabulary()).unwrap();
        assert!(dataset_summary(&d).is_err());
    }

    #[test]
    fn nineteen_activity_rows_and_consistent_counts() {
        let mut cfg = SyntheticConfig::small(1);
        cfg.activities = default_vocabulary();
        let d = SyntheticDataset::generate(&cfg).dataset;
        let r = dataset_summary(&d).unwrap();
        assert_eq!(r.activity_counts.len(), 19);
        assert_eq!(r.activity_counts.values().sum::<usize>(), r.n_samples);
        assert!(r.variables.iter().all(|v| (0.0..=1.0).contains(&v.missing_rate)));
    }

    #[test]
    fn missing_rates_of_single_sample() {
        let vars: Vec<Variable> = (0..35)
            .map(|i| Variable::new(&format!("v{i}"), VariableKind::NoncumulativeNumeric))
            .collect();
        let schema = VariableSchema::new(vars).unwrap();
        let mut features: Vec<Option<FeatureValue>> = (0..35).map(|i| Some(FeatureValue::Number(i as f64))).collect();
        features[7] = None;
        let s = MinuteSample {
            minute: crate::ingest::parse_timestamp("2022-05-02T10:00:00").unwrap(),
            features,
            label: "walking".into(),
            coverage_seconds: 60.0,
            provenance: Provenance::new("s", "p", "l", "S").unwrap(),
        };
        let d = LabeledDataset::new(schema, vec![s], default_vocabulary()).unwrap();
        let r = dataset_summary(&d).unwrap();
        assert_eq!(r.variables[7].missing_rate, 1.0);
        assert_eq!(r.variables[0].missing_rate, 0.0);
    }
}
