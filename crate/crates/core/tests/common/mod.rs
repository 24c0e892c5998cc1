#![allow(dead_code)]

use chrono::{Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use trace2lr::ingest::{FeatureRow, FeatureValue, LabeledDataset, MinuteSample, Provenance, Variable, VariableKind, VariableSchema};

pub fn num(x: f64) -> Option<FeatureValue> {
    Some(FeatureValue::Number(x))
}

pub fn token(s: &str) -> Option<FeatureValue> {
    Some(FeatureValue::Token(s.to_string()))
}

pub fn schema(specs: &[(&str, VariableKind)]) -> VariableSchema {
    VariableSchema::new(specs.iter().map(|(n, k)| Variable::new(n, *k)).collect()).unwrap()
}

/// Rows of `(features, label, provenance)` stamped one minute apart.
pub fn dataset(schema: VariableSchema, rows: Vec<(FeatureRow, String, Provenance)>, vocabulary: Vec<String>) -> LabeledDataset {
    let t0 = Utc.with_ymd_and_hms(2022, 5, 2, 10, 0, 0).unwrap();
    let samples = rows
        .into_iter()
        .enumerate()
        .map(|(i, (features, label, provenance))| MinuteSample {
            minute: t0 + Duration::minutes(i as i64),
            features,
            label,
            coverage_seconds: 60.0,
            provenance,
        })
        .collect();
    LabeledDataset::new(schema, samples, vocabulary).unwrap()
}

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub const PHONES: [&str; 2] = ["iPhone 7", "iPhone XR"];
pub const LOCATIONS: [&str; 2] = ["hand", "front trouser pocket"];

/// Every (subject, phone, location) combination, so that every factor level
/// appears in every fold.
pub fn provenances(subjects: usize) -> Vec<Provenance> {
    let mut out = Vec::new();
    for s in 0..subjects {
        for p in PHONES {
            for l in LOCATIONS {
                out.push(Provenance::new(&format!("s{:02}", s + 1), p, l, "S1").unwrap());
            }
        }
    }
    out
}

/// Activities whose numeric variable `x` lives on disjoint intervals
/// `[10 k, 10 k + 1)`, with a categorical and a partly missing noise column.
pub fn disjoint_activities(activities: &[&str], per_provenance: usize, subjects: usize, seed: u64) -> LabeledDataset {
    let s = schema(&[
        ("x", VariableKind::NoncumulativeNumeric),
        ("kind", VariableKind::Categorical),
        ("noise", VariableKind::NoncumulativeNumeric),
    ]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for prov in provenances(subjects) {
        for (k, a) in activities.iter().enumerate() {
            for _ in 0..per_provenance {
                let x = 10.0 * k as f64 + rng.gen::<f64>();
                let kind = ["a", "b", "c"][rng.gen_range(0..3)];
                let noise = if rng.gen::<f64>() < 0.3 { None } else { num(gauss(&mut rng)) };
                rows.push((vec![num(x), token(kind), noise], a.to_string(), prov.clone()));
            }
        }
    }
    dataset(s, rows, activities.iter().map(|a| a.to_string()).collect())
}

/// Activities that differ only in a shifted Gaussian feature (overlapping).
pub fn overlapping_activities(activities: &[&str], shift: f64, per_provenance: usize, subjects: usize, seed: u64) -> LabeledDataset {
    let s = schema(&[("x", VariableKind::NoncumulativeNumeric), ("y", VariableKind::NoncumulativeNumeric)]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for prov in provenances(subjects) {
        for (k, a) in activities.iter().enumerate() {
            for _ in 0..per_provenance {
                let x = shift * k as f64 + gauss(&mut rng);
                rows.push((vec![num(x), num(gauss(&mut rng))], a.to_string(), prov.clone()));
            }
        }
    }
    dataset(s, rows, activities.iter().map(|a| a.to_string()).collect())
}

/// `n` scores per class from N(+mu, 1) and N(-mu, 1).
pub fn two_gaussians(n: usize, mu: f64, seed: u64) -> (Vec<f64>, Vec<trace2lr::Hyp>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scores = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(2 * n);
    for _ in 0..n {
        scores.push(mu + gauss(&mut rng));
        labels.push(trace2lr::Hyp::H1);
        scores.push(-mu + gauss(&mut rng));
        labels.push(trace2lr::Hyp::H2);
    }
    (scores, labels)
}
