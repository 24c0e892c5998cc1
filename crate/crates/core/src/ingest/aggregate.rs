use std::collections::BTreeMap;

use chrono::{DateTime, Utc};

use super::registrations::truncate_to_minute;
use super::{FeatureValue, Provenance, RawRegistration, VariableKind, VariableSchema};

/// Feature values in schema order, `None` meaning no registration.
pub type FeatureRow = Vec<Option<FeatureValue>>;

/// Aggregated features keyed by provenance and minute.
pub type MinuteFeatures = BTreeMap<(Provenance, DateTime<Utc>), FeatureRow>;

/// Most frequent token; ties go to the lexicographically smallest.
pub fn mode_token<'a>(tokens: impl IntoIterator<Item = &'a str>) -> Option<&'a str> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in tokens {
        *counts.entry(t).or_default() += 1;
    }
    let mut best: Option<(&str, usize)> = None;
    for (t, c) in counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((t, c));
        }
    }
    best.map(|(t, _)| t)
}

enum Acc<'a> {
    Tokens(Vec<&'a str>),
    Sum(f64, usize),
    Mean(f64, usize),
}

/// Aggregates the given registrations into one feature row: mode for
/// categorical, sum for cumulative and mean for non-cumulative variables.
/// Registrations of unknown variables or of the wrong value type are ignored.
pub fn aggregate_registrations<'a>(regs: impl IntoIterator<Item = &'a RawRegistration>, schema: &VariableSchema) -> FeatureRow {
    let mut accs: Vec<Acc<'a>> = schema
        .variables()
        .iter()
        .map(|v| match v.kind {
            VariableKind::Categorical => Acc::Tokens(Vec::new()),
            VariableKind::CumulativeNumeric => Acc::Sum(0.0, 0),
            VariableKind::NoncumulativeNumeric => Acc::Mean(0.0, 0),
        })
        .collect();
    for r in regs {
        let Some(i) = schema.index_of(&r.variable) else { continue };
        match (&mut accs[i], &r.value) {
            (Acc::Tokens(ts), FeatureValue::Token(t)) => ts.push(t),
            (Acc::Sum(s, n), FeatureValue::Number(x)) | (Acc::Mean(s, n), FeatureValue::Number(x)) => {
                *s += x;
                *n += 1;
            }
            _ => {}
        }
    }
    accs.into_iter()
        .map(|a| match a {
            Acc::Tokens(ts) => mode_token(ts.iter().copied()).map(|t| FeatureValue::Token(t.to_string())),
            Acc::Sum(_, 0) | Acc::Mean(_, 0) => None,
            Acc::Sum(s, _) => Some(FeatureValue::Number(s)),
            Acc::Mean(s, n) => Some(FeatureValue::Number(s / n as f64)),
        })
        .collect()
}

/// Groups registrations by provenance and UTC minute and aggregates each group.
pub fn aggregate_to_minutes(registrations: &[RawRegistration], schema: &VariableSchema) -> MinuteFeatures {
    let mut groups: BTreeMap<(Provenance, DateTime<Utc>), Vec<&RawRegistration>> = BTreeMap::new();
    for r in registrations {
        groups
            .entry((r.provenance.clone(), truncate_to_minute(r.timestamp)))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|(k, regs)| (k, aggregate_registrations(regs, schema)))
        .collect()
}
