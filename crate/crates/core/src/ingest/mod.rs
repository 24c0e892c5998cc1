//! Trace ingestion: raw registrations and activity intervals in, labelled
//! one-minute samples out.

mod aggregate;
mod dataset_io;
mod labels;
mod registrations;
mod schema;
mod summary;

use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use aggregate::{aggregate_registrations, aggregate_to_minutes, mode_token, FeatureRow, MinuteFeatures};
pub use dataset_io::{read_dataset, read_dataset_csv, write_dataset, write_dataset_csv};
pub use labels::attach_labels;
pub use registrations::{load_intervals, load_registrations, parse_timestamp, truncate_to_minute, ActivityInterval, ColumnNames, RawRegistration};
pub use schema::{Variable, VariableKind, VariableSchema};
pub use summary::{dataset_summary, SchemaReport, VariableSummary};

/// The nineteen activities recorded in the reference experiments.
pub const DEFAULT_ACTIVITIES: [&str; 19] = [
    "walking",
    "running",
    "cycling",
    "bus",
    "car",
    "train",
    "tram",
    "dragging",
    "kicking",
    "punching",
    "throwing",
    "elevator_up",
    "elevator_down",
    "escalator_up",
    "escalator_down",
    "stairs_up",
    "stairs_down",
    "sitting",
    "standing",
];

pub fn default_vocabulary() -> Vec<String> {
    DEFAULT_ACTIVITIES.iter().map(|s| s.to_string()).collect()
}

/// A single variable reading. Missing readings are `None` in a [`FeatureRow`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureValue {
    Number(f64),
    Token(String),
}

impl FeatureValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            FeatureValue::Number(x) => Some(*x),
            FeatureValue::Token(_) => None,
        }
    }

    pub fn as_token(&self) -> Option<&str> {
        match self {
            FeatureValue::Token(t) => Some(t),
            FeatureValue::Number(_) => None,
        }
    }

    pub fn matches(&self, kind: VariableKind) -> bool {
        matches!(
            (self, kind),
            (FeatureValue::Token(_), VariableKind::Categorical)
                | (FeatureValue::Number(_), VariableKind::CumulativeNumeric)
                | (FeatureValue::Number(_), VariableKind::NoncumulativeNumeric)
        )
    }
}

/// Who carried which phone where, and in which session.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub subject_id: String,
    pub phone_model: String,
    pub carry_location: String,
    pub session: String,
}

impl Provenance {
    pub fn new(subject: &str, phone: &str, location: &str, session: &str) -> Result<Self> {
        let p = Provenance {
            subject_id: subject.to_string(),
            phone_model: phone.to_string(),
            carry_location: location.to_string(),
            session: session.to_string(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("subject", &self.subject_id),
            ("phone", &self.phone_model),
            ("location", &self.carry_location),
            ("session", &self.session),
        ] {
            if v.is_empty() {
                return Err(Error::Validation(format!("provenance field `{name}` is empty")));
            }
        }
        Ok(())
    }

    pub fn level(&self, factor: Factor) -> &str {
        match factor {
            Factor::Subject => &self.subject_id,
            Factor::Phone => &self.phone_model,
            Factor::Location => &self.carry_location,
            Factor::Session => &self.session,
        }
    }
}

/// Provenance dimensions that samples can be grouped or resampled by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    Subject,
    #[serde(alias = "phone_model")]
    Phone,
    #[serde(alias = "carry_location")]
    Location,
    Session,
}

impl std::str::FromStr for Factor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subject" => Ok(Factor::Subject),
            "phone" | "phone_model" => Ok(Factor::Phone),
            "location" | "carry_location" => Ok(Factor::Location),
            "session" => Ok(Factor::Session),
            other => Err(Error::InvalidInput(format!("unknown factor `{other}`"))),
        }
    }
}

/// One aggregated minute of trace data with its activity label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinuteSample {
    pub minute: DateTime<Utc>,
    /// Values in schema order; `None` is a missing value.
    pub features: FeatureRow,
    pub label: String,
    pub coverage_seconds: f64,
    pub provenance: Provenance,
}

/// The canonical labelled dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub schema: VariableSchema,
    pub samples: Vec<MinuteSample>,
    pub activity_vocabulary: Vec<String>,
}

impl LabeledDataset {
    /// Validates the samples against the schema and vocabulary and sorts them
    /// by `(provenance, minute)`. Split minutes keep their relative order.
    pub fn new(schema: VariableSchema, mut samples: Vec<MinuteSample>, activity_vocabulary: Vec<String>) -> Result<Self> {
        let vocab: BTreeSet<&str> = activity_vocabulary.iter().map(String::as_str).collect();
        for s in &samples {
            if s.features.len() != schema.len() {
                return Err(Error::Validation(format!(
                    "sample at {} has {} features, schema has {}",
                    s.minute,
                    s.features.len(),
                    schema.len()
                )));
            }
            for (v, var) in s.features.iter().zip(schema.variables()) {
                if let Some(v) = v {
                    if !v.matches(var.kind) {
                        return Err(Error::Validation(format!(
                            "value of `{}` at {} does not match kind {:?}",
                            var.name, s.minute, var.kind
                        )));
                    }
                }
            }
            if !vocab.contains(s.label.as_str()) {
                return Err(Error::Validation(format!("label `{}` not in activity vocabulary", s.label)));
            }
            if !(s.coverage_seconds > 0.0 && s.coverage_seconds <= 60.0) {
                return Err(Error::Validation(format!(
                    "coverage {} at {} outside (0, 60]",
                    s.coverage_seconds, s.minute
                )));
            }
            s.provenance.validate()?;
        }
        samples.sort_by(|a, b| (&a.provenance, a.minute).cmp(&(&b.provenance, b.minute)));
        for w in samples.windows(2) {
            if w[0].provenance == w[1].provenance && w[0].minute == w[1].minute && w[0].label == w[1].label {
                return Err(Error::Validation(format!(
                    "duplicate sample for {:?} at {} with label `{}`",
                    w[0].provenance.subject_id, w[0].minute, w[0].label
                )));
            }
        }
        Ok(LabeledDataset {
            schema,
            samples,
            activity_vocabulary,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Distinct levels of a provenance factor, sorted.
    pub fn levels(&self, factor: Factor) -> Vec<String> {
        let set: BTreeSet<&str> = self.samples.iter().map(|s| s.provenance.level(factor)).collect();
        set.into_iter().map(str::to_string).collect()
    }

    /// Labels that actually occur, in vocabulary order.
    pub fn present_labels(&self) -> Vec<String> {
        let present: BTreeSet<&str> = self.samples.iter().map(|s| s.label.as_str()).collect();
        self.activity_vocabulary
            .iter()
            .filter(|l| present.contains(l.as_str()))
            .cloned()
            .collect()
    }

    /// A view keeping only samples matching `keep`. No revalidation is needed.
    pub fn filter(&self, keep: impl Fn(&MinuteSample) -> bool) -> LabeledDataset {
        LabeledDataset {
            schema: self.schema.clone(),
            samples: self.samples.iter().filter(|s| keep(s)).cloned().collect(),
            activity_vocabulary: self.activity_vocabulary.clone(),
        }
    }

    /// Maps every label through `map`, dropping samples that map to `None`.
    /// The vocabulary becomes `new_vocabulary`.
    pub fn relabel(&self, new_vocabulary: Vec<String>, map: impl Fn(&str) -> Option<String>) -> LabeledDataset {
        let samples = self
            .samples
            .iter()
            .filter_map(|s| {
                map(&s.label).map(|label| MinuteSample {
                    label,
                    ..s.clone()
                })
            })
            .collect();
        LabeledDataset {
            schema: self.schema.clone(),
            samples,
            activity_vocabulary: new_vocabulary,
        }
    }
}
