use std::collections::HashMap;

use chrono::{DateTime, Duration, Utc};

use super::registrations::truncate_to_minute;
use super::{aggregate_registrations, ActivityInterval, LabeledDataset, MinuteFeatures, MinuteSample, Provenance, RawRegistration, VariableSchema};
use crate::error::{Error, Result};

/// Labels aggregated minutes with the activity intervals overlapping them.
///
/// A minute inside a single interval keeps its aggregated features and a
/// coverage of 60 s. A minute touched by several intervals is split: each
/// activity gets its own sample built only from the registrations inside its
/// interval(s), with the overlap as coverage. Minutes outside every interval,
/// and split segments without any registration, are dropped.
pub fn attach_labels(
    minute_features: &MinuteFeatures,
    intervals: &[ActivityInterval],
    registrations: &[RawRegistration],
    schema: &VariableSchema,
    vocabulary: &[String],
) -> Result<LabeledDataset> {
    let mut by_prov: HashMap<&Provenance, Vec<&ActivityInterval>> = HashMap::new();
    for iv in intervals {
        if !vocabulary.contains(&iv.activity) {
            return Err(Error::Validation(format!("activity `{}` not in vocabulary", iv.activity)));
        }
        if iv.start >= iv.end {
            return Err(Error::Validation(format!("interval {} .. {} is empty", iv.start, iv.end)));
        }
        by_prov.entry(&iv.provenance).or_default().push(iv);
    }
    for (prov, ivs) in by_prov.iter_mut() {
        ivs.sort_by_key(|iv| (iv.start, iv.end));
        for w in ivs.windows(2) {
            if w[0].end > w[1].start {
                return Err(Error::Validation(format!(
                    "overlapping intervals for subject {} / {} / {}: `{}` {}..{} and `{}` {}..{}",
                    prov.subject_id,
                    prov.phone_model,
                    prov.carry_location,
                    w[0].activity,
                    w[0].start,
                    w[0].end,
                    w[1].activity,
                    w[1].start,
                    w[1].end
                )));
            }
        }
    }

    let mut regs_by_minute: HashMap<(&Provenance, DateTime<Utc>), Vec<&RawRegistration>> = HashMap::new();
    for r in registrations {
        regs_by_minute
            .entry((&r.provenance, truncate_to_minute(r.timestamp)))
            .or_default()
            .push(r);
    }

    let mut samples = Vec::new();
    for ((prov, minute), row) in minute_features {
        let Some(ivs) = by_prov.get(prov) else { continue };
        let minute_end = *minute + Duration::seconds(60);
        // activity -> (covered seconds, intervals), in order of first appearance
        let mut segments: Vec<(&str, i64, Vec<&ActivityInterval>)> = Vec::new();
        for iv in ivs.iter().filter(|iv| iv.start < minute_end && iv.end > *minute) {
            let overlap = (iv.end.min(minute_end) - iv.start.max(*minute)).num_seconds();
            if overlap <= 0 {
                continue;
            }
            match segments.iter_mut().find(|(a, _, _)| *a == iv.activity) {
                Some(seg) => {
                    seg.1 += overlap;
                    seg.2.push(iv);
                }
                None => segments.push((&iv.activity, overlap, vec![iv])),
            }
        }
        if segments.len() == 1 && segments[0].1 == 60 {
            samples.push(MinuteSample {
                minute: *minute,
                features: row.clone(),
                label: segments[0].0.to_string(),
                coverage_seconds: 60.0,
                provenance: prov.clone(),
            });
            continue;
        }
        let minute_regs = regs_by_minute.get(&(prov, *minute));
        for (activity, covered, ivs) in segments {
            let inside: Vec<&RawRegistration> = minute_regs
                .into_iter()
                .flatten()
                .copied()
                .filter(|r| ivs.iter().any(|iv| iv.start <= r.timestamp && r.timestamp < iv.end))
                .collect();
            if inside.is_empty() {
                continue;
            }
            samples.push(MinuteSample {
                minute: *minute,
                features: aggregate_registrations(inside, schema),
                label: activity.to_string(),
                coverage_seconds: covered as f64,
                provenance: prov.clone(),
            });
        }
    }
    LabeledDataset::new(schema.clone(), samples, vocabulary.to_vec())
}

/// Coverage per `(provenance, minute)`, used to check conservation.
#[cfg(test)]
pub(crate) fn coverage_by_minute(dataset: &LabeledDataset) -> std::collections::BTreeMap<(&Provenance, DateTime<Utc>), f64> {
    let mut out = std::collections::BTreeMap::new();
    for s in &dataset.samples {
        *out.entry((&s.provenance, s.minute)).or_insert(0.0) += s.coverage_seconds;
    }
    out
}
