//! Seeded synthetic trace datasets for examples, tests and benchmarks.
//!
//! Each activity gets a random signature that shifts the means of a few
//! numeric variables, the missingness of `count`/`floorsAscended` and the
//! distribution of the categorical `type` variable. Phones add their own
//! offsets so that leaving a phone out of training costs something.

use chrono::{DateTime, Duration, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::ingest::{default_vocabulary, FeatureValue, LabeledDataset, MinuteSample, Provenance, Variable, VariableKind, VariableSchema};

const MOTION_TYPES: [&str; 6] = ["automotive", "cycling", "running", "stationary", "unknown", "walking"];

#[derive(Clone, Debug)]
pub struct SyntheticConfig {
    pub activities: Vec<String>,
    pub subjects: usize,
    pub phones: Vec<String>,
    pub locations: Vec<String>,
    /// Minutes per activity for every (subject, phone).
    pub minutes_per_activity: usize,
    /// Scale of the differences between activity signatures.
    pub separation: f64,
    /// Scale of per-phone offsets on numeric variables.
    pub phone_effect: f64,
    /// Extra variables that carry no signal.
    pub noise_variables: usize,
    /// Seed of the activity signatures and phone offsets. Datasets that
    /// share it come from the same population.
    pub population_seed: u64,
    /// Seed of the sampled minutes.
    pub seed: u64,
}

impl SyntheticConfig {
    /// A small dataset over the first `n_activities` default activities.
    pub fn small(n_activities: usize) -> Self {
        SyntheticConfig {
            activities: default_vocabulary().into_iter().take(n_activities).collect(),
            subjects: 4,
            phones: vec!["iPhone 7".into(), "iPhone XR".into()],
            locations: vec!["hand".into(), "front trouser pocket".into()],
            minutes_per_activity: 8,
            separation: 1.5,
            phone_effect: 0.5,
            noise_variables: 2,
            population_seed: 5,
            seed: 17,
        }
    }
}

pub struct SyntheticDataset {
    pub dataset: LabeledDataset,
}

pub fn schema(noise_variables: usize) -> VariableSchema {
    let mut vars = vec![
        Variable::new("count", VariableKind::CumulativeNumeric),
        Variable::new("distance", VariableKind::NoncumulativeNumeric),
        Variable::new("mets", VariableKind::NoncumulativeNumeric),
        Variable::new("floorsAscended", VariableKind::CumulativeNumeric),
        Variable::new("type", VariableKind::Categorical),
    ];
    for i in 0..noise_variables {
        vars.push(Variable::new(&format!("noise{i}"), VariableKind::NoncumulativeNumeric));
    }
    VariableSchema::new(vars).expect("unique names")
}

struct Signature {
    means: [f64; 3],
    count_present: f64,
    floors_present: f64,
    motion: usize,
}

impl SyntheticDataset {
    pub fn generate(cfg: &SyntheticConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.population_seed);
        let signatures: Vec<Signature> = cfg
            .activities
            .iter()
            .map(|_| Signature {
                means: [
                    rng.gen_range(-1.0..1.0) * cfg.separation,
                    rng.gen_range(-1.0..1.0) * cfg.separation,
                    rng.gen_range(-1.0..1.0) * cfg.separation,
                ],
                count_present: rng.gen_range(0.1..1.0),
                floors_present: rng.gen_range(0.0..0.6),
                motion: rng.gen_range(0..MOTION_TYPES.len()),
            })
            .collect();
        let phone_offsets: Vec<[f64; 3]> = cfg
            .phones
            .iter()
            .map(|_| {
                [
                    standard_normal(&mut rng) * cfg.phone_effect,
                    standard_normal(&mut rng) * cfg.phone_effect,
                    standard_normal(&mut rng) * cfg.phone_effect,
                ]
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let schema = schema(cfg.noise_variables);
        let start: DateTime<Utc> = DateTime::from_timestamp(1_651_485_600, 0).expect("valid epoch");
        let mut samples = Vec::new();
        for subject in 0..cfg.subjects {
            let subject_shift = standard_normal(&mut rng) * 0.2;
            // each phone sits at one location for the whole subject
            let first_loc = rng.gen_range(0..cfg.locations.len().max(1));
            for (p, phone) in cfg.phones.iter().enumerate() {
                let location = &cfg.locations[(first_loc + p) % cfg.locations.len()];
                let prov = Provenance {
                    subject_id: format!("s{:02}", subject + 1),
                    phone_model: phone.clone(),
                    carry_location: location.clone(),
                    session: "S1".into(),
                };
                let mut minute = start + Duration::days(subject as i64);
                for (a, activity) in cfg.activities.iter().enumerate() {
                    let sig = &signatures[a];
                    for _ in 0..cfg.minutes_per_activity {
                        let mut f: Vec<Option<FeatureValue>> = Vec::with_capacity(schema.len());
                        let num = |j: usize, rng: &mut ChaCha8Rng| {
                            sig.means[j] + phone_offsets[p][j] + subject_shift + standard_normal(rng)
                        };
                        let steps = num(0, &mut rng);
                        f.push(if rng.gen::<f64>() < sig.count_present {
                            Some(FeatureValue::Number((40.0 * (steps + 3.0)).max(0.0).round()))
                        } else {
                            None
                        });
                        f.push(Some(FeatureValue::Number(num(1, &mut rng))));
                        f.push(if rng.gen::<f64>() < 0.9 {
                            Some(FeatureValue::Number(num(2, &mut rng)))
                        } else {
                            None
                        });
                        f.push(if rng.gen::<f64>() < sig.floors_present {
                            Some(FeatureValue::Number(rng.gen_range(1..4) as f64))
                        } else {
                            None
                        });
                        let motion = if rng.gen::<f64>() < 0.7 {
                            sig.motion
                        } else {
                            rng.gen_range(0..MOTION_TYPES.len())
                        };
                        f.push(Some(FeatureValue::Token(MOTION_TYPES[motion].into())));
                        for _ in 0..cfg.noise_variables {
                            f.push(if rng.gen::<f64>() < 0.7 {
                                Some(FeatureValue::Number(standard_normal(&mut rng)))
                            } else {
                                None
                            });
                        }
                        samples.push(MinuteSample {
                            minute,
                            features: f,
                            label: activity.clone(),
                            coverage_seconds: 60.0,
                            provenance: prov.clone(),
                        });
                        minute += Duration::minutes(1);
                    }
                    minute += Duration::minutes(1);
                }
            }
        }
        let dataset = LabeledDataset::new(schema, samples, cfg.activities.clone()).expect("synthetic data is valid");
        SyntheticDataset { dataset }
    }
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}
