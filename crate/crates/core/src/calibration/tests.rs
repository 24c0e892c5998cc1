use proptest::prelude::*;

use super::*;
use crate::synthetic::{SyntheticConfig, SyntheticDataset};

fn logistic(w: f64, m: f64) -> Calibrator {
    Calibrator::Logistic(LogisticCalibrator { w, m })
}

fn spread(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn balanced_labels(n: usize) -> Vec<Hyp> {
    (0..2 * n).map(|i| if i % 2 == 0 { Hyp::H1 } else { Hyp::H2 }).collect()
}

#[test]
fn prior_odds_from_counts_examples() {
    assert_eq!(prior_odds_from_counts(100, 50).unwrap().value, 2.0);
    assert_eq!(prior_odds_from_counts(50, 50).unwrap().value, 1.0);
    assert!(prior_odds_from_counts(0, 50).is_err());
}

#[test]
fn posterior_to_lr_examples() {
    let one = prior_odds_from_counts(1, 1).unwrap();
    let two = prior_odds_from_counts(2, 1).unwrap();
    assert_eq!(posterior_to_lr(0.5, &one), 1.0);
    assert!((posterior_to_lr(2.0 / 3.0, &one) - 2.0).abs() < 1e-12);
    assert!((posterior_to_lr(0.8, &two) - 2.0).abs() < 1e-12);
    assert!(posterior_to_lr(1.0, &one).is_finite());
    assert!(posterior_to_lr(0.0, &one) > 0.0);
}

#[test]
fn elub_sample_size_cap_dominates() {
    let ln10 = std::f64::consts::LN_10;
    let scores = spread(198, -4.0 * ln10, 4.0 * ln10);
    let labels = balanced_labels(99);
    let prior = prior_odds_from_counts(99, 99).unwrap();
    let b = compute_elub(&scores, &labels, &logistic(1.0, 0.0), &prior).unwrap();
    assert!((b.lower_log10 + 2.0).abs() < 1e-12 && (b.upper_log10 - 2.0).abs() < 1e-12, "{b:?}");
    assert_eq!(b.method, ELUB_SURROGATE);
}

#[test]
fn elub_data_range_dominates() {
    let scores = spread(2000, 0.5f64.ln(), 2f64.ln());
    let labels = balanced_labels(1000);
    let prior = prior_odds_from_counts(1000, 1000).unwrap();
    let b = compute_elub(&scores, &labels, &logistic(1.0, 0.0), &prior).unwrap();
    assert!((b.lower_log10 - 0.5f64.log10()).abs() < 1e-12);
    assert!((b.upper_log10 - 2f64.log10()).abs() < 1e-12);
}

#[test]
fn elub_small_samples_cap_at_one() {
    let scores = spread(18, -100.0, 100.0);
    let labels = balanced_labels(9);
    let prior = prior_odds_from_counts(9, 9).unwrap();
    let b = compute_elub(&scores, &labels, &logistic(1.0, 0.0), &prior).unwrap();
    assert!(b.lower_log10 >= -1.0 && b.upper_log10 <= 1.0);
}

#[test]
fn apply_bounds_examples() {
    let b = ElubBounds::new(-2.0, 2.0).unwrap();
    assert!((apply_bounds(1e6, &b) - 100.0).abs() < 1e-9);
    assert!((apply_bounds(3.0, &b) - 3.0).abs() < 1e-12);
    assert!((apply_bounds(1e-6, &b) - 0.01).abs() < 1e-15);
    assert!(ElubBounds::new(0.5, 2.0).is_err());
}

#[test]
fn prior_cancellation_gives_unit_lr() {
    // posterior equal to the training proportion at every score
    let scores = vec![0.0; 30];
    let labels: Vec<Hyp> = (0..30).map(|i| if i < 10 { Hyp::H1 } else { Hyp::H2 }).collect();
    let cal = ScoreCalibration::fit(CalibratorKind::Logistic, &scores, &labels, None).unwrap();
    assert!(cal.log10_lr(0.0).abs() < 1e-9, "{cal:?}");
}

#[test]
fn weighted_calibration_uses_weighted_prior() {
    let scores: Vec<f64> = (0..40).map(|i| (i % 7) as f64 - 3.0 + if i < 10 { 1.0 } else { 0.0 }).collect();
    let labels: Vec<Hyp> = (0..40).map(|i| if i < 10 { Hyp::H1 } else { Hyp::H2 }).collect();
    let w: Vec<f64> = labels.iter().map(|h| if *h == Hyp::H1 { 2.0 } else { 2.0 / 3.0 }).collect();
    let cal = ScoreCalibration::fit(CalibratorKind::Logistic, &scores, &labels, Some(&w)).unwrap();
    assert!((cal.prior_odds.value - 1.0).abs() < 1e-12);
    assert_eq!((cal.prior_odds.n1, cal.prior_odds.n2), (10, 30));
}

fn two_activity_data() -> LabeledDataset {
    SyntheticDataset::generate(&SyntheticConfig::small(2)).dataset
}

use crate::ingest::LabeledDataset;

#[test]
fn uninformative_scorer_gives_unit_lr() {
    let data = two_activity_data();
    let acts = data.present_labels();
    let hyp = Hypotheses::pair(&acts[0], &acts[1]).unwrap();
    let cfg = LrSystemConfig {
        scorer: ScorerConfig { rounds: 3, ..Default::default() },
        ..Default::default()
    };
    // a scorer with no splits: every feature blanked out
    let mut blank = data.clone();
    for s in &mut blank.samples {
        s.features.iter_mut().for_each(|f| *f = None);
    }
    let sys = LrSystem::fit(&blank, &hyp, &cfg).unwrap();
    for s in &data.samples {
        assert!((sys.evaluate(s) - 1.0).abs() < 1e-6, "{}", sys.evaluate(s));
    }
}

/// One numeric feature drawn from N(+mu, 1) for `a` and N(-mu, 1) for `b`.
fn gaussian_pair(n: usize, mu: f64, seed: u64) -> LabeledDataset {
    use chrono::{Duration, TimeZone, Utc};
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let schema = crate::ingest::VariableSchema::new(vec![crate::ingest::Variable::new("x", crate::ingest::VariableKind::NoncumulativeNumeric)]).unwrap();
    let t0 = Utc.with_ymd_and_hms(2022, 5, 2, 0, 0, 0).unwrap();
    let mut samples = Vec::new();
    for (label, mean) in [("a", mu), ("b", -mu)] {
        let dist = Normal::new(mean, 1.0).unwrap();
        for i in 0..n {
            let subject = format!("s{}", i % 4);
            samples.push(crate::ingest::MinuteSample {
                minute: t0 + Duration::minutes(i as i64 + if label == "a" { 0 } else { 100_000 }),
                features: vec![Some(crate::ingest::FeatureValue::Number(dist.sample(&mut rng)))],
                label: label.into(),
                coverage_seconds: 60.0,
                provenance: crate::ingest::Provenance::new(&subject, "iPhone 7", "hand", "S1").unwrap(),
            });
        }
    }
    LabeledDataset::new(schema, samples, vec!["a".into(), "b".into()]).unwrap()
}

#[test]
fn separable_synthetic_system_supports_h1() {
    let train = gaussian_pair(400, 2.5, 1);
    let test = gaussian_pair(2000, 2.5, 2);
    let hyp = Hypotheses::pair("a", "b").unwrap();
    let cfg = LrSystemConfig {
        scorer: ScorerConfig { rounds: 30, ..Default::default() },
        ..Default::default()
    };
    let sys = LrSystem::fit(&train, &hyp, &cfg).unwrap();
    let h1: Vec<f64> = test.samples.iter().filter(|s| s.label == "a").map(|s| sys.evaluate(s)).collect();
    let frac = h1.iter().filter(|&&lr| lr > 1.0).count() as f64 / h1.len() as f64;
    assert!(frac >= 0.95, "{frac}");
    for s in &test.samples {
        let l = sys.log10_lr(s);
        assert!(l >= sys.calibration.bounds.lower_log10 && l <= sys.calibration.bounds.upper_log10);
    }
    let back = LrSystem::from_json(&sys.to_json()).unwrap();
    assert_eq!(back.evaluate(&test.samples[0]), sys.evaluate(&test.samples[0]));
}

#[test]
fn out_of_fold_calibration_runs() {
    let data = two_activity_data();
    let acts = data.present_labels();
    let hyp = Hypotheses::pair(&acts[0], &acts[1]).unwrap();
    let cfg = LrSystemConfig {
        scorer: ScorerConfig { rounds: 10, ..Default::default() },
        calibration_folds: Some(2),
        ..Default::default()
    };
    let sys = LrSystem::fit(&data, &hyp, &cfg).unwrap();
    assert!(sys.calibration.bounds.upper_log10 > 0.0);
    let n_subjects = data.levels(crate::ingest::Factor::Subject).len();
    let capped = LrSystemConfig { calibration_folds: Some(50), ..cfg.clone() };
    let exact = LrSystemConfig { calibration_folds: Some(n_subjects), ..cfg.clone() };
    assert_eq!(LrSystem::fit(&data, &hyp, &capped).unwrap(), LrSystem::fit(&data, &hyp, &exact).unwrap());
    let in_sample = LrSystemConfig { calibration_folds: None, ..cfg.clone() };
    assert_ne!(LrSystem::fit(&data, &hyp, &in_sample).unwrap().calibration, sys.calibration);
    let one = LrSystemConfig { calibration_folds: Some(1), ..cfg };
    assert!(LrSystem::fit(&data, &hyp, &one).is_err());
}

#[test]
fn hypotheses_must_be_disjoint() {
    assert!(Hypotheses::new(vec!["a".into()], vec!["a".into()]).is_err());
    assert!(Hypotheses::new(vec![], vec!["a".into()]).is_err());
    let h = Hypotheses::new(vec!["a".into(), "b".into()], vec!["c".into()]).unwrap();
    assert_eq!(h.classify("b"), Some(Hyp::H1));
    assert_eq!(h.classify("z"), None);
    assert_eq!(h.to_string(), "a+b vs c");
}

#[test]
fn multiclass_likelihood_shapes() {
    let data = SyntheticDataset::generate(&SyntheticConfig::small(3)).dataset;
    let cl = data.present_labels();
    let model = crate::scorer::fit_scorer(&data, &cl, &ScorerConfig { rounds: 10, ..Default::default() }, &ClassWeights::uniform(&cl)).unwrap();
    for s in &data.samples {
        let p = multiclass_likelihoods(&model, s);
        assert_eq!(p.len(), 3);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.iter().all(|x| *x > 0.0));
        assert_eq!(crate::scorer::argmax(&p), model.predict_class(s));
    }
    assert_eq!(softmax(&[0.3, 0.3, 0.3, 0.3]), vec![0.25; 4]);
    assert!((softmax(&[800.0, 0.0, 0.0])[0] - 1.0).abs() < 1e-15);
}

use crate::scorer::{softmax, ClassWeights, ScorerConfig};

proptest! {
    #[test]
    fn bounded_clamp_is_monotone(a in 1e-12f64..1e12, b in 1e-12f64..1e12, lo in -5.0f64..0.0, hi in 0.0f64..5.0) {
        let bounds = ElubBounds::new(lo, hi).unwrap();
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(apply_bounds(x, &bounds) <= apply_bounds(y, &bounds) * (1.0 + 1e-12));
        let l = apply_bounds(a, &bounds).log10();
        prop_assert!(l >= lo - 1e-12 && l <= hi + 1e-12);
    }

    #[test]
    fn logistic_pipeline_is_monotone(scores in prop::collection::vec(-5.0f64..5.0, 4..40), probes in prop::collection::vec(-10.0f64..10.0, 2..10)) {
        let labels: Vec<Hyp> = scores.iter().enumerate().map(|(i, s)| if (s + i as f64 * 0.37).sin() > 0.0 { Hyp::H1 } else { Hyp::H2 }).collect();
        prop_assume!(labels.contains(&Hyp::H1) && labels.contains(&Hyp::H2));
        let cal = ScoreCalibration::fit(CalibratorKind::Logistic, &scores, &labels, None).unwrap();
        let Calibrator::Logistic(c) = cal.calibrator else { unreachable!() };
        prop_assert!(c.w > 0.0);
        let mut p = probes.clone();
        p.sort_by(f64::total_cmp);
        for w in p.windows(2) {
            prop_assert!(cal.log10_lr(w[0]) <= cal.log10_lr(w[1]));
            prop_assert!(c.log_odds(w[0]) <= c.log_odds(w[1]));
            let (a, b) = (c.posterior(w[0]), c.posterior(w[1]));
            prop_assert!(a <= b && a >= 0.0 && b <= 1.0);
        }
        prop_assert!(cal.bounds.lower_log10 <= 0.0 && cal.bounds.upper_log10 >= 0.0);
    }
}


