//! Logistic, Gaussian and KDE score-to-LR calibration on two-Gaussian scores.
//!
//! Scores are N(+1, 1) under H1 and N(-1, 1) under H2, for which the optimal
//! natural-log LR is `2 s`. Each calibrator is fitted on one sample and
//! evaluated on another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use trace2lr::calibration::{CalibratorKind, ScoreCalibration};
use trace2lr::metrics::{BinaryEvalSet, CllrReport, Hyp};

fn draw(n: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<Hyp>) {
    let h1 = Normal::new(1.0, 1.0).unwrap();
    let h2 = Normal::new(-1.0, 1.0).unwrap();
    let mut scores: Vec<f64> = (0..n).map(|_| h1.sample(rng)).collect();
    scores.extend((0..n).map(|_| h2.sample(rng)));
    let labels = (0..2 * n).map(|i| if i < n { Hyp::H1 } else { Hyp::H2 }).collect();
    (scores, labels)
}

fn main() -> trace2lr::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (train, train_labels) = draw(2000, &mut rng);
    let (test, test_labels) = draw(2000, &mut rng);

    let optimal = BinaryEvalSet::new(test.iter().map(|s| 2.0 * s).collect(), test_labels.clone())?;
    println!("{:<9} cllr {:.4}", "optimal", CllrReport::of(&optimal)?.cllr);

    for kind in [CalibratorKind::Logistic, CalibratorKind::Gaussian, CalibratorKind::Kde] {
        let cal = ScoreCalibration::fit(kind, &train, &train_labels, None)?;
        let llrs = test.iter().map(|&s| cal.log10_lr(s) * std::f64::consts::LN_10).collect();
        let r = CllrReport::of(&BinaryEvalSet::new(llrs, test_labels.clone())?)?;
        println!(
            "{:<9} cllr {:.4}  cllr_cal {:.4}  log10 LR(score 1) {:+.3}  bounds [{:.2}, {:.2}]",
            kind.to_string(),
            r.cllr,
            r.cllr_cal,
            cal.log10_lr(1.0),
            cal.bounds.lower_log10,
            cal.bounds.upper_log10
        );
    }
    Ok(())
}
