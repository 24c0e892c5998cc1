//! Scorer family by calibrator grid over all pairings of four activities.

use trace2lr::calibration::CalibratorKind;
use trace2lr::experiments::{ablation_sweep, AblationPlan, BootstrapPlan, ExperimentConfig};
use trace2lr::scorer::ScorerFamily;
use trace2lr::synthetic::{SyntheticConfig, SyntheticDataset};

fn main() -> trace2lr::Result<()> {
    let data = SyntheticDataset::generate(&SyntheticConfig::small(4)).dataset;
    let cfg = ExperimentConfig {
        bootstrap: BootstrapPlan {
            replicates: 100,
            ..BootstrapPlan::default()
        },
        ablation: AblationPlan {
            families: vec![ScorerFamily::GradientBoosted, ScorerFamily::BaggedEnsemble, ScorerFamily::SingleTree],
            calibrators: vec![CalibratorKind::Logistic, CalibratorKind::Gaussian, CalibratorKind::Kde],
        },
        seed: 3,
        ..ExperimentConfig::default()
    };
    let rows = ablation_sweep(&data, &cfg)?;
    println!("{:<17} {:<9} {:>8} {:>9} {:>7} {:>7} {:>7} {:>7}", "family", "calib", "acc %", "mean cllr", "<1", "<0.75", "<0.5", "<0.25");
    for r in &rows {
        print!(
            "{:<17} {:<9} {:>8.1} {:>9.3}",
            r.family.to_string(),
            r.calibrator.to_string(),
            r.accuracy.unwrap_or(f64::NAN),
            r.mean_cllr.unwrap_or(f64::NAN)
        );
        for (_, p) in &r.percent_below {
            print!(" {p:>7.1}");
        }
        println!();
    }
    Ok(())
}
