//! Leave-one-phone-out analysis: how much Cllr grows when the phone model of
//! the validation data never appeared in training, against a control that
//! removes the same number of random training rows.

use trace2lr::experiments::{sensitivity_leave_factor, ExperimentConfig};
use trace2lr::ingest::Factor;
use trace2lr::synthetic::{SyntheticConfig, SyntheticDataset};

fn main() -> trace2lr::Result<()> {
    let data = SyntheticDataset::generate(&SyntheticConfig {
        phones: vec!["iPhone 7".into(), "iPhone XR".into(), "iPhone 12".into()],
        phone_effect: 1.0,
        ..SyntheticConfig::small(4)
    })
    .dataset;
    let cfg = ExperimentConfig {
        seed: 5,
        ..ExperimentConfig::default()
    };
    let report = sensitivity_leave_factor(&data, &cfg, Factor::Phone)?;
    for level in &report.levels {
        println!("{:<10} mean delta cllr {:+.3} over {} pairings", level.level, level.mean_delta.unwrap_or(f64::NAN), level.cells.len());
    }
    let w = &report.wilcoxon;
    println!(
        "all levels: mean delta {:+.3}, W+ = {}, one-sided p = {:.4} ({} test, n = {})",
        report.mean_delta.unwrap_or(f64::NAN),
        w.w_plus,
        w.p_value,
        if w.exact { "exact" } else { "normal approximation" },
        w.n
    );
    Ok(())
}
