//! Which trace variables separate which activities, averaged over pairings.

use trace2lr::experiments::{importance_map, ExperimentConfig};
use trace2lr::synthetic::{SyntheticConfig, SyntheticDataset};

fn main() -> trace2lr::Result<()> {
    let data = SyntheticDataset::generate(&SyntheticConfig::small(5)).dataset;
    let report = importance_map(&data, &ExperimentConfig::default())?;
    print!("{:<15}", "variable");
    for a in &report.activities {
        print!("{a:>9}");
    }
    println!("{:>9}", "mean");
    for v in &report.variables {
        print!("{v:<15}");
        for a in &report.activities {
            print!("{:>9.2}", report.get(v, a).unwrap_or(f64::NAN));
        }
        println!("{:>9.2}", report.mean_importance(v).unwrap_or(f64::NAN));
    }
    Ok(())
}
