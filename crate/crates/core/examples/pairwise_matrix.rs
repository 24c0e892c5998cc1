//! Subject-wise cross-validated Cllr for every pair of five activities.
//!
//! Prints the matrix with Cllr below the diagonal, Cllr_min above it and the
//! mean Cllr of each activity on the diagonal, then writes the CSV tables and
//! the heatmap.

use trace2lr::experiments::{pairwise_matrix, BootstrapPlan, ExperimentConfig};
use trace2lr::report::{render_heatmap, write_matrix_csv, write_text, MatrixValue};
use trace2lr::synthetic::{SyntheticConfig, SyntheticDataset};

fn main() -> trace2lr::Result<()> {
    let data = SyntheticDataset::generate(&SyntheticConfig::small(5)).dataset;
    let cfg = ExperimentConfig {
        bootstrap: BootstrapPlan {
            replicates: 200,
            ..BootstrapPlan::default()
        },
        seed: 11,
        ..ExperimentConfig::default()
    };
    let report = pairwise_matrix(&data, &cfg)?;

    print!("{:>10}", "");
    for a in &report.activities {
        print!("{a:>10}");
    }
    println!();
    for (a, row) in report.activities.iter().zip(&report.matrix) {
        print!("{a:>10}");
        for v in row {
            match v {
                Some(v) => print!("{v:>10.3}"),
                None => print!("{:>10}", "NA"),
            }
        }
        println!();
    }
    println!("mean cllr {:.3}, {:.0}% of pairings below 1", report.mean_cllr().unwrap_or(f64::NAN), report.percent_below(1.0));

    let out = std::env::temp_dir().join("trace2lr-pairwise");
    write_matrix_csv(out.join("pairwise_cllr.csv"), &report, MatrixValue::Cllr)?;
    write_matrix_csv(out.join("pairwise_cllrmin.csv"), &report, MatrixValue::CllrMin)?;
    write_text(out.join("heatmap.svg"), &render_heatmap(&report))?;
    println!("tables and heatmap in {}", out.display());
    Ok(())
}
