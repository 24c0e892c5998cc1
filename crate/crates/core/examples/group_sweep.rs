//! Multiclass systems over combinations of activity groups, compared with
//! the naive system that separates every activity.

use std::collections::BTreeMap;

use trace2lr::experiments::{group_sweep, naive_cmxe, ActivityGrouping, BootstrapPlan, ExperimentConfig};
use trace2lr::synthetic::{SyntheticConfig, SyntheticDataset};

fn main() -> trace2lr::Result<()> {
    let data = SyntheticDataset::generate(&SyntheticConfig {
        minutes_per_activity: 6,
        separation: 3.0,
        ..SyntheticConfig::small(9)
    })
    .dataset;
    let mut groups = BTreeMap::new();
    groups.insert("movement".to_string(), vec!["walking".to_string(), "running".into(), "cycling".into()]);
    groups.insert("transport".to_string(), vec!["bus".to_string(), "car".into(), "train".into(), "tram".into()]);
    groups.insert("dynamic".to_string(), vec!["dragging".to_string(), "kicking".into()]);
    let grouping = ActivityGrouping::new(groups)?;
    let cfg = ExperimentConfig {
        bootstrap: BootstrapPlan {
            replicates: 100,
            ..BootstrapPlan::default()
        },
        seed: 2,
        ..ExperimentConfig::default()
    };

    for row in group_sweep(&data, &grouping, &cfg)? {
        println!("{:<30} normalized cmxe {:.3} (se {:.3})", row.groups.join(" + "), row.result.normalized_cmxe, row.result.normalized_std_error);
    }
    let naive = naive_cmxe(&data, &cfg)?;
    println!("{:<30} normalized cmxe {:.3}", format!("naive, {} activities", naive.classes.len()), naive.normalized_cmxe);
    Ok(())
}
