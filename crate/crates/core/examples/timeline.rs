//! A 26-minute scripted timeline: sitting, walking to the tram, the ride,
//! walking, a short fight and running away.

use trace2lr::experiments::{default_grouping, timeline_from_config, ExperimentConfig};
use trace2lr::ingest::default_vocabulary;
use trace2lr::synthetic::{SyntheticConfig, SyntheticDataset};

fn main() -> trace2lr::Result<()> {
    let data = SyntheticDataset::generate(&SyntheticConfig {
        activities: default_vocabulary(),
        minutes_per_activity: 10,
        subjects: 3,
        separation: 2.5,
        ..SyntheticConfig::small(0)
    })
    .dataset;
    let cfg = ExperimentConfig {
        grouping: Some(default_grouping()),
        seed: 8,
        ..ExperimentConfig::default()
    };
    let t = timeline_from_config(&data, &cfg)?;
    print!("{:>5}", "min");
    for c in &t.classes {
        print!("{c:>12}");
    }
    println!("{:>12}{:>12}", "truth", "predicted");
    for m in 0..t.len() {
        print!("{m:>5}");
        for p in &t.likelihoods[m] {
            print!("{p:>12.3}");
        }
        let truth = t.truth[m].map(|c| t.classes[c].as_str()).unwrap_or("-");
        println!("{truth:>12}{:>12}", t.classes[t.predicted[m]]);
    }
    let (hit, n) = t.hits();
    println!("{hit} of {n} minutes predicted correctly");
    Ok(())
}
