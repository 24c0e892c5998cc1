//! Drives the command line from code: writes a dataset, schema and
//! configuration, runs `pairwise` twice and checks that the outputs are
//! byte-identical.

use std::fs;

use trace2lr::cli::run_cli;
use trace2lr::ingest::write_dataset;
use trace2lr::synthetic::{SyntheticConfig, SyntheticDataset};

fn main() -> trace2lr::Result<()> {
    let dir = std::env::temp_dir().join("trace2lr-cli-example");
    fs::create_dir_all(&dir)?;
    let data = SyntheticDataset::generate(&SyntheticConfig::small(3)).dataset;
    write_dataset(&data, dir.join("dataset.csv"))?;
    fs::write(dir.join("schema.json"), data.schema.to_json())?;
    fs::write(
        dir.join("config.json"),
        r#"{
  "dataset": "dataset.csv",
  "schema": "schema.json",
  "bootstrap": {"replicates": 100},
  "seed": 42,
  "output_dir": "run1"
}"#,
    )?;
    let config = dir.join("config.json");
    let config = config.to_str().expect("utf-8 path");

    for out in ["run1", "run2"] {
        let out = dir.join(out);
        let code = run_cli(["trace2lr", "pairwise", "--config", config, "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0);
    }
    for f in ["pairwise_cllr.csv", "pairwise_cllrmin.csv", "heatmap.svg"] {
        let same = fs::read(dir.join("run1").join(f))? == fs::read(dir.join("run2").join(f))?;
        println!("{f}: {}", if same { "identical across runs" } else { "DIFFERS" });
    }
    let code = run_cli(["trace2lr", "evaluate", "--config", config, "--h1", "walking", "--h2", "running"]);
    println!("evaluate exited with {code}");
    Ok(())
}
