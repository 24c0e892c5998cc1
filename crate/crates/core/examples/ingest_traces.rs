//! Raw registrations and activity intervals to a labelled one-minute dataset.
//!
//! Writes two small CSV files, reads them back with the loaders the `ingest`
//! verb uses and prints the aggregated minutes, including a minute that is
//! split between two activities.

use std::fs;

use trace2lr::ingest::{
    aggregate_to_minutes, attach_labels, dataset_summary, default_vocabulary, load_intervals, load_registrations, write_dataset_csv, ColumnNames,
    Variable, VariableKind, VariableSchema,
};

fn main() -> trace2lr::Result<()> {
    let dir = std::env::temp_dir().join("trace2lr-ingest-example");
    fs::create_dir_all(&dir)?;

    let prov = "s01,iPhone 7,front trouser pocket,S1";
    let mut regs = String::from("timestamp,variable,value,subject,phone,location,session\n");
    for (t, var, val) in [
        ("2022-05-02T10:00:05Z", "count", "12"),
        ("2022-05-02T10:00:35Z", "count", "15"),
        ("2022-05-02T10:00:40Z", "type", "walking"),
        ("2022-05-02T10:00:50Z", "mets", "3.1"),
        ("2022-05-02T10:01:10Z", "count", "9"),
        ("2022-05-02T10:01:20Z", "type", "walking"),
        ("2022-05-02T10:01:45Z", "type", "running"),
        ("2022-05-02T10:01:50Z", "count", "30"),
        ("2022-05-02T10:02:30Z", "mets", "9.5"),
        ("2022-05-02T10:02:31Z", "type", "running"),
    ] {
        regs.push_str(&format!("{t},{var},{val},{prov}\n"));
    }
    let intervals = format!(
        "activity,start,end,subject,phone,location,session\n\
         walking,2022-05-02T10:00:00Z,2022-05-02T10:01:30Z,{prov}\n\
         running,2022-05-02T10:01:30Z,2022-05-02T10:03:00Z,{prov}\n"
    );
    fs::write(dir.join("registrations.csv"), regs)?;
    fs::write(dir.join("intervals.csv"), intervals)?;

    let schema = VariableSchema::new(vec![
        Variable::new("count", VariableKind::CumulativeNumeric),
        Variable::new("mets", VariableKind::NoncumulativeNumeric),
        Variable::new("type", VariableKind::Categorical),
    ])?;
    let vocabulary = default_vocabulary();
    let columns = ColumnNames::default();
    let registrations = load_registrations(dir.join("registrations.csv"), &schema, &columns)?;
    let intervals = load_intervals(dir.join("intervals.csv"), &vocabulary, &columns)?;

    let minutes = aggregate_to_minutes(&registrations, &schema);
    let dataset = attach_labels(&minutes, &intervals, &registrations, &schema, &vocabulary)?;

    println!("{} registrations -> {} labelled samples", registrations.len(), dataset.len());
    let mut csv = Vec::new();
    write_dataset_csv(&dataset, &mut csv)?;
    print!("{}", String::from_utf8_lossy(&csv));

    let summary = dataset_summary(&dataset)?;
    for v in &summary.variables {
        println!("{:>6}: {:?}, missing {:.0}%", v.name, v.kind, 100.0 * v.missing_rate);
    }
    Ok(())
}
