use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use super::{parse_timestamp, FeatureValue, LabeledDataset, MinuteSample, Provenance, VariableKind, VariableSchema};
use crate::error::{Error, Result};

const FIXED: [&str; 7] = ["minute", "subject", "phone", "location", "session", "label", "coverage_seconds"];

/// Writes one row per sample; missing values are empty fields.
pub fn write_dataset_csv<W: Write>(dataset: &LabeledDataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = FIXED.to_vec();
    header.extend(dataset.schema.variables().iter().map(|v| v.name.as_str()));
    w.write_record(&header)?;
    for s in &dataset.samples {
        let mut rec = vec![
            s.minute.format("%Y-%m-%dT%H:%M:%SZ").to_string(),
            s.provenance.subject_id.clone(),
            s.provenance.phone_model.clone(),
            s.provenance.carry_location.clone(),
            s.provenance.session.clone(),
            s.label.clone(),
            s.coverage_seconds.to_string(),
        ];
        rec.extend(s.features.iter().map(|v| match v {
            None => String::new(),
            Some(FeatureValue::Number(x)) => x.to_string(),
            Some(FeatureValue::Token(t)) => t.clone(),
        }));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dataset(dataset: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_dataset_csv(dataset, std::io::BufWriter::new(file))
}

/// Reads a canonical dataset file. Without a vocabulary, the sorted set of
/// labels present in the file is used.
pub fn read_dataset_csv<R: Read>(input: R, schema: &VariableSchema, vocabulary: Option<&[String]>) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.len() < FIXED.len() || FIXED.iter().zip(headers.iter()).any(|(a, b)| *a != b) {
        return Err(Error::Format(format!("dataset header must start with {}", FIXED.join(","))));
    }
    let mut var_idx = Vec::with_capacity(schema.len());
    for v in schema.variables() {
        let pos = headers
            .iter()
            .position(|h| h == v.name)
            .ok_or_else(|| Error::Format(format!("dataset lacks column for variable `{}`", v.name)))?;
        var_idx.push((pos, v.kind));
    }
    let mut samples = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let err = |m: String| Error::Row {
            path: "dataset".into(),
            line,
            message: m,
        };
        let f = |i: usize| record.get(i).unwrap_or("");
        let minute = parse_timestamp(f(0)).ok_or_else(|| err(format!("bad minute `{}`", f(0))))?;
        let provenance = Provenance::new(f(1), f(2), f(3), f(4)).map_err(|e| err(e.to_string()))?;
        let coverage_seconds: f64 = f(6).parse().map_err(|_| err(format!("bad coverage `{}`", f(6))))?;
        let mut features = Vec::with_capacity(var_idx.len());
        for &(pos, kind) in &var_idx {
            let raw = f(pos);
            features.push(if raw.is_empty() {
                None
            } else if kind == VariableKind::Categorical {
                Some(FeatureValue::Token(raw.to_string()))
            } else {
                let x: f64 = raw.parse().map_err(|_| err(format!("bad number `{raw}`")))?;
                Some(FeatureValue::Number(x))
            });
        }
        samples.push(MinuteSample {
            minute,
            features,
            label: f(5).to_string(),
            coverage_seconds,
            provenance,
        });
    }
    let vocabulary = match vocabulary {
        Some(v) => v.to_vec(),
        None => samples
            .iter()
            .map(|s| s.label.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
    };
    LabeledDataset::new(schema.clone(), samples, vocabulary)
}

pub fn read_dataset(path: impl AsRef<Path>, schema: &VariableSchema, vocabulary: Option<&[String]>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    read_dataset_csv(std::fs::File::open(path)?, schema, vocabulary)
}
