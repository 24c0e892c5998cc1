use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use super::{FeatureValue, Provenance, VariableKind, VariableSchema};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawRegistration {
    pub timestamp: DateTime<Utc>,
    pub variable: String,
    pub value: FeatureValue,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActivityInterval {
    pub activity: String,
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    pub provenance: Provenance,
}

/// Header names of the delimited input files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnNames {
    pub timestamp: String,
    pub variable: String,
    pub value: String,
    pub activity: String,
    pub start: String,
    pub end: String,
    pub subject: String,
    pub phone: String,
    pub location: String,
    pub session: String,
}

impl Default for ColumnNames {
    fn default() -> Self {
        ColumnNames {
            timestamp: "timestamp".into(),
            variable: "variable".into(),
            value: "value".into(),
            activity: "activity".into(),
            start: "start".into(),
            end: "end".into(),
            subject: "subject".into(),
            phone: "phone".into(),
            location: "location".into(),
            session: "session".into(),
        }
    }
}

/// Parses a UTC instant. Accepts RFC 3339 (with offset) or a naive
/// `YYYY-MM-DD[T ]HH:MM:SS`, which is taken as UTC.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(Utc.from_utc_datetime(&t));
        }
    }
    None
}

pub fn truncate_to_minute(t: DateTime<Utc>) -> DateTime<Utc> {
    let secs = t.timestamp();
    DateTime::from_timestamp(secs - secs.rem_euclid(60), 0).expect("minute boundary in range")
}

struct Header {
    cols: HashMap<String, usize>,
}

impl Header {
    fn read<R: Read>(rdr: &mut csv::Reader<R>, path: &str) -> Result<Self> {
        let headers = rdr.headers()?.clone();
        if headers.is_empty() || headers.iter().all(str::is_empty) {
            return Err(Error::Format(format!("{path}: missing header")));
        }
        let cols = headers.iter().enumerate().map(|(i, h)| (h.to_string(), i)).collect();
        Ok(Header { cols })
    }

    fn require(&self, name: &str, path: &str) -> Result<usize> {
        self.cols
            .get(name)
            .copied()
            .ok_or_else(|| Error::Format(format!("{path}: header lacks column `{name}`")))
    }
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(input)
}

fn row_err(path: &str, record: &csv::StringRecord, message: String) -> Error {
    Error::Row {
        path: path.to_string(),
        line: record.position().map(|p| p.line()).unwrap_or(0),
        message,
    }
}

/// Reads a registrations table. Rows keep their file order.
pub fn load_registrations(path: impl AsRef<Path>, schema: &VariableSchema, columns: &ColumnNames) -> Result<Vec<RawRegistration>> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let file = std::fs::File::open(path)?;
    read_registrations(file, &path.display().to_string(), schema, columns)
}

pub(crate) fn read_registrations<R: Read>(
    input: R,
    name: &str,
    schema: &VariableSchema,
    columns: &ColumnNames,
) -> Result<Vec<RawRegistration>> {
    let mut rdr = reader(input);
    let header = Header::read(&mut rdr, name)?;
    let ts = header.require(&columns.timestamp, name)?;
    let var = header.require(&columns.variable, name)?;
    let val = header.require(&columns.value, name)?;
    let prov_cols = provenance_columns(&header, columns, name)?;

    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let timestamp = parse_timestamp(field(ts))
            .ok_or_else(|| row_err(name, &record, format!("unparseable timestamp `{}`", field(ts))))?;
        let variable = field(var);
        let kind = schema
            .get(variable)
            .ok_or_else(|| Error::UnknownVariable(variable.to_string()))?
            .kind;
        let raw = field(val);
        let value = match kind {
            VariableKind::Categorical => {
                if raw.is_empty() {
                    return Err(row_err(name, &record, format!("empty token for `{variable}`")));
                }
                FeatureValue::Token(raw.to_string())
            }
            _ => match raw.parse::<f64>() {
                Ok(x) if x.is_finite() => FeatureValue::Number(x),
                _ => {
                    return Err(row_err(name, &record, format!("`{raw}` is not a finite number for `{variable}`")));
                }
            },
        };
        let provenance = read_provenance(&record, &prov_cols).map_err(|e| row_err(name, &record, e.to_string()))?;
        out.push(RawRegistration {
            timestamp,
            variable: variable.to_string(),
            value,
            provenance,
        });
    }
    Ok(out)
}

fn provenance_columns(header: &Header, columns: &ColumnNames, name: &str) -> Result<[usize; 4]> {
    Ok([
        header.require(&columns.subject, name)?,
        header.require(&columns.phone, name)?,
        header.require(&columns.location, name)?,
        header.require(&columns.session, name)?,
    ])
}

fn read_provenance(record: &csv::StringRecord, cols: &[usize; 4]) -> Result<Provenance> {
    let f = |i: usize| record.get(cols[i]).unwrap_or("");
    Provenance::new(f(0), f(1), f(2), f(3))
}

/// Reads ground-truth activity intervals. Activities must be in `vocabulary`.
pub fn load_intervals(path: impl AsRef<Path>, vocabulary: &[String], columns: &ColumnNames) -> Result<Vec<ActivityInterval>> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let file = std::fs::File::open(path)?;
    read_intervals(file, &path.display().to_string(), vocabulary, columns)
}

pub(crate) fn read_intervals<R: Read>(
    input: R,
    name: &str,
    vocabulary: &[String],
    columns: &ColumnNames,
) -> Result<Vec<ActivityInterval>> {
    let mut rdr = reader(input);
    let header = Header::read(&mut rdr, name)?;
    let act = header.require(&columns.activity, name)?;
    let start = header.require(&columns.start, name)?;
    let end = header.require(&columns.end, name)?;
    let prov_cols = provenance_columns(&header, columns, name)?;

    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let activity = field(act);
        if !vocabulary.iter().any(|v| v == activity) {
            return Err(row_err(name, &record, format!("activity `{activity}` not in vocabulary")));
        }
        let s = parse_timestamp(field(start))
            .ok_or_else(|| row_err(name, &record, format!("unparseable start `{}`", field(start))))?;
        let e = parse_timestamp(field(end)).ok_or_else(|| row_err(name, &record, format!("unparseable end `{}`", field(end))))?;
        if s >= e {
            return Err(row_err(name, &record, format!("interval start {s} is not before end {e}")));
        }
        let provenance = read_provenance(&record, &prov_cols).map_err(|e| row_err(name, &record, e.to_string()))?;
        out.push(ActivityInterval {
            activity: activity.to_string(),
            start: s,
            end: e,
            provenance,
        });
    }
    Ok(out)
}
