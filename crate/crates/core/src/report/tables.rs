use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::experiments::{AblationRow, GroupSweepRow, PairwiseMatrixReport, SensitivityReport, Timeline, ValidationRow};
use crate::metrics::CurveData;
use crate::scorer::ImportanceReport;

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn create(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(csv::Writer::from_path(path)?)
}

pub fn write_text(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_text(path, &s)
}

/// Which value a square matrix CSV holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixValue {
    /// Cllr of each pairing, symmetric, with per-activity means on the diagonal.
    Cllr,
    /// Cllr_min of each pairing, symmetric, empty diagonal.
    CllrMin,
}

pub fn write_matrix_csv(path: impl AsRef<Path>, report: &PairwiseMatrixReport, value: MatrixValue) -> Result<()> {
    let acts = &report.activities;
    let mut w = create(path.as_ref())?;
    w.write_record(std::iter::once("activity").chain(acts.iter().map(String::as_str)))?;
    for (i, a) in acts.iter().enumerate() {
        let mut rec = vec![a.clone()];
        for (j, b) in acts.iter().enumerate() {
            let v = if i == j {
                match value {
                    MatrixValue::Cllr => report.matrix[i][i],
                    MatrixValue::CllrMin => None,
                }
            } else {
                report.cell(a, b).and_then(|c| match value {
                    MatrixValue::Cllr => c.cllr,
                    MatrixValue::CllrMin => c.cllr_min,
                })
            };
            rec.push(opt(v));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One record per pairing, ready for plotting tools.
pub fn write_matrix_long_csv(path: impl AsRef<Path>, report: &PairwiseMatrixReport) -> Result<()> {
    let mut w = create(path.as_ref())?;
    w.write_record(["h1", "h2", "cllr", "cllr_min", "cllr_std_error", "accuracy", "n_validation", "folds_used"])?;
    for c in &report.cells {
        w.write_record([
            c.h1.clone(),
            c.h2.clone(),
            opt(c.cllr),
            opt(c.cllr_min),
            opt(c.cllr_std_error),
            opt(c.accuracy),
            c.n_validation.to_string(),
            c.folds_used.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curve_csv(path: impl AsRef<Path>, curve: &CurveData) -> Result<()> {
    let mut w = create(path.as_ref())?;
    w.write_record(["series", "x", "y"])?;
    for s in &curve.series {
        for (x, y) in &s.points {
            w.write_record([s.name.clone(), x.to_string(), y.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_validation_csv(path: impl AsRef<Path>, rows: &[ValidationRow]) -> Result<()> {
    let mut w = create(path.as_ref())?;
    w.write_record(["fold", "hypothesis", "score", "log10_lr", "correct", "subject", "phone", "location", "session"])?;
    for r in rows {
        let p = &r.provenance;
        w.write_record([
            r.fold.to_string(),
            r.hyp.to_string(),
            r.score.to_string(),
            r.log10_lr.to_string(),
            r.correct.to_string(),
            p.subject_id.clone(),
            p.phone_model.clone(),
            p.carry_location.clone(),
            p.session.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ablation_csv(path: impl AsRef<Path>, rows: &[AblationRow]) -> Result<()> {
    let mut w = create(path.as_ref())?;
    let mut head = vec!["family".to_string(), "calibrator".into(), "accuracy".into(), "mean_cllr".into()];
    if let Some(r) = rows.first() {
        head.extend(r.percent_below.iter().map(|(t, _)| format!("pct_below_{t}")));
    }
    head.extend(["n_pairs".to_string(), "n_absent".into()]);
    w.write_record(&head)?;
    for r in rows {
        let mut rec = vec![r.family.to_string(), r.calibrator.to_string(), opt(r.accuracy), opt(r.mean_cllr)];
        rec.extend(r.percent_below.iter().map(|(_, p)| p.to_string()));
        rec.extend([r.n_pairs.to_string(), r.n_absent.to_string()]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sensitivity_csv(path: impl AsRef<Path>, report: &SensitivityReport) -> Result<()> {
    let mut w = create(path.as_ref())?;
    w.write_record(["level", "h1", "h2", "cllr_left_out", "cllr_control", "delta", "n_validation"])?;
    for l in &report.levels {
        for c in &l.cells {
            w.write_record([
                l.level.clone(),
                c.h1.clone(),
                c.h2.clone(),
                c.cllr_left_out.to_string(),
                c.cllr_control.to_string(),
                c.delta.to_string(),
                c.n_validation.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_group_sweep_csv(path: impl AsRef<Path>, rows: &[GroupSweepRow]) -> Result<()> {
    let mut w = create(path.as_ref())?;
    w.write_record(["groups", "n_groups", "cmxe", "normalized_cmxe", "normalized_std_error", "accuracy", "n_validation"])?;
    for r in rows {
        let m = &r.result;
        w.write_record([
            r.groups.join("+"),
            r.groups.len().to_string(),
            m.cmxe.to_string(),
            m.normalized_cmxe.to_string(),
            m.normalized_std_error.to_string(),
            m.accuracy.to_string(),
            m.n_validation.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timeline_csv(path: impl AsRef<Path>, t: &Timeline) -> Result<()> {
    let mut w = create(path.as_ref())?;
    let mut head = vec!["minute".to_string()];
    head.extend(t.classes.iter().cloned());
    head.extend(["truth".to_string(), "predicted".into()]);
    w.write_record(&head)?;
    for m in 0..t.len() {
        let mut rec = vec![t.minutes[m].to_rfc3339()];
        rec.extend(t.likelihoods[m].iter().map(|v| v.to_string()));
        rec.push(t.truth[m].map(|c| t.classes[c].clone()).unwrap_or_default());
        rec.push(t.classes[t.predicted[m]].clone());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_importance_csv(path: impl AsRef<Path>, report: &ImportanceReport) -> Result<()> {
    let mut w = create(path.as_ref())?;
    w.write_record(std::iter::once("variable").chain(report.activities.iter().map(String::as_str)))?;
    for (v, name) in report.variables.iter().enumerate() {
        let mut rec = vec![name.clone()];
        rec.extend(report.values.iter().map(|row| opt(row.get(v).copied())));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
