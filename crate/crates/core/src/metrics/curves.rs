//! PAV, Tippett and ECE curve data. Axes are in log10 units.

use std::f64::consts::LN_10;

use serde::{Deserialize, Serialize};

use super::{log2_1p_exp, pav_llrs, BinaryEvalSet, Hyp};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Pav,
    Tippett,
    Ece,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveData {
    pub kind: CurveKind,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

impl CurveData {
    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }
}

/// Sorted unique values padded by 1% of their range on both sides.
fn tippett_grid(values: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    let (lo, hi) = (v[0], v[v.len() - 1]);
    let pad = if hi > lo { 0.01 * (hi - lo) } else { 0.01 * lo.abs().max(1.0) };
    let mut grid = Vec::with_capacity(v.len() + 2);
    grid.push(lo - pad);
    grid.extend(v);
    grid.push(hi + pad);
    grid
}

/// Fraction of each hypothesis' log10 LRs at or above each grid point.
pub fn tippett_curve(set: &BinaryEvalSet) -> CurveData {
    let log10: Vec<f64> = set.llrs.iter().map(|l| l / LN_10).collect();
    let mut series = Vec::new();
    if !log10.is_empty() {
        let grid = tippett_grid(&log10);
        for hyp in [Hyp::H1, Hyp::H2] {
            let mut own: Vec<f64> = log10.iter().zip(&set.labels).filter(|p| *p.1 == hyp).map(|p| *p.0).collect();
            if own.is_empty() {
                continue;
            }
            own.sort_by(f64::total_cmp);
            let n = own.len() as f64;
            let points = grid
                .iter()
                .map(|&x| {
                    let below = own.partition_point(|v| *v < x);
                    (x, (own.len() - below) as f64 / n)
                })
                .collect();
            series.push(Series {
                name: hyp.to_string(),
                points,
            });
        }
    }
    CurveData {
        kind: CurveKind::Tippett,
        x_label: "log10 LR".into(),
        y_label: "proportion of LRs >= x".into(),
        series,
    }
}

/// 61 prior log10-odds from -3 to 3.
pub fn default_ece_grid() -> Vec<f64> {
    (0..61).map(|i| -3.0 + 0.1 * i as f64).collect()
}

/// Empirical cross-entropy in bits at natural-log prior odds `pi`.
pub fn ece_value(set: &BinaryEvalSet, pi: f64) -> Result<f64> {
    let (n1, n2) = set.require_both()?;
    let p1 = 1.0 / (1.0 + (-pi).exp());
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for (&l, h) in set.llrs.iter().zip(&set.labels) {
        match h {
            Hyp::H1 => s1 += log2_1p_exp(-l - pi),
            Hyp::H2 => s2 += log2_1p_exp(l + pi),
        }
    }
    Ok(p1 * s1 / n1 as f64 + (1.0 - p1) * s2 / n2 as f64)
}

/// ECE of the system, of its PAV-recalibrated llrs and of the llr = 0
/// reference over `grid_log10` prior odds.
pub fn ece_curve(set: &BinaryEvalSet, grid_log10: &[f64]) -> Result<CurveData> {
    let reference = BinaryEvalSet {
        llrs: vec![0.0; set.len()],
        labels: set.labels.clone(),
    };
    let calibrated = BinaryEvalSet {
        llrs: pav_llrs(set, &set.llrs)?,
        labels: set.labels.clone(),
    };
    let mut series = Vec::new();
    for (name, s) in [("ece", set), ("calibrated", &calibrated), ("reference", &reference)] {
        let points = grid_log10
            .iter()
            .map(|&x| Ok((x, ece_value(s, x * LN_10)?)))
            .collect::<Result<Vec<_>>>()?;
        series.push(Series {
            name: name.into(),
            points,
        });
    }
    Ok(CurveData {
        kind: CurveKind::Ece,
        x_label: "prior log10 odds".into(),
        y_label: "empirical cross-entropy (bits)".into(),
        series,
    })
}

/// System log10 LR against its PAV-optimal log10 LR, sorted by the former.
pub fn pav_curve(set: &BinaryEvalSet) -> Result<CurveData> {
    let opt = pav_llrs(set, &set.llrs)?;
    let mut points: Vec<(f64, f64)> = set.llrs.iter().zip(&opt).map(|(a, b)| (a / LN_10, b / LN_10)).collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    points.dedup();
    Ok(CurveData {
        kind: CurveKind::Pav,
        x_label: "system log10 LR".into(),
        y_label: "PAV log10 LR".into(),
        series: vec![Series {
            name: "pav".into(),
            points,
        }],
    })
}
