use serde::{Deserialize, Serialize};

pub const MAX_BINS: usize = 255;
pub const MISSING_BIN: u8 = u8::MAX;

/// Quantile bin edges for one numeric column, placed halfway between
/// neighbouring training values. A value `v` falls in the first bin `b` with
/// `v <= edges[b]`, or in the last bin if it exceeds all edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinMapper {
    pub edges: Vec<f64>,
}

impl BinMapper {
    pub fn fit(values: &[f64]) -> Self {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
        v.sort_by(f64::total_cmp);
        let mut distinct = v.clone();
        distinct.dedup();
        if distinct.len() <= 1 {
            return BinMapper { edges: Vec::new() };
        }
        let uppers: Vec<f64> = if distinct.len() <= MAX_BINS {
            distinct[..distinct.len() - 1].to_vec()
        } else {
            let n = v.len();
            (1..MAX_BINS).map(|q| v[(q * n / MAX_BINS).min(n - 1)]).collect()
        };
        let mut edges: Vec<f64> = uppers
            .iter()
            .filter_map(|&u| {
                let next = distinct[distinct.partition_point(|&d| d <= u)..].first()?;
                Some(u + (next - u) / 2.0)
            })
            .collect();
        edges.dedup();
        BinMapper { edges }
    }

    /// Number of value bins (the missing bin excluded).
    pub fn n_bins(&self) -> usize {
        self.edges.len() + 1
    }

    pub fn bin(&self, v: f64) -> u8 {
        if v.is_nan() {
            MISSING_BIN
        } else {
            self.edges.partition_point(|&e| e < v) as u8
        }
    }
}
