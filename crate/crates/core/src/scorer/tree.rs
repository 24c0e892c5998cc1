//! Histogram-based tree growing shared by all scorer families.
//!
//! Trees are grown on per-row gradient/hessian vectors of dimension `dim`
//! with the second-order gain `sum_k G_k^2 / (H_k + lambda)`. With gradients
//! taken at a uniform prediction this is the weighted Gini criterion, which is
//! how the classification trees of the bagged and single-tree families reuse
//! the same machinery.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::binning::{BinMapper, MISSING_BIN};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Split {
    /// Encoded column index.
    pub column: usize,
    pub threshold: f64,
    pub missing_left: bool,
    pub left: usize,
    pub right: usize,
    pub gain: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Split(Split),
    Leaf { values: Vec<f64> },
}

/// A binary tree stored as a node arena with the root at index 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    /// For per-class boosting trees, the class whose score the leaves add to.
    /// `None` means leaves carry one value per class.
    pub class: Option<usize>,
}

impl Tree {
    pub fn leaf_index(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split(s) => {
                    let v = row[s.column];
                    let left = if v.is_nan() { s.missing_left } else { v <= s.threshold };
                    i = if left { s.left } else { s.right };
                }
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> &[f64] {
        match &self.nodes[self.leaf_index(row)] {
            Node::Leaf { values } => values,
            Node::Split(_) => unreachable!("leaf_index returns leaves"),
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub(crate) fn scale_leaves(&mut self, factor: f64) {
        for n in &mut self.nodes {
            if let Node::Leaf { values } = n {
                values.iter_mut().for_each(|v| *v *= factor);
            }
        }
    }
}

/// Column-major binned training matrix.
pub(crate) struct BinnedData {
    pub bins: Vec<Vec<u8>>,
    pub mappers: Vec<BinMapper>,
}

impl BinnedData {
    pub fn new(matrix: &[Vec<f64>]) -> Self {
        let mappers: Vec<BinMapper> = matrix.iter().map(|c| BinMapper::fit(c)).collect();
        let bins = matrix
            .iter()
            .zip(&mappers)
            .map(|(col, m)| col.iter().map(|&v| m.bin(v)).collect())
            .collect();
        BinnedData { bins, mappers }
    }

    pub fn n_columns(&self) -> usize {
        self.bins.len()
    }
}

pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub lambda: f64,
    pub min_gain: f64,
    /// Number of candidate columns drawn per node; `None` uses all.
    pub columns_per_split: Option<usize>,
}

/// Per-column histogram: value bins followed by one missing slot.
#[derive(Clone)]
struct Hist {
    grad: Vec<f64>,
    hess: Vec<f64>,
    count: Vec<u32>,
}

struct Candidate {
    column: usize,
    bin: usize,
    missing_left: bool,
    gain: f64,
}

pub(crate) struct Grower<'a> {
    pub data: &'a BinnedData,
    pub grad: &'a [f64],
    pub hess: &'a [f64],
    pub dim: usize,
    pub params: &'a GrowParams,
}

const PARALLEL_WORK: usize = 16_384;

impl Grower<'_> {
    fn slots(&self, col: usize) -> usize {
        self.data.mappers[col].n_bins() + 1
    }

    fn hist_for(&self, col: usize, rows: &[usize]) -> Hist {
        let slots = self.slots(col);
        let d = self.dim;
        let mut h = Hist {
            grad: vec![0.0; slots * d],
            hess: vec![0.0; slots * d],
            count: vec![0; slots],
        };
        let bins = &self.data.bins[col];
        for &r in rows {
            let b = bins[r];
            let slot = if b == MISSING_BIN { slots - 1 } else { b as usize };
            h.count[slot] += 1;
            for k in 0..d {
                h.grad[slot * d + k] += self.grad[r * d + k];
                h.hess[slot * d + k] += self.hess[r * d + k];
            }
        }
        h
    }

    fn histograms(&self, rows: &[usize]) -> Vec<Hist> {
        let n_cols = self.data.n_columns();
        if rows.len() * n_cols >= PARALLEL_WORK {
            (0..n_cols).into_par_iter().map(|c| self.hist_for(c, rows)).collect()
        } else {
            (0..n_cols).map(|c| self.hist_for(c, rows)).collect()
        }
    }

    fn score(&self, g: &[f64], h: &[f64]) -> f64 {
        g.iter().zip(h).map(|(g, h)| g * g / (h + self.params.lambda)).sum()
    }

    fn best_in_column(&self, col: usize, hist: &Hist, total_g: &[f64], total_h: &[f64], total_c: u32) -> Option<Candidate> {
        let d = self.dim;
        let slots = hist.count.len();
        let value_bins = slots - 1;
        let miss = value_bins;
        let miss_c = hist.count[miss];
        if value_bins < 2 && miss_c == 0 {
            return None;
        }
        let min_leaf = self.params.min_samples_leaf.max(1) as u32;
        let parent = self.score(total_g, total_h);
        let mut lg = vec![0.0; d];
        let mut lh = vec![0.0; d];
        let mut lc = 0u32;
        let mut buf_g = vec![0.0; d];
        let mut buf_h = vec![0.0; d];
        let mut rg = vec![0.0; d];
        let mut rh = vec![0.0; d];
        let mut best: Option<Candidate> = None;
        // the last bin only separates values from missings
        let last = if miss_c > 0 { value_bins } else { value_bins - 1 };
        for b in 0..last {
            for k in 0..d {
                lg[k] += hist.grad[b * d + k];
                lh[k] += hist.hess[b * d + k];
            }
            lc += hist.count[b];
            let options: &[bool] = if miss_c == 0 || b == value_bins - 1 { &[false] } else { &[false, true] };
            for &missing_left in options {
                let (cl, cr);
                if missing_left {
                    for k in 0..d {
                        buf_g[k] = lg[k] + hist.grad[miss * d + k];
                        buf_h[k] = lh[k] + hist.hess[miss * d + k];
                    }
                    cl = lc + miss_c;
                } else {
                    buf_g.copy_from_slice(&lg);
                    buf_h.copy_from_slice(&lh);
                    cl = lc;
                }
                cr = total_c - cl;
                if cl < min_leaf || cr < min_leaf {
                    continue;
                }
                for k in 0..d {
                    rg[k] = total_g[k] - buf_g[k];
                    rh[k] = total_h[k] - buf_h[k];
                }
                let gain = self.score(&buf_g, &buf_h) + self.score(&rg, &rh) - parent;
                if best.as_ref().is_none_or(|c| gain > c.gain) {
                    // without training missings, route them to the larger side
                    let missing_left = if miss_c > 0 { missing_left } else { cl >= cr };
                    best = Some(Candidate {
                        column: col,
                        bin: b,
                        missing_left,
                        gain,
                    });
                }
            }
        }
        best
    }

    /// Grows one tree on `rows` (duplicates allowed). `leaf_values` maps the
    /// rows of a leaf to its stored values. Returns the tree and, for every
    /// leaf, the rows that reached it.
    pub fn grow<R: Rng>(
        &self,
        rows: Vec<usize>,
        class: Option<usize>,
        rng: &mut R,
        leaf_values: &dyn Fn(&[usize]) -> Vec<f64>,
    ) -> (Tree, Vec<(usize, Vec<usize>)>) {
        let d = self.dim;
        let n_cols = self.data.n_columns();
        let mut nodes: Vec<Node> = vec![Node::Leaf { values: Vec::new() }];
        let mut leaves = Vec::new();
        let root_hist = self.histograms(&rows);
        let mut stack = vec![(0usize, rows, root_hist, 0usize)];
        while let Some((id, rows, hists, depth)) = stack.pop() {
            let mut total_g = vec![0.0; d];
            let mut total_h = vec![0.0; d];
            for &r in &rows {
                for k in 0..d {
                    total_g[k] += self.grad[r * d + k];
                    total_h[k] += self.hess[r * d + k];
                }
            }
            let can_split = self.params.max_depth.is_none_or(|m| depth < m)
                && rows.len() >= 2 * self.params.min_samples_leaf.max(1)
                && n_cols > 0;
            let best = if can_split {
                let candidates: Vec<usize> = match self.params.columns_per_split {
                    Some(k) if k < n_cols => {
                        let mut c = sample(rng, n_cols, k).into_vec();
                        c.sort_unstable();
                        c
                    }
                    _ => (0..n_cols).collect(),
                };
                let total_c = rows.len() as u32;
                let per_col: Vec<Option<Candidate>> = if rows.len() * candidates.len() >= PARALLEL_WORK {
                    candidates
                        .par_iter()
                        .map(|&c| self.best_in_column(c, &hists[c], &total_g, &total_h, total_c))
                        .collect()
                } else {
                    candidates
                        .iter()
                        .map(|&c| self.best_in_column(c, &hists[c], &total_g, &total_h, total_c))
                        .collect()
                };
                let mut best: Option<Candidate> = None;
                for c in per_col.into_iter().flatten() {
                    if best.as_ref().is_none_or(|b| c.gain > b.gain) {
                        best = Some(c);
                    }
                }
                best.filter(|b| b.gain > self.params.min_gain)
            } else {
                None
            };

            let Some(best) = best else {
                nodes[id] = Node::Leaf {
                    values: leaf_values(&rows),
                };
                leaves.push((id, rows));
                continue;
            };

            let bins = &self.data.bins[best.column];
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| {
                let b = bins[r];
                if b == MISSING_BIN {
                    best.missing_left
                } else {
                    (b as usize) <= best.bin
                }
            });
            let left_smaller = left_rows.len() <= right_rows.len();
            let small = if left_smaller { &left_rows } else { &right_rows };
            let small_hists = self.histograms(small);
            let large_hists: Vec<Hist> = hists
                .into_iter()
                .zip(&small_hists)
                .map(|(mut p, s)| {
                    p.grad.iter_mut().zip(&s.grad).for_each(|(a, b)| *a -= b);
                    p.hess.iter_mut().zip(&s.hess).for_each(|(a, b)| *a -= b);
                    p.count.iter_mut().zip(&s.count).for_each(|(a, b)| *a -= b);
                    p
                })
                .collect();
            let (left_hists, right_hists) = if left_smaller {
                (small_hists, large_hists)
            } else {
                (large_hists, small_hists)
            };
            let left = nodes.len();
            let right = left + 1;
            nodes.push(Node::Leaf { values: Vec::new() });
            nodes.push(Node::Leaf { values: Vec::new() });
            nodes[id] = Node::Split(Split {
                column: best.column,
                threshold: self.data.mappers[best.column].edges.get(best.bin).copied().unwrap_or(f64::MAX),
                missing_left: best.missing_left,
                left,
                right,
                gain: best.gain,
            });
            stack.push((right, right_rows, right_hists, depth + 1));
            stack.push((left, left_rows, left_hists, depth + 1));
        }
        (Tree { nodes, class }, leaves)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grow_on(matrix: Vec<Vec<f64>>, grad: Vec<f64>, depth: usize) -> Tree {
        let data = BinnedData::new(&matrix);
        let hess = vec![1.0; grad.len()];
        let params = GrowParams {
            max_depth: Some(depth),
            min_samples_leaf: 1,
            lambda: 1.0,
            min_gain: 0.0,
            columns_per_split: None,
        };
        let grower = Grower {
            data: &data,
            grad: &grad,
            hess: &hess,
            dim: 1,
            params: &params,
        };
        let n = grad.len();
        let g = grad.clone();
        let values = move |rows: &[usize]| vec![-rows.iter().map(|&r| g[r]).sum::<f64>() / (rows.len() as f64 + 1.0)];
        grower.grow((0..n).collect(), Some(0), &mut ChaCha8Rng::seed_from_u64(0), &values).0
    }

    #[test]
    fn splits_on_the_informative_column() {
        let x0 = vec![1.0, 2.0, 3.0, 4.0];
        let x1 = vec![5.0, 5.0, 5.0, 6.0];
        let tree = grow_on(vec![x1, x0], vec![1.0, 1.0, -1.0, -1.0], 1);
        match &tree.nodes[0] {
            Node::Split(s) => {
                assert_eq!(s.column, 1);
                assert_eq!(s.threshold, 2.5);
            }
            _ => panic!("expected split"),
        }
        assert!(tree.predict(&[5.0, 1.5])[0] < 0.0);
        assert!(tree.predict(&[5.0, 3.5])[0] > 0.0);
    }

    #[test]
    fn missing_values_follow_learned_direction() {
        let x = vec![f64::NAN, f64::NAN, 1.0, 2.0];
        let tree = grow_on(vec![x], vec![1.0, 1.0, -1.0, -1.0], 1);
        let miss = tree.predict(&[f64::NAN])[0];
        let present = tree.predict(&[1.0])[0];
        assert!(miss < 0.0 && present > 0.0);
    }

    #[test]
    fn pure_node_stays_leaf() {
        let tree = grow_on(vec![vec![1.0, 2.0, 3.0]], vec![0.0, 0.0, 0.0], 3);
        assert_eq!(tree.nodes.len(), 1);
    }
}
