//! Split-level prediction-change importance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::tree::{Node, Tree};
use super::TreeEnsembleModel;
use crate::ingest::LabeledDataset;

/// Importance per (activity, variable), row-normalized to a maximum of 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub activities: Vec<String>,
    /// Sorted by descending mean importance across activities.
    pub variables: Vec<String>,
    /// `values[a][v]` for `activities[a]` and `variables[v]`.
    pub values: Vec<Vec<f64>>,
}

impl ImportanceReport {
    pub fn get(&self, variable: &str, activity: &str) -> Option<f64> {
        let a = self.activities.iter().position(|x| x == activity)?;
        let v = self.variables.iter().position(|x| x == variable)?;
        Some(self.values[a][v])
    }

    pub fn mean_importance(&self, variable: &str) -> Option<f64> {
        let v = self.variables.iter().position(|x| x == variable)?;
        let n = self.activities.len().max(1) as f64;
        Some(self.values.iter().map(|row| row[v]).sum::<f64>() / n)
    }

    fn from_raw(activities: Vec<String>, variables: Vec<String>, mut raw: Vec<Vec<f64>>) -> Self {
        for row in &mut raw {
            let max = row.iter().copied().fold(0.0, f64::max);
            if max > 0.0 {
                row.iter_mut().for_each(|x| *x /= max);
            }
        }
        let n = activities.len().max(1) as f64;
        let mean = |v: usize| raw.iter().map(|r| r[v]).sum::<f64>() / n;
        let mut order: Vec<usize> = (0..variables.len()).collect();
        // stable: equal means keep schema order
        order.sort_by(|&a, &b| mean(b).total_cmp(&mean(a)));
        ImportanceReport {
            variables: order.iter().map(|&v| variables[v].clone()).collect(),
            values: raw.iter().map(|r| order.iter().map(|&v| r[v]).collect()).collect(),
            activities,
        }
    }
}

/// Adds `c_L (v_L - v)^2 + c_R (v_R - v)^2` of every split to its variable,
/// where `c` are training-row counts and `v` mean predictions of the node.
fn accumulate(tree: &Tree, encoded: &[Vec<f64>], component: usize, column_var: &[usize], out: &mut [f64]) {
    let len = tree.nodes.len();
    let mut count = vec![0.0; len];
    let mut sum = vec![0.0; len];
    for row in encoded {
        let leaf = tree.leaf_index(row);
        let Node::Leaf { values } = &tree.nodes[leaf] else { unreachable!() };
        let value = values[component];
        let mut i = 0;
        loop {
            count[i] += 1.0;
            sum[i] += value;
            match &tree.nodes[i] {
                Node::Leaf { .. } => break,
                Node::Split(s) => {
                    let x = row[s.column];
                    let left = if x.is_nan() { s.missing_left } else { x <= s.threshold };
                    i = if left { s.left } else { s.right };
                }
            }
        }
    }
    let mean = |i: usize| if count[i] > 0.0 { sum[i] / count[i] } else { 0.0 };
    for (i, node) in tree.nodes.iter().enumerate() {
        if let Node::Split(s) = node {
            let v = mean(i);
            let change = count[s.left] * (mean(s.left) - v).powi(2) + count[s.right] * (mean(s.right) - v).powi(2);
            out[column_var[s.column]] += change;
        }
    }
}

/// Importance of each schema variable for each class of `model`, measured on
/// the training rows of those classes.
pub fn variable_importance(model: &TreeEnsembleModel, train: &LabeledDataset) -> ImportanceReport {
    let k = model.n_classes();
    let variables: Vec<String> = model.schema.variables().iter().map(|v| v.name.clone()).collect();
    let column_var: Vec<usize> = model.encoder.columns.iter().map(|c| c.variable).collect();
    let encoded: Vec<Vec<f64>> = train
        .samples
        .iter()
        .filter(|s| model.class_index(&s.label).is_some())
        .map(|s| model.encoder.encode_row(&s.features))
        .collect();
    let mut raw = vec![vec![0.0; variables.len()]; k];
    for tree in &model.trees {
        match tree.class {
            Some(c) => accumulate(tree, &encoded, 0, &column_var, &mut raw[c]),
            None => {
                for (c, row) in raw.iter_mut().enumerate() {
                    accumulate(tree, &encoded, c, &column_var, row);
                }
            }
        }
    }
    ImportanceReport::from_raw(model.class_order.clone(), variables, raw)
}

/// Averages reports over models (e.g. all activity pairings) per activity,
/// then renormalizes. Activities absent from a report do not dilute its mean.
pub fn aggregate_importance(reports: &[ImportanceReport]) -> ImportanceReport {
    let mut variables: Vec<String> = Vec::new();
    for r in reports {
        for v in &r.variables {
            if !variables.contains(v) {
                variables.push(v.clone());
            }
        }
    }
    let mut acc: BTreeMap<&str, (Vec<f64>, usize)> = BTreeMap::new();
    let mut activity_order: Vec<String> = Vec::new();
    for r in reports {
        for (a, activity) in r.activities.iter().enumerate() {
            if !activity_order.contains(activity) {
                activity_order.push(activity.clone());
            }
            let entry = acc.entry(activity.as_str()).or_insert_with(|| (vec![0.0; variables.len()], 0));
            for (v, name) in r.variables.iter().enumerate() {
                let idx = variables.iter().position(|x| x == name).expect("collected above");
                entry.0[idx] += r.values[a][v];
            }
            entry.1 += 1;
        }
    }
    let raw = activity_order
        .iter()
        .map(|a| {
            let (sum, n) = &acc[a.as_str()];
            sum.iter().map(|x| x / *n as f64).collect()
        })
        .collect();
    ImportanceReport::from_raw(activity_order, variables, raw)
}
