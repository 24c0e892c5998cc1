//! Ordered target statistics for categorical variables.
//!
//! During training a row's categorical value is replaced by the smoothed mean
//! target of the rows with the same token that come *before* it in a random
//! permutation, so no row sees its own label. At inference the statistics of
//! the whole training set are used. A missing value is its own token, and an
//! unseen token is treated as missing.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{FeatureRow, FeatureValue, VariableKind, VariableSchema};

/// Encodes one categorical column with ordered target statistics.
///
/// For row `i` the value is `(sum of earlier same-token targets + prior * p0) /
/// (count of earlier same-token rows + prior)` where "earlier" refers to the
/// position in `permutation` and `p0` is the mean of all targets. Output is
/// indexed like `column`.
pub fn encode_ordered_categorical(column: &[Option<&str>], targets: &[f64], permutation: &[usize], prior: f64) -> Result<Vec<f64>> {
    let n = column.len();
    if targets.len() != n || permutation.len() != n {
        return Err(Error::InvalidInput(format!(
            "length mismatch: column {n}, targets {}, permutation {}",
            targets.len(),
            permutation.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in permutation {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidInput("permutation is not a bijection".into()));
        }
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let p0 = targets.iter().sum::<f64>() / n as f64;
    let mut history: HashMap<Option<&str>, (f64, f64)> = HashMap::new();
    let mut out = vec![0.0; n];
    for &i in permutation {
        let entry = history.entry(column[i]).or_insert((0.0, 0.0));
        out[i] = (entry.0 + prior * p0) / (entry.1 + prior);
        entry.0 += targets[i];
        entry.1 += 1.0;
    }
    Ok(out)
}

/// Per-token target counts of one categorical variable.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TokenCounts {
    pub count: f64,
    pub per_class: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryStats {
    pub variable: usize,
    pub tokens: BTreeMap<String, TokenCounts>,
    pub missing: TokenCounts,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ColumnSource {
    Numeric,
    /// Target statistic of the indicator of `class`; `stats` indexes
    /// [`FeatureEncoder::categories`].
    Categorical { stats: usize, class: usize },
}

/// One column of the numeric matrix the trees are grown on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodedColumn {
    pub name: String,
    /// Index of the originating schema variable.
    pub variable: usize,
    pub source: ColumnSource,
}

/// Maps mixed-type feature rows to numeric rows (`NaN` = missing).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureEncoder {
    pub columns: Vec<EncodedColumn>,
    pub categories: Vec<CategoryStats>,
    pub class_means: Vec<f64>,
    pub prior: f64,
}

impl FeatureEncoder {
    /// Fits the encoder and returns it with the column-major training matrix,
    /// whose categorical columns hold ordered statistics under `permutation`.
    pub fn fit(
        schema: &VariableSchema,
        rows: &[&FeatureRow],
        labels: &[usize],
        n_classes: usize,
        prior: f64,
        permutation: &[usize],
    ) -> Result<(FeatureEncoder, Vec<Vec<f64>>)> {
        let n = rows.len();
        let mut class_means = vec![0.0; n_classes];
        for &y in labels {
            class_means[y] += 1.0;
        }
        class_means.iter_mut().for_each(|m| *m /= n.max(1) as f64);
        // two classes need one indicator; more need one per class
        let encoded_classes: Vec<usize> = if n_classes == 2 { vec![1] } else { (0..n_classes).collect() };

        let mut columns = Vec::new();
        let mut categories = Vec::new();
        let mut matrix = Vec::new();
        for (vi, var) in schema.variables().iter().enumerate() {
            match var.kind {
                VariableKind::Categorical => {
                    let tokens: Vec<Option<&str>> = rows.iter().map(|r| r[vi].as_ref().and_then(FeatureValue::as_token)).collect();
                    let mut stats = CategoryStats {
                        variable: vi,
                        tokens: BTreeMap::new(),
                        missing: TokenCounts {
                            count: 0.0,
                            per_class: vec![0.0; n_classes],
                        },
                    };
                    for (t, &y) in tokens.iter().zip(labels) {
                        let counts = match t {
                            Some(t) => stats.tokens.entry(t.to_string()).or_insert_with(|| TokenCounts {
                                count: 0.0,
                                per_class: vec![0.0; n_classes],
                            }),
                            None => &mut stats.missing,
                        };
                        counts.count += 1.0;
                        counts.per_class[y] += 1.0;
                    }
                    let stats_idx = categories.len();
                    categories.push(stats);
                    for &c in &encoded_classes {
                        let targets: Vec<f64> = labels.iter().map(|&y| if y == c { 1.0 } else { 0.0 }).collect();
                        matrix.push(encode_ordered_categorical(&tokens, &targets, permutation, prior)?);
                        columns.push(EncodedColumn {
                            name: if n_classes == 2 { var.name.clone() } else { format!("{}#{c}", var.name) },
                            variable: vi,
                            source: ColumnSource::Categorical { stats: stats_idx, class: c },
                        });
                    }
                }
                _ => {
                    matrix.push(
                        rows.iter()
                            .map(|r| r[vi].as_ref().and_then(FeatureValue::as_number).unwrap_or(f64::NAN))
                            .collect(),
                    );
                    columns.push(EncodedColumn {
                        name: var.name.clone(),
                        variable: vi,
                        source: ColumnSource::Numeric,
                    });
                }
            }
        }
        Ok((
            FeatureEncoder {
                columns,
                categories,
                class_means,
                prior,
            },
            matrix,
        ))
    }

    /// Inference-time encoding using full training statistics.
    pub fn encode_row(&self, row: &FeatureRow) -> Vec<f64> {
        self.columns
            .iter()
            .map(|col| match col.source {
                ColumnSource::Numeric => row
                    .get(col.variable)
                    .and_then(|v| v.as_ref())
                    .and_then(FeatureValue::as_number)
                    .unwrap_or(f64::NAN),
                ColumnSource::Categorical { stats, class } => {
                    let st = &self.categories[stats];
                    let counts = row
                        .get(col.variable)
                        .and_then(|v| v.as_ref())
                        .and_then(FeatureValue::as_token)
                        .and_then(|t| st.tokens.get(t))
                        .unwrap_or(&st.missing);
                    (counts.per_class.get(class).copied().unwrap_or(0.0) + self.prior * self.class_means[class])
                        / (counts.count + self.prior)
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_occurrence_is_prior_mean() {
        let v = encode_ordered_categorical(&[Some("x"), Some("y")], &[1.0, 0.0], &[0, 1], 1.0).unwrap();
        assert_eq!(v, vec![0.5, 0.5]);
    }

    #[test]
    fn second_occurrence_uses_history() {
        // p0 = (1 + 0) / 2 = 0.5; second x sees one earlier target 1
        let v = encode_ordered_categorical(&[Some("x"), Some("x")], &[1.0, 0.0], &[0, 1], 1.0).unwrap();
        assert_eq!(v[1], (1.0 + 0.5) / (1.0 + 1.0));
        assert_eq!(v[1], 0.75);
    }

    #[test]
    fn distinct_tokens_all_encode_global_mean() {
        let col = [Some("a"), Some("b"), Some("c"), None];
        let targets = [1.0, 0.0, 1.0, 1.0];
        let v = encode_ordered_categorical(&col, &targets, &[3, 1, 0, 2], 1.0).unwrap();
        assert!(v.iter().all(|&x| x == 0.75));
    }

    #[test]
    fn bad_inputs() {
        assert!(encode_ordered_categorical(&[Some("a")], &[1.0, 0.0], &[0], 1.0).is_err());
        assert!(encode_ordered_categorical(&[Some("a"), Some("b")], &[1.0, 0.0], &[0, 0], 1.0).is_err());
    }

    proptest! {
        #[test]
        fn encoding_is_causal(
            tokens in proptest::collection::vec(0u8..3, 2..20),
            flips in proptest::collection::vec(any::<bool>(), 20),
            cut in 0usize..20,
        ) {
            let n = tokens.len();
            let names = ["a", "b", "c"];
            let col: Vec<Option<&str>> = tokens.iter().map(|&t| Some(names[t as usize])).collect();
            let targets: Vec<f64> = (0..n).map(|i| if flips[i] { 1.0 } else { 0.0 }).collect();
            let perm: Vec<usize> = (0..n).rev().collect();
            let before = encode_ordered_categorical(&col, &targets, &perm, 1.0).unwrap();
            // edit the rows after position `cut` in permutation order, keeping p0 fixed
            let cut = cut % n;
            let mut col2 = col.clone();
            for &i in &perm[cut + 1..] {
                col2[i] = Some("z");
            }
            let after = encode_ordered_categorical(&col2, &targets, &perm, 1.0).unwrap();
            for &i in &perm[..=cut] {
                prop_assert_eq!(before[i], after[i]);
            }
        }
    }
}
