use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::groups::ActivityGrouping;
use super::timeline::ScriptStep;
use super::BootstrapPlan;
use crate::calibration::{CalibratorKind, LrSystemConfig};
use crate::error::{Error, Result};
use crate::ingest::{read_dataset, ColumnNames, Factor, LabeledDataset, VariableSchema};
use crate::scorer::ScorerFamily;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldAggregation {
    /// Pool validation LRs of all folds, then compute metrics once.
    #[default]
    Pooled,
    /// Compute metrics per fold and average them.
    PerFold,
}

/// Raw inputs for the `ingest` verb.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IngestPlan {
    pub registrations: PathBuf,
    pub intervals: PathBuf,
    #[serde(default)]
    pub columns: ColumnNames,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AblationPlan {
    pub families: Vec<ScorerFamily>,
    pub calibrators: Vec<CalibratorKind>,
}

impl Default for AblationPlan {
    fn default() -> Self {
        AblationPlan {
            families: vec![ScorerFamily::GradientBoosted, ScorerFamily::BaggedEnsemble, ScorerFamily::SingleTree],
            calibrators: vec![CalibratorKind::Logistic, CalibratorKind::Gaussian, CalibratorKind::Kde],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensitivityPlan {
    pub factor: Factor,
    /// Activities whose pairings are analysed; all activities when absent.
    pub activities: Option<Vec<String>>,
}

impl Default for SensitivityPlan {
    fn default() -> Self {
        SensitivityPlan {
            factor: Factor::Phone,
            activities: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimelinePlan {
    /// Groups the timeline model distinguishes.
    pub groups: Vec<String>,
    pub script: Vec<ScriptStep>,
    /// Fold whose validation subjects supply the minutes.
    pub fold: usize,
}

impl Default for TimelinePlan {
    fn default() -> Self {
        let step = |a: &str, m| ScriptStep {
            activity: a.into(),
            minutes: m,
        };
        TimelinePlan {
            groups: vec!["stationary".into(), "movement".into(), "transport".into(), "dynamic".into()],
            script: vec![
                step("sitting", 4),
                step("walking", 3),
                step("tram", 10),
                step("walking", 4),
                step("kicking", 1),
                step("punching", 1),
                step("running", 3),
            ],
            fold: 0,
        }
    }
}

/// Experiment configuration file (JSON). Relative paths are resolved
/// against the directory of the file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Labelled one-minute dataset (CSV).
    pub dataset: Option<PathBuf>,
    /// Variable schema (JSON).
    pub schema: Option<PathBuf>,
    pub ingest: Option<IngestPlan>,
    /// Activity vocabulary; taken from the dataset when absent.
    pub vocabulary: Option<Vec<String>>,
    /// Activities included in experiments; all present ones when absent.
    pub activities: Option<Vec<String>>,
    pub system: LrSystemConfig,
    /// Number of subject-wise folds; one per subject when absent.
    pub folds: Option<usize>,
    pub bootstrap: BootstrapPlan,
    pub fold_aggregation: FoldAggregation,
    /// Master seed from which every work item derives its own.
    pub seed: u64,
    /// Minimum validation samples per hypothesis for a fold to count.
    pub min_validation_per_class: usize,
    pub ablation: AblationPlan,
    pub sensitivity: SensitivityPlan,
    pub grouping: Option<ActivityGrouping>,
    pub timeline: TimelinePlan,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: None,
            schema: None,
            ingest: None,
            vocabulary: None,
            activities: None,
            system: LrSystemConfig::default(),
            folds: None,
            bootstrap: BootstrapPlan::default(),
            fold_aggregation: FoldAggregation::Pooled,
            seed: 0,
            min_validation_per_class: 1,
            ablation: AblationPlan::default(),
            sensitivity: SensitivityPlan::default(),
            grouping: None,
            timeline: TimelinePlan::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Sets `path` (dot-separated) in a JSON object tree. The value is parsed
/// as JSON when possible and taken as a string otherwise.
fn set_path(root: &mut Value, key: &str, raw: &str) -> Result<()> {
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::InvalidInput(format!("bad override key `{key}`")));
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::InvalidInput(format!("override `{key}` descends into a non-object")))?;
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
    }
    node.as_object_mut()
        .ok_or_else(|| Error::InvalidInput(format!("override `{key}` descends into a non-object")))?
        .insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl ExperimentConfig {
    /// Parses a configuration with `key=value` overrides applied on top.
    pub fn from_json_with(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))?;
        if !value.is_object() {
            return Err(Error::Format("config must be a JSON object".into()));
        }
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("override `{o}` is not key=value")))?;
            set_path(&mut value, k.trim(), v.trim())?;
        }
        serde_json::from_value(value).map_err(|e| Error::Format(format!("config: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        ExperimentConfig::from_json_with(text, &[])
    }

    pub fn load(path: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let path = path.as_ref();
        if !path.is_file() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let mut cfg = ExperimentConfig::from_json_with(&std::fs::read_to_string(path)?, overrides)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [&mut self.dataset, &mut self.schema].into_iter().flatten() {
            resolve(base, p);
        }
        if let Some(i) = &mut self.ingest {
            resolve(base, &mut i.registrations);
            resolve(base, &mut i.intervals);
        }
        resolve(base, &mut self.output_dir);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load_schema(&self) -> Result<VariableSchema> {
        let p = self.schema.as_ref().ok_or_else(|| Error::Validation("config has no `schema`".into()))?;
        VariableSchema::from_json_file(p)
    }

    /// Reads the dataset and keeps the configured activities.
    pub fn load_dataset(&self) -> Result<LabeledDataset> {
        let p = self.dataset.as_ref().ok_or_else(|| Error::Validation("config has no `dataset`".into()))?;
        if !p.is_file() {
            return Err(Error::MissingFile(p.clone()));
        }
        let data = read_dataset(p, &self.load_schema()?, self.vocabulary.as_deref())?;
        Ok(self.restrict(&data))
    }

    pub fn restrict(&self, data: &LabeledDataset) -> LabeledDataset {
        match &self.activities {
            Some(a) => data.filter(|s| a.contains(&s.label)),
            None => data.clone(),
        }
    }

    /// Activities in vocabulary order that are present in `data`.
    pub fn activity_list(&self, data: &LabeledDataset) -> Vec<String> {
        let present = data.present_labels();
        match &self.activities {
            Some(a) => present.into_iter().filter(|x| a.contains(x)).collect(),
            None => present,
        }
    }

    pub fn n_folds(&self, data: &LabeledDataset) -> usize {
        self.folds.unwrap_or_else(|| data.levels(Factor::Subject).len())
    }
}
