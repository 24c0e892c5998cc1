//! Likelihood ratios for physical activities from smartphone digital traces.
//!
//! The crate turns timestamped trace registrations into one-minute labelled
//! samples, trains tree-ensemble scorers on them, calibrates the scores into
//! bounded likelihood ratios and evaluates the resulting systems with Cllr,
//! Cmxe, PAV, Tippett and ECE diagnostics. The [`experiments`] module runs the
//! full evaluation protocol (subject-wise cross-validation, multilevel
//! bootstrap, pairwise matrices, ablations, sensitivity analysis, group sweeps
//! and timelines).
//!
//! Every capability has a runnable example under `examples/`:
//!
//! ```bash
//! cargo run --release --example binary_lr_system
//! ```

pub mod calibration;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod ingest;
pub mod metrics;
pub mod parallel;
pub mod report;
pub mod scorer;
pub mod synthetic;

pub use calibration::{CalibratorKind, ElubBounds, LrSystem, PriorOdds};
pub use error::{Error, Result};
pub use ingest::{FeatureValue, LabeledDataset, MinuteSample, Provenance, VariableKind, VariableSchema};
pub use metrics::{BinaryEvalSet, CllrReport, Hyp, MulticlassEvalSet};
pub use scorer::{ScorerConfig, ScorerFamily, TreeEnsembleModel};
