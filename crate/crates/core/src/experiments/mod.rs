//! The evaluation protocol: subject-wise folds, multilevel bootstrap, pairwise
//! matrices, ablations, sensitivity analysis, group sweeps and timelines.
//!
//! Every independent work item (pairing, fold, replicate, subset) derives its
//! seed from the master seed and a stable identifier, so results do not depend
//! on scheduling or on the number of worker threads.

mod bootstrap;
mod config;
mod folds;
mod groups;
mod pairwise;
mod sensitivity;
mod timeline;
mod wilcoxon;

pub use bootstrap::{multilevel_bootstrap, BootstrapPlan, BootstrapResult};
pub use config::{AblationPlan, ExperimentConfig, FoldAggregation, IngestPlan, SensitivityPlan, TimelinePlan};
pub use folds::{subjectwise_folds, CvPlan, Fold};
pub use groups::{default_grouping, fit_multiclass, group_sweep, log_likelihoods, naive_cmxe, ActivityGrouping, GroupSweepRow, MulticlassResult};
pub use pairwise::{
    ablation_sweep, evaluate_pair, family_config, importance_map, pairwise_matrix, AblationRow, PairCell, PairEvaluation, PairwiseMatrixReport, ValidationRow,
    CLLR_THRESHOLDS,
};
pub use sensitivity::{leave_level_split, random_removal, sensitivity_leave_factor, LevelResult, SensitivityCell, SensitivityReport};
pub use timeline::{build_timeline, reconstruct_script, timeline_from_config, ScriptStep, Timeline};
pub use wilcoxon::{wilcoxon_signed_rank, Alternative, WilcoxonResult};

/// Seed for the work item `id` under `master`. Stable across platforms.
pub fn derive_seed(master: u64, id: &str) -> u64 {
    // FNV-1a over the identifier, then a splitmix64 finalizer with the master
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = h ^ master.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
