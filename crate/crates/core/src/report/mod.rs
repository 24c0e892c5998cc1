//! Deterministic SVG figures and CSV/JSON tables.
//!
//! Figures use a fixed layout with coordinates printed to two decimals, so
//! rendering the same data twice gives byte-identical files.

mod svg;
mod tables;

pub use svg::{render_curve, render_group_bars, render_heatmap, render_importance, render_timeline};
pub use tables::{
    write_ablation_csv, write_curve_csv, write_group_sweep_csv, write_importance_csv, write_json, write_matrix_csv, write_matrix_long_csv,
    write_sensitivity_csv, write_text, write_timeline_csv, write_validation_csv, MatrixValue,
};
