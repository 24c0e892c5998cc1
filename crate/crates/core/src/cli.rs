//! The `trace2lr` command line.
//!
//! Every verb reads a JSON experiment configuration, runs one procedure and
//! writes its tables and figures to the output directory. Exit codes: 0 on
//! success, 1 for invalid input (bad flags, configuration or data), 2 when a
//! run fails for other reasons (I/O).

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use crate::calibration::{Hypotheses, LrSystem};
use crate::error::{Error, Result};
use crate::experiments::{
    ablation_sweep, default_grouping, evaluate_pair, group_sweep, importance_map, naive_cmxe, pairwise_matrix, sensitivity_leave_factor,
    timeline_from_config, ExperimentConfig,
};
use crate::ingest::{aggregate_to_minutes, attach_labels, dataset_summary, default_vocabulary, load_intervals, load_registrations, write_dataset, Factor};
use crate::metrics::{default_ece_grid, ece_curve, pav_curve, tippett_curve, CllrReport};
use crate::parallel::{threads_from_env, with_threads};
use crate::report::{self, MatrixValue};

#[derive(Parser, Debug)]
#[command(name = "trace2lr", version, about = "Likelihood ratios for physical activities from smartphone traces")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Master seed, overriding the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, overriding the configuration.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Configuration override `dotted.key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(clap::Args, Debug, Clone)]
pub struct PairArgs {
    /// Comma-separated activities of the first hypothesis.
    #[arg(long)]
    pub h1: String,
    /// Comma-separated activities of the second hypothesis.
    #[arg(long)]
    pub h2: String,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FactorArg {
    Phone,
    Location,
}

#[derive(Subcommand, Debug)]
pub enum Verb {
    /// Aggregate raw registrations into a labelled one-minute dataset.
    Ingest(Common),
    /// Train an LR system on the whole dataset and save it as JSON.
    Fit {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Cross-validate one LR system and draw its PAV, Tippett and ECE plots.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Cllr matrix over all activity pairings.
    Pairwise(Common),
    /// Pairwise evaluation for every scorer family and calibrator.
    Ablation(Common),
    /// Leave-one-level-out analysis of phone model or carry location.
    Sensitivity {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        factor: Option<FactorArg>,
    },
    /// Multiclass Cmxe for every combination of activity groups.
    Groups {
        #[command(flatten)]
        common: Common,
        /// Comma-separated groups to include (default: all).
        #[arg(long)]
        groups: Option<String>,
    },
    /// Likelihood timeline of a scripted sequence of validation minutes.
    Timeline {
        #[command(flatten)]
        common: Common,
        /// Comma-separated groups the timeline model distinguishes.
        #[arg(long)]
        groups: Option<String>,
    },
    /// Variable importance per activity.
    Importance(Common),
}

impl Verb {
    fn common(&self) -> &Common {
        match self {
            Verb::Ingest(c) | Verb::Pairwise(c) | Verb::Ablation(c) | Verb::Importance(c) => c,
            Verb::Fit { common, .. }
            | Verb::Evaluate { common, .. }
            | Verb::Sensitivity { common, .. }
            | Verb::Groups { common, .. }
            | Verb::Timeline { common, .. } => common,
        }
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(str::to_string).collect()
}

fn hypotheses(p: &PairArgs) -> Result<Hypotheses> {
    Hypotheses::new(split_list(&p.h1), split_list(&p.h2))
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&c.config, &c.overrides)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.output_dir = o.clone();
    }
    Ok(cfg)
}

fn out(cfg: &ExperimentConfig, name: &str) -> PathBuf {
    cfg.output_dir.join(name)
}

fn fmt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.3}")).unwrap_or_else(|| "NA".into())
}

/// Runs one verb and returns the summary lines to print.
pub fn execute(verb: &Verb) -> Result<Vec<String>> {
    let mut cfg = load_config(verb.common())?;
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| Error::InvalidInput(format!("cannot create output directory {}: {e}", cfg.output_dir.display())))?;
    let mut lines = Vec::new();
    match verb {
        Verb::Ingest(_) => {
            let plan = cfg.ingest.as_ref().ok_or_else(|| Error::Validation("config has no `ingest` section".into()))?;
            let schema = cfg.load_schema()?;
            let vocabulary = cfg.vocabulary.clone().unwrap_or_else(default_vocabulary);
            let regs = load_registrations(&plan.registrations, &schema, &plan.columns)?;
            let intervals = load_intervals(&plan.intervals, &vocabulary, &plan.columns)?;
            let minutes = aggregate_to_minutes(&regs, &schema);
            let data = attach_labels(&minutes, &intervals, &regs, &schema, &vocabulary)?;
            let path = out(&cfg, "dataset.csv");
            write_dataset(&data, &path)?;
            let summary = dataset_summary(&data)?;
            report::write_json(out(&cfg, "dataset_summary.json"), &summary)?;
            lines.push(format!(
                "ingest: {} registrations -> {} labelled minutes, {} subjects -> {}",
                regs.len(),
                data.len(),
                summary.subjects.len(),
                path.display()
            ));
        }
        Verb::Fit { pair, .. } => {
            let hyp = hypotheses(pair)?;
            let data = cfg.load_dataset()?;
            let sys = LrSystem::fit(&data, &hyp, &cfg.system)?;
            let path = out(&cfg, "system.json");
            sys.save(&path)?;
            let b = &sys.calibration.bounds;
            lines.push(format!(
                "fit: {hyp}, {} + {}, log10 LR bounds [{:.3}, {:.3}] -> {}",
                cfg.system.scorer.family,
                cfg.system.calibrator,
                b.lower_log10,
                b.upper_log10,
                path.display()
            ));
        }
        Verb::Evaluate { pair, .. } => {
            let hyp = hypotheses(pair)?;
            let data = cfg.load_dataset()?;
            let ev = evaluate_pair(&data, &cfg, &hyp)?;
            let set = ev.eval_set();
            let rep = CllrReport::of(&set)?;
            report::write_json(out(&cfg, "cllr_report.json"), &rep)?;
            report::write_validation_csv(out(&cfg, "validation.csv"), &ev.rows)?;
            for (name, curve) in [
                ("pav", pav_curve(&set)?),
                ("tippett", tippett_curve(&set)),
                ("ece", ece_curve(&set, &default_ece_grid())?),
            ] {
                report::write_text(out(&cfg, &format!("{name}.svg")), &report::render_curve(&curve))?;
                report::write_curve_csv(out(&cfg, &format!("{name}.csv")), &curve)?;
            }
            lines.push(format!(
                "evaluate: {hyp}: cllr {:.3}, cllr_min {:.3}, cllr_cal {:.3}, accuracy {}, {} validation minutes",
                rep.cllr,
                rep.cllr_min,
                rep.cllr_cal,
                fmt(ev.accuracy()),
                set.len()
            ));
        }
        Verb::Pairwise(_) => {
            let data = cfg.load_dataset()?;
            let rep = pairwise_matrix(&data, &cfg)?;
            report::write_matrix_csv(out(&cfg, "pairwise_cllr.csv"), &rep, MatrixValue::Cllr)?;
            report::write_matrix_csv(out(&cfg, "pairwise_cllrmin.csv"), &rep, MatrixValue::CllrMin)?;
            report::write_matrix_long_csv(out(&cfg, "pairwise_long.csv"), &rep)?;
            report::write_json(out(&cfg, "pairwise.json"), &rep)?;
            report::write_text(out(&cfg, "heatmap.svg"), &report::render_heatmap(&rep))?;
            let absent = rep.cells.iter().filter(|c| c.cllr.is_none()).count();
            lines.push(format!(
                "pairwise: {} pairings ({absent} absent), mean cllr {}, {:.1}% below 1",
                rep.cells.len(),
                fmt(rep.mean_cllr()),
                rep.percent_below(1.0)
            ));
        }
        Verb::Ablation(_) => {
            let data = cfg.load_dataset()?;
            let rows = ablation_sweep(&data, &cfg)?;
            report::write_ablation_csv(out(&cfg, "ablation.csv"), &rows)?;
            report::write_json(out(&cfg, "ablation.json"), &rows)?;
            for r in &rows {
                lines.push(format!(
                    "ablation: {} + {}: accuracy {}%, mean cllr {}, {:.1}% below 1",
                    r.family,
                    r.calibrator,
                    fmt(r.accuracy),
                    fmt(r.mean_cllr),
                    r.percent_below.first().map(|p| p.1).unwrap_or(0.0)
                ));
            }
        }
        Verb::Sensitivity { factor, .. } => {
            let factor = match factor {
                Some(FactorArg::Phone) => Factor::Phone,
                Some(FactorArg::Location) => Factor::Location,
                None => cfg.sensitivity.factor,
            };
            let data = cfg.load_dataset()?;
            let rep = sensitivity_leave_factor(&data, &cfg, factor)?;
            report::write_sensitivity_csv(out(&cfg, "sensitivity.csv"), &rep)?;
            report::write_json(out(&cfg, "sensitivity.json"), &rep)?;
            lines.push(format!(
                "sensitivity: {factor:?}, {} levels ({} skipped), mean delta cllr {}, one-sided wilcoxon p = {:.4} (n = {})",
                rep.levels.len(),
                rep.skipped_levels.len(),
                fmt(rep.mean_delta),
                rep.wilcoxon.p_value,
                rep.wilcoxon.n
            ));
        }
        Verb::Groups { groups, .. } => {
            let data = cfg.load_dataset()?;
            let mut grouping = cfg.grouping.clone().unwrap_or_else(default_grouping);
            if let Some(list) = groups {
                let keep = split_list(list);
                if let Some(g) = keep.iter().find(|g| !grouping.groups.contains_key(*g)) {
                    return Err(Error::Validation(format!("unknown group `{g}`")));
                }
                grouping.groups.retain(|k, _| keep.contains(k));
            }
            let rows = group_sweep(&data, &grouping, &cfg)?;
            let naive = naive_cmxe(&data, &cfg)?;
            report::write_group_sweep_csv(out(&cfg, "groups.csv"), &rows)?;
            report::write_json(out(&cfg, "groups.json"), &(&rows, &naive))?;
            report::write_text(out(&cfg, "groups.svg"), &report::render_group_bars(&rows, Some(naive.normalized_cmxe)))?;
            let worst = rows.iter().map(|r| r.result.normalized_cmxe).fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
            lines.push(format!(
                "groups: {} combinations, worst normalized cmxe {}, naive {}-class normalized cmxe {:.3}",
                rows.len(),
                fmt(worst),
                naive.classes.len(),
                naive.normalized_cmxe
            ));
        }
        Verb::Timeline { groups, .. } => {
            if let Some(list) = groups {
                cfg.timeline.groups = split_list(list);
            }
            let data = cfg.load_dataset()?;
            let t = timeline_from_config(&data, &cfg)?;
            report::write_timeline_csv(out(&cfg, "timeline.csv"), &t)?;
            report::write_json(out(&cfg, "timeline.json"), &t)?;
            report::write_text(out(&cfg, "timeline.svg"), &report::render_timeline(&t))?;
            let (hit, n) = t.hits();
            lines.push(format!("timeline: {} minutes, {hit} of {n} labelled minutes predicted correctly", t.len()));
        }
        Verb::Importance(_) => {
            let data = cfg.load_dataset()?;
            let rep = importance_map(&data, &cfg)?;
            report::write_importance_csv(out(&cfg, "importance.csv"), &rep)?;
            report::write_json(out(&cfg, "importance.json"), &rep)?;
            report::write_text(out(&cfg, "importance.svg"), &report::render_importance(&rep))?;
            let top: Vec<&str> = rep.variables.iter().take(3).map(String::as_str).collect();
            lines.push(format!("importance: {} variables, {} activities, top: {}", rep.variables.len(), rep.activities.len(), top.join(", ")));
        }
    }
    info!("outputs in {}", cfg.output_dir.display());
    Ok(lines)
}

fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        1
    } else {
        2
    }
}

/// Parses `args` (program name first), runs the verb and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match with_threads(threads, || execute(&cli.verb)).and_then(|r| r) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
