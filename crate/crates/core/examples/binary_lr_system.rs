//! One LR system end to end: train on three subjects, report bounded LRs and
//! Cllr on the fourth, then save and reload the system.
//!
//! By default the calibrator is fitted on subject-wise out-of-fold training
//! margins. Calibrating on the scorer's own in-sample margins instead is
//! shown for comparison: a boosted scorer looks overconfident on its own
//! training data.

use trace2lr::calibration::{Hypotheses, LrSystem, LrSystemConfig};
use trace2lr::metrics::{BinaryEvalSet, CllrReport, Hyp};
use trace2lr::synthetic::{SyntheticConfig, SyntheticDataset};

fn main() -> trace2lr::Result<()> {
    let data = SyntheticDataset::generate(&SyntheticConfig::small(4)).dataset;
    let train = data.filter(|s| s.provenance.subject_id != "s04");
    let test = data.filter(|s| s.provenance.subject_id == "s04");

    let hyp = Hypotheses::new(vec!["walking".into(), "running".into()], vec!["cycling".into()])?;
    let in_sample_cfg = LrSystemConfig {
        calibration_folds: None,
        ..LrSystemConfig::default()
    };
    let in_sample = LrSystem::fit(&train, &hyp, &in_sample_cfg)?;
    let system = LrSystem::fit(&train, &hyp, &LrSystemConfig::default())?;
    println!("{hyp}: log10 LR bounded to [{:.2}, {:.2}]", system.calibration.bounds.lower_log10, system.calibration.bounds.upper_log10);

    let mut llrs = Vec::new();
    let mut labels = Vec::new();
    for s in &test.samples {
        let Some(h) = hyp.classify(&s.label) else { continue };
        llrs.push(system.log10_lr(s));
        labels.push(h);
    }
    for (l, h) in llrs.iter().zip(&labels).step_by(8) {
        println!("  true {h}: log10 LR {l:+.2}");
    }
    let in_sample_llrs: Vec<f64> = test.samples.iter().filter(|s| hyp.classify(&s.label).is_some()).map(|s| in_sample.log10_lr(s)).collect();
    let in_sample_report = CllrReport::of(&BinaryEvalSet::from_log10(&in_sample_llrs, labels.clone())?)?;
    let set = BinaryEvalSet::from_log10(&llrs, labels.clone())?;
    let r = CllrReport::of(&set)?;
    let support = llrs.iter().zip(&labels).filter(|(l, h)| (**l > 0.0) == (**h == Hyp::H1)).count();
    println!("cllr {:.3}, cllr_min {:.3}, {support}/{} LRs support the true hypothesis", r.cllr, r.cllr_min, llrs.len());

    println!("in-sample calibration: cllr {:.3}, cllr_min {:.3}", in_sample_report.cllr, in_sample_report.cllr_min);

    let path = std::env::temp_dir().join("trace2lr-system.json");
    system.save(&path)?;
    let again = LrSystem::load(&path)?;
    assert_eq!(again.log10_lr(&test.samples[0]), system.log10_lr(&test.samples[0]));
    println!("saved and reloaded {}", path.display());
    Ok(())
}
