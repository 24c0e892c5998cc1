//! Cllr, its decomposition, Cmxe and the diagnostic curves on hand-made inputs.

use trace2lr::metrics::{cllr, cmxe, default_ece_grid, ece_curve, ece_value, pav_curve, tippett_curve, BinaryEvalSet, CllrReport, Hyp, MulticlassEvalSet};

fn main() -> trace2lr::Result<()> {
    // LR = 3 for an H1 sample and LR = 3 for an H2 sample
    let set = BinaryEvalSet::new(vec![3f64.ln(), 3f64.ln()], vec![Hyp::H1, Hyp::H2])?;
    println!("cllr(ln 3, ln 3)      = {:.5}", cllr(&set)?);

    let neutral = BinaryEvalSet::new(vec![0.0; 4], vec![Hyp::H1, Hyp::H1, Hyp::H2, Hyp::H2])?;
    println!("cllr(LR = 1)          = {:.5}", cllr(&neutral)?);

    // well separated but overconfident: discrimination is perfect, calibration is not
    let log10 = [4.0, 3.0, 5.0, -1.0, 0.5, -2.0];
    let labels = vec![Hyp::H1, Hyp::H1, Hyp::H1, Hyp::H2, Hyp::H2, Hyp::H2];
    let over = BinaryEvalSet::from_log10(&log10, labels)?;
    let r = CllrReport::of(&over)?;
    println!("overconfident system  : cllr {:.3} = cllr_min {:.3} + cllr_cal {:.3}", r.cllr, r.cllr_min, r.cllr_cal);
    println!("ECE at prior odds 1   = {:.3}", ece_value(&over, 0.0)?);

    let pav = pav_curve(&over)?;
    println!("PAV points (system -> optimal log10 LR): {:?}", pav.series[0].points);
    let tippett = tippett_curve(&over);
    for s in &tippett.series {
        println!("Tippett {:>3}: {} points", s.name, s.points.len());
    }
    let ece = ece_curve(&over, &default_ece_grid())?;
    println!("ECE series: {:?}", ece.series.iter().map(|s| s.name.as_str()).collect::<Vec<_>>());

    let k = 4;
    let uniform = MulticlassEvalSet::new(k, vec![vec![0.0; k]; 8], (0..8).map(|i| i % k).collect())?;
    let c = cmxe(&uniform)?;
    println!("cmxe of a uniform {k}-class system = {:.3} bits (normalized {:.3})", c.cmxe, c.normalized);
    Ok(())
}
