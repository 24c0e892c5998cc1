use proptest::prelude::*;

use super::*;

fn set(llrs: &[f64], labels: &[Hyp]) -> BinaryEvalSet {
    BinaryEvalSet::new(llrs.to_vec(), labels.to_vec()).unwrap()
}

use Hyp::{H1, H2};

#[test]
fn cllr_reference_points() {
    assert!((cllr(&set(&[0.0, 0.0, 0.0], &[H1, H2, H2])).unwrap() - 1.0).abs() < 1e-12);
    assert!(cllr(&set(&[50.0, -50.0], &[H1, H2])).unwrap() < 1e-12);
    let l3 = 3f64.ln();
    let expected = ((4.0f64 / 3.0).log2() + 2.0) / 2.0;
    assert!((cllr(&set(&[l3, l3], &[H1, H2])).unwrap() - expected).abs() < 1e-12);
    assert!((expected - 1.20752).abs() < 1e-5);
    assert!(cllr(&set(&[1.0], &[H1])).is_err());
    assert!(BinaryEvalSet::new(vec![1.0], vec![]).is_err());
}

#[test]
fn extreme_llrs_do_not_overflow() {
    let c = cllr(&set(&[-800.0, 800.0], &[H1, H2])).unwrap();
    assert!((c - 800.0 / std::f64::consts::LN_2).abs() < 1e-9);
}

#[test]
fn pav_examples() {
    let s = set(&[0.2, 0.8], &[H2, H1]);
    let l = pav_llrs(&s, &[0.2, 0.8]).unwrap();
    assert!((l[0] - (1.0f64 / 3.0).ln()).abs() < 1e-12 && (l[1] - 3f64.ln()).abs() < 1e-12);
    assert_eq!(pav_posteriors(&[0.2, 0.8], &[H2, H1]), vec![0.0, 1.0]);

    let s = set(&[0.2, 0.8], &[H1, H2]);
    assert_eq!(pav_llrs(&s, &[0.2, 0.8]).unwrap(), vec![0.0, 0.0]);
    assert_eq!(pav_pools(&[0.2, 0.8], &[H1, H2]).len(), 1);
}

#[test]
fn pav_pools_ties_together() {
    let scores = [1.0, 1.0, 2.0, 0.0];
    let labels = [H1, H2, H1, H2];
    let p = pav_posteriors(&scores, &labels);
    assert_eq!(p[0], p[1]);
    assert_eq!(p, vec![0.5, 0.5, 1.0, 0.0]);
}

#[test]
fn decomposition_of_constant_system() {
    let s = set(&[0.0; 6], &[H1, H1, H2, H2, H2, H2]);
    let r = CllrReport::of(&s).unwrap();
    assert!((r.cllr - 1.0).abs() < 1e-12);
    assert!(r.cllr_min <= 1.0 + 1e-12);
    assert!((r.cllr_cal - (1.0 - r.cllr_min)).abs() < 1e-12);
}

#[test]
fn degraded_system_decomposes_additively() {
    // a well-ordered but overconfident system
    let llrs = [-4.0, -3.0, -1.0, 2.0, 1.5, 3.0, 5.0, -2.0];
    let labels = [H2, H2, H2, H2, H1, H1, H1, H1];
    let r = CllrReport::of(&set(&llrs, &labels)).unwrap();
    assert!(r.cllr_min <= r.cllr);
    assert!((r.cllr - r.cllr_min - r.cllr_cal).abs() < 1e-15);
}

#[test]
fn cmxe_reference_points() {
    for k in 2..6 {
        let rows = vec![vec![-1.3; k]; 2 * k];
        let labels = (0..2 * k).map(|i| i % k).collect();
        let r = cmxe(&MulticlassEvalSet::new(k, rows, labels).unwrap()).unwrap();
        assert!((r.cmxe - (k as f64).log2()).abs() < 1e-12);
        assert!((r.normalized - 1.0).abs() < 1e-12);
    }
    let one_hot = vec![vec![0.0, -60.0, -60.0], vec![-60.0, 0.0, -60.0], vec![-60.0, -60.0, 0.0]];
    let r = cmxe(&MulticlassEvalSet::new(3, one_hot, vec![0, 1, 2]).unwrap()).unwrap();
    assert!(r.cmxe < 1e-20);
    assert!(cmxe(&MulticlassEvalSet::new(3, vec![vec![0.0; 3]], vec![0]).unwrap()).is_err());
}

#[test]
fn cmxe_binary_equals_cllr() {
    let llrs = [0.3, -1.2, 2.5, -0.1, 4.0, -3.3];
    let labels = [H1, H2, H1, H1, H2, H2];
    let c = cllr(&set(&llrs, &labels)).unwrap();
    let rows: Vec<Vec<f64>> = llrs.iter().map(|&l| vec![l - 0.7, -0.7]).collect();
    let y: Vec<usize> = labels.iter().map(|h| if *h == H1 { 0 } else { 1 }).collect();
    let m = cmxe(&MulticlassEvalSet::new(2, rows, y).unwrap()).unwrap();
    assert!((m.cmxe - c).abs() < 1e-12);
    assert!((m.normalized - c).abs() < 1e-12);
}

#[test]
fn tippett_counts_match_direct_counting() {
    let llrs: Vec<f64> = (0..10).map(|i| (i as f64 - 4.5) * 0.9).collect();
    let labels: Vec<Hyp> = (0..10).map(|i| if i % 3 == 0 { H2 } else { H1 }).collect();
    let s = set(&llrs, &labels);
    let c = tippett_curve(&s);
    for series in &c.series {
        let hyp = if series.name == "H1" { H1 } else { H2 };
        let own: Vec<f64> = llrs.iter().zip(&labels).filter(|p| *p.1 == hyp).map(|p| p.0 / std::f64::consts::LN_10).collect();
        for &(x, y) in &series.points {
            let direct = own.iter().filter(|&&v| v >= x).count() as f64 / own.len() as f64;
            assert_eq!(y, direct);
        }
        for w in series.points.windows(2) {
            assert!(w[1].1 <= w[0].1 && w[1].0 > w[0].0);
        }
        assert_eq!(series.points[0].1, 1.0);
        assert_eq!(series.points.last().unwrap().1, 0.0);
    }
}

#[test]
fn tippett_positive_and_mirrored() {
    let s = set(&[1.0, 2.0, -1.0, -2.0], &[H1, H1, H2, H2]);
    let c = tippett_curve(&s);
    let h1 = c.series("H1").unwrap();
    let at_zero = h1.points.iter().filter(|p| p.0 <= 0.0).last().unwrap();
    assert_eq!(at_zero.1, 1.0);
    let h2 = c.series("H2").unwrap();
    // mirror: P(H1 >= x) = P(H2 <= -x)
    for &(x, y) in &h1.points {
        let below = s.llrs[2..].iter().filter(|&&v| v / std::f64::consts::LN_10 <= -x).count() as f64 / 2.0;
        assert!((y - below).abs() < 1e-12, "x={x}");
    }
    assert_eq!(h2.points.len(), h1.points.len());
}

#[test]
fn ece_reference_and_identity() {
    let s = set(&[0.0, 0.0], &[H1, H2]);
    assert!((ece_value(&s, 0.0).unwrap() - 1.0).abs() < 1e-12);
    let s = set(&[0.4, -2.0, 1.7, 3.0, -0.3], &[H1, H2, H2, H1, H1]);
    assert!((ece_value(&s, 0.0).unwrap() - cllr(&s).unwrap()).abs() < 1e-12);
    let perfect = set(&[700.0, -700.0], &[H1, H2]);
    for x in default_ece_grid() {
        assert!(ece_value(&perfect, x * std::f64::consts::LN_10).unwrap() < 1e-12);
    }
    let curve = ece_curve(&s, &default_ece_grid()).unwrap();
    assert_eq!(curve.series.len(), 3);
    assert_eq!(curve.series("reference").unwrap().points.len(), 61);
}

fn gaussian_llrs(n: usize, seed: u64) -> BinaryEvalSet {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (Normal::new(1.0, 1.0).unwrap(), Normal::new(-1.0, 1.0).unwrap());
    let mut llrs = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..n {
        // true llr of N(1,1) vs N(-1,1) is 2x
        llrs.push(2.0 * a.sample(&mut rng));
        labels.push(H1);
        llrs.push(2.0 * b.sample(&mut rng));
        labels.push(H2);
    }
    set(&llrs, &labels)
}

#[test]
fn calibrated_llrs_have_small_calibration_loss() {
    let s = gaussian_llrs(5000, 1);
    let r = CllrReport::of(&s).unwrap();
    assert!(r.cllr_cal.abs() < 0.02, "{r:?}");
    let curve = ece_curve(&s, &default_ece_grid()).unwrap();
    let e = &curve.series("ece").unwrap().points;
    let reference = &curve.series("reference").unwrap().points;
    for (a, b) in e.iter().zip(reference) {
        assert!(a.1 <= b.1);
    }
}

#[test]
fn miscalibration_never_helps() {
    let s = gaussian_llrs(5000, 2);
    let base = cllr(&s).unwrap();
    for f in [|x: f64| 2.0 * x, |x: f64| 0.5 * x, |x: f64| x + 1.0, |x: f64| x.powi(3) / 4.0] {
        let t = set(&s.llrs.iter().map(|&x| f(x)).collect::<Vec<_>>(), &s.labels);
        assert!(cllr(&t).unwrap() >= base - 0.01);
    }
}

#[test]
fn accuracy_examples() {
    assert_eq!(accuracy(&[0, 1, 2], &[0, 1, 2]).unwrap(), 1.0);
    assert_eq!(accuracy(&[1, 2, 0], &[0, 1, 2]).unwrap(), 0.0);
    let mut p = vec![0; 20];
    p[..3].iter_mut().for_each(|x| *x = 1);
    assert_eq!(accuracy(&p, &[0; 20]).unwrap(), 0.85);
    assert!(accuracy(&[], &[]).is_err());
}

fn arb_set() -> impl Strategy<Value = (Vec<f64>, Vec<Hyp>)> {
    prop::collection::vec((-6i32..6, any::<bool>()), 2..40).prop_map(|v| {
        let llrs = v.iter().map(|(x, _)| *x as f64 * 0.5).collect();
        let labels = v.iter().map(|(_, b)| if *b { H1 } else { H2 }).collect();
        (llrs, labels)
    })
}

proptest! {
    #[test]
    fn cllr_min_never_exceeds_cllr((llrs, labels) in arb_set()) {
        prop_assume!(labels.contains(&H1) && labels.contains(&H2));
        let s = set(&llrs, &labels);
        let r = CllrReport::of(&s).unwrap();
        prop_assert!(r.cllr >= 0.0);
        prop_assert!(r.cllr_min <= r.cllr + 1e-12);
        prop_assert!(r.cllr_cal >= -1e-12);
    }

    #[test]
    fn pav_output_is_monotone((llrs, labels) in arb_set(), scale in 0.1f64..3.0) {
        prop_assume!(labels.contains(&H1) && labels.contains(&H2));
        let s = set(&llrs, &labels);
        let scores: Vec<f64> = llrs.iter().map(|x| x * scale).collect();
        let out = pav_llrs(&s, &scores).unwrap();
        let mut idx: Vec<usize> = (0..scores.len()).collect();
        idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
        for w in idx.windows(2) {
            prop_assert!(out[w[0]] <= out[w[1]]);
        }
    }

    #[test]
    fn ece_at_even_odds_is_cllr((llrs, labels) in arb_set()) {
        prop_assume!(labels.contains(&H1) && labels.contains(&H2));
        let s = set(&llrs, &labels);
        prop_assert!((ece_value(&s, 0.0).unwrap() - cllr(&s).unwrap()).abs() < 1e-12);
    }
}
