//! Logistic calibration `c(s) = 1 / (1 + exp(-w (s - m)))`.

use serde::{Deserialize, Serialize};

use super::check_inputs;
use crate::error::{Error, Result};
use crate::metrics::Hyp;

/// Upper limit on the fitted slope, reached under perfect separation.
pub const MAX_SLOPE: f64 = 50.0;
/// Lower limit on the fitted slope; anti-correlated scores end here.
pub const MIN_SLOPE: f64 = 1e-6;
const PENALTY: f64 = 1e-6;
const TOLERANCE: f64 = 1e-8;
const MAX_ITER: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticCalibrator {
    pub w: f64,
    pub m: f64,
}

impl LogisticCalibrator {
    /// Natural-log posterior odds `w (s - m)`.
    pub fn log_odds(&self, s: f64) -> f64 {
        self.w * (s - self.m)
    }

    pub fn posterior(&self, s: f64) -> f64 {
        1.0 / (1.0 + (-self.log_odds(s)).exp())
    }
}

/// Penalized weighted log-likelihood of intercept `a` and slope `b`, with
/// gradient and Hessian.
struct Problem<'a> {
    s: &'a [f64],
    y: Vec<f64>,
    w: Vec<f64>,
}

impl Problem<'_> {
    fn value(&self, a: f64, b: f64) -> f64 {
        let mut ll = 0.0;
        for i in 0..self.s.len() {
            let z = a + b * self.s[i];
            // y log p + (1-y) log(1-p) = y z - softplus(z)
            ll += self.w[i] * (self.y[i] * z - softplus(z));
        }
        ll - PENALTY * b * b
    }

    fn derivatives(&self, a: f64, b: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let mut g = [0.0, -2.0 * PENALTY * b];
        let mut h = [[0.0, 0.0], [0.0, -2.0 * PENALTY]];
        for i in 0..self.s.len() {
            let s = self.s[i];
            let p = sigmoid(a + b * s);
            let r = self.w[i] * (self.y[i] - p);
            let q = self.w[i] * p * (1.0 - p);
            g[0] += r;
            g[1] += r * s;
            h[0][0] -= q;
            h[0][1] -= q * s;
            h[1][1] -= q * s * s;
        }
        h[1][0] = h[0][1];
        (g, h)
    }

    /// Damped Newton ascent over both parameters.
    fn solve_free(&self, mut a: f64, mut b: f64) -> (f64, f64) {
        let mut f = self.value(a, b);
        for _ in 0..MAX_ITER {
            let (g, h) = self.derivatives(a, b);
            if g[0].hypot(g[1]) < TOLERANCE {
                break;
            }
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            let (mut da, mut db) = if det.abs() > 1e-300 {
                ((-h[1][1] * g[0] + h[0][1] * g[1]) / det, (h[1][0] * g[0] - h[0][0] * g[1]) / det)
            } else {
                (g[0], g[1])
            };
            let mut improved = false;
            for _ in 0..60 {
                let fa = self.value(a + da, b + db);
                if fa >= f {
                    a += da;
                    b += db;
                    improved = fa > f;
                    f = fa;
                    break;
                }
                da *= 0.5;
                db *= 0.5;
            }
            if !improved || b > 1e3 * MAX_SLOPE {
                break;
            }
        }
        (a, b)
    }

    /// Newton ascent over the intercept with the slope held fixed.
    fn solve_intercept(&self, mut a: f64, b: f64) -> f64 {
        let mut f = self.value(a, b);
        for _ in 0..MAX_ITER {
            let (g, h) = self.derivatives(a, b);
            if g[0].abs() < TOLERANCE {
                break;
            }
            let mut da = if h[0][0] < 0.0 { -g[0] / h[0][0] } else { g[0] };
            let mut moved = false;
            for _ in 0..60 {
                let fa = self.value(a + da, b);
                if fa >= f {
                    a += da;
                    moved = fa > f;
                    f = fa;
                    break;
                }
                da *= 0.5;
            }
            if !moved {
                break;
            }
        }
        a
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Maximum-likelihood logistic calibration with the slope restricted to
/// `[MIN_SLOPE, MAX_SLOPE]`. `weights` default to 1.
pub fn fit_logistic(scores: &[f64], labels: &[Hyp], weights: Option<&[f64]>) -> Result<LogisticCalibrator> {
    check_inputs(scores, labels)?;
    let w: Vec<f64> = match weights {
        Some(w) => {
            if w.len() != scores.len() || w.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                return Err(Error::InvalidInput("calibration weights must be positive, one per score".into()));
            }
            w.to_vec()
        }
        None => vec![1.0; scores.len()],
    };
    let problem = Problem {
        s: scores,
        y: labels.iter().map(|h| if *h == Hyp::H1 { 1.0 } else { 0.0 }).collect(),
        w,
    };
    let w1: f64 = problem.w.iter().zip(&problem.y).map(|(w, y)| w * y).sum();
    let w2: f64 = problem.w.iter().sum::<f64>() - w1;
    let a0 = (w1 / w2).ln();
    let (mut a, mut b) = problem.solve_free(a0, 0.0);
    if !(MIN_SLOPE..=MAX_SLOPE).contains(&b) || !a.is_finite() {
        // concave objective: the constrained optimum lies on the violated edge
        b = if b > MAX_SLOPE { MAX_SLOPE } else { MIN_SLOPE };
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        a = problem.solve_intercept(a0 - b * mean, b);
    }
    Ok(LogisticCalibrator { w: b, m: -a / b })
}
