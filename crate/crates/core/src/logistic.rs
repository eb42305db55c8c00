//! Four-parameter logistic fits `r(x) = a / (1 + exp(-b (x - c))) + d`.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub r_squared: f64,
    /// Sum of squared residuals after each accepted refinement step, starting
    /// with the grid optimum.
    pub sse_history: Vec<f64>,
}

fn sigmoid(b: f64, c: f64, x: f64) -> f64 {
    1.0 / (1.0 + (-b * (x - c)).exp())
}

fn sse(p: &[f64; 4], pts: &[(f64, f64)]) -> f64 {
    pts.iter().map(|&(x, y)| (p[0] * sigmoid(p[1], p[2], x) + p[3] - y).powi(2)).sum()
}

/// Best (a, d) for fixed (b, c) by linear least squares.
fn linear_part(b: f64, c: f64, pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let (mut s, mut ss, mut y, mut sy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, v) in pts {
        let g = sigmoid(b, c, x);
        s += g;
        ss += g * g;
        y += v;
        sy += g * v;
    }
    let n = pts.len() as f64;
    let det = ss * n - s * s;
    if det.abs() < 1e-12 * n * n {
        return None;
    }
    let a = (sy * n - s * y) / det;
    Some((a, (y - a * s) / n))
}

impl LogisticFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.a * sigmoid(self.b, self.c, x) + self.d
    }

    /// True when the fitted curve falls with growing `x`.
    pub fn is_decreasing(&self) -> bool {
        self.a * self.b < 0.0
    }
}

/// Least-squares logistic fit: coarse (b, c) grid with the linear
/// parameters solved exactly, then Levenberg-Marquardt on all four.
/// Reported with `a >= 0`; the mirrored parameter set describes the same curve.
pub fn fit_logistic(points: &[(f64, f64)]) -> Result<LogisticFit> {
    if points.len() < 5 {
        return Err(Error::Argument(format!("logistic fit needs at least 5 points, got {}", points.len())));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Domain("non-finite point in logistic fit".into()));
    }
    let xmin = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let xmax = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let span = xmax - xmin;
    if span == 0.0 {
        return Err(Error::Domain("logistic fit needs at least two distinct x values".into()));
    }

    let mut best: Option<([f64; 4], f64)> = None;
    for i in 0..40 {
        let mag = 0.1 / span * 500f64.powf(i as f64 / 39.0);
        for b in [mag, -mag] {
            for k in 0..=40 {
                let c = xmin - 0.5 * span + 2.0 * span * k as f64 / 40.0;
                if let Some((a, d)) = linear_part(b, c, points) {
                    let p = [a, b, c, d];
                    let e = sse(&p, points);
                    if best.as_ref().is_none_or(|(_, be)| e < *be) {
                        best = Some((p, e));
                    }
                }
            }
        }
    }
    let (mut p, mut e) = best.ok_or_else(|| Error::Domain("no admissible logistic start".into()))?;

    let mut history = vec![e];
    let mut lambda = 1e-3;
    for _ in 0..2000 {
        if e == 0.0 || lambda > 1e16 {
            break;
        }
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for &(x, y) in points {
            let s = sigmoid(p[1], p[2], x);
            let ds = s * (1.0 - s);
            let j = Vector4::new(s, p[0] * ds * (x - p[2]), -p[0] * p[1] * ds, 1.0);
            let r = p[0] * s + p[3] - y;
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let mut damped = jtj;
        for i in 0..4 {
            damped[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
        }
        let Some(step) = damped.lu().solve(&(-jtr)) else {
            lambda *= 10.0;
            continue;
        };
        let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2], p[3] + step[3]];
        let te = sse(&trial, points);
        if te.is_finite() && te < e {
            let gain = e - te;
            p = trial;
            e = te;
            history.push(e);
            lambda = (lambda / 10.0).max(1e-12);
            if gain <= 1e-15 * e.max(1e-300) {
                break;
            }
        } else {
            lambda *= 10.0;
        }
    }

    if p[0] < 0.0 {
        p = [-p[0], -p[1], p[2], p[3] + p[0]];
    }
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let sst: f64 = points.iter().map(|&(_, y)| (y - mean_y).powi(2)).sum();
    let r_squared = if sst > 0.0 { (1.0 - e / sst).clamp(0.0, 1.0) } else if e < 1e-20 { 1.0 } else { 0.0 };
    Ok(LogisticFit { a: p[0], b: p[1], c: p[2], d: p[3], r_squared, sse_history: history })
}
