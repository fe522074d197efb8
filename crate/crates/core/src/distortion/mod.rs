//! Empirical distortion functions between two metrics on the same labels.
//!
//! A quasisymmetric comparison samples triples `(x, y, z)` and records
//! `t = Ma(x,y)/Ma(x,z)` against `Mb(x,y)/Mb(x,z)`; a quasimöbius comparison
//! samples quadruples and records cross ratios. An upper envelope
//! `ratio <= C t^alpha` is then fitted in log-log space.

mod theorems;

pub use theorems::{
    corollary1_report, corollary2_check, corollary2_on, theorem1_report, theorem2_report, Corollary1Params, Corollary1Report,
    Corollary2Params, Corollary2Report, GraphBoundary, GraphBoundaryParams, Theorem1Params, Theorem1Report,
    Theorem2Params, Theorem2Report,
};
pub(crate) use theorems::{hamenstadt_epsilon, tail_delta};

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{cross_ratio_raw, MetricMatrix};
use crate::numeric::{check_loss, golden_min, quantile, std_dev};
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistortionKind {
    Quasisymmetric,
    Quasimobius,
}

/// Upper envelope `ln ratio <= ln C + alpha ln t` at the
/// [`tolerance::ENVELOPE_QUANTILE`] quantile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub c: f64,
    pub alpha: f64,
    /// Root mean square of `ln ratio - ln C - alpha ln t`.
    pub residual_rms: f64,
    /// `residual_rms` over the standard deviation of `ln ratio`.
    pub relative_residual: f64,
    pub n: usize,
}

impl EnvelopeFit {
    /// Whether the samples follow a power law closely enough to trust `alpha`.
    pub fn is_good(&self) -> bool {
        self.relative_residual <= tolerance::FIT_QUALITY && self.c.is_finite() && self.alpha.is_finite()
    }
}

/// Fits the upper envelope by quantile regression in log-log space.
///
/// For a fixed slope the best intercept is the quantile of `y - alpha x`;
/// the remaining loss is convex in `alpha` and minimised by golden-section
/// search. Exactly collinear data is returned from least squares unchanged,
/// so identical metrics give `alpha = 1`, `C = 1` and zero residual.
pub fn fit_envelope(samples: &[(f64, f64)]) -> Result<EnvelopeFit> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(t, r)| *t > 0.0 && *r > 0.0 && t.is_finite() && r.is_finite())
        .map(|&(t, r)| (t.ln(), r.ln()))
        .collect();
    let n = pts.len();
    if n < 2 {
        return Err(Error::Degenerate("fewer than two usable samples".into()));
    }
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - xm) * (p.0 - xm)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all samples share the same ratio t".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    let a0 = sxy / sxx;
    let b0 = ym - a0 * xm;
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let spread = std_dev(&ys);
    let finish = |alpha: f64, beta: f64| {
        let rms = (pts.iter().map(|p| (p.1 - beta - alpha * p.0).powi(2)).sum::<f64>() / n as f64).sqrt();
        EnvelopeFit {
            c: beta.exp(),
            alpha,
            residual_rms: rms,
            relative_residual: if spread > 0.0 {
                rms / spread
            } else if rms == 0.0 {
                0.0
            } else {
                f64::INFINITY
            },
            n,
        }
    };
    if pts.iter().all(|p| p.1 - b0 - a0 * p.0 == 0.0) {
        return Ok(finish(a0, b0));
    }
    let tau = tolerance::ENVELOPE_QUANTILE;
    let mut buf = vec![0.0; n];
    let intercept = |alpha: f64, buf: &mut Vec<f64>| -> (f64, f64) {
        for (b, p) in buf.iter_mut().zip(&pts) {
            *b = p.1 - alpha * p.0;
        }
        let beta = quantile(buf, tau);
        let loss = pts.iter().map(|p| check_loss(p.1 - alpha * p.0 - beta, tau)).sum();
        (beta, loss)
    };
    let cell = std::cell::RefCell::new(&mut buf);
    let loss = |alpha: f64| intercept(alpha, &mut cell.borrow_mut()).1;
    let mut step = 1.0 + a0.abs();
    let mut lo = a0 - step;
    while loss(lo - step) < loss(lo) {
        lo -= step;
        step *= 2.0;
    }
    let mut step = 1.0 + a0.abs();
    let mut hi = a0 + step;
    while loss(hi + step) < loss(hi) {
        hi += step;
        step *= 2.0;
    }
    let alpha = golden_min(loss, lo, hi, 1e-12);
    let (beta, _) = intercept(alpha, &mut cell.borrow_mut());
    Ok(finish(alpha, beta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub kind: DistortionKind,
    /// `(t, ratio)` pairs.
    pub samples: Vec<(f64, f64)>,
    pub fit: EnvelopeFit,
    pub skipped: usize,
    pub exhaustive: bool,
    pub seed: u64,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl DistortionReport {
    /// Envelope refitted on the samples whose `t` satisfies `keep`.
    pub fn branch(&self, keep: impl Fn(f64) -> bool) -> Result<EnvelopeFit> {
        let sub: Vec<(f64, f64)> = self.samples.iter().copied().filter(|s| keep(s.0)).collect();
        fit_envelope(&sub)
    }

    pub fn with_meta(mut self, key: &str, value: impl Serialize) -> Self {
        self.metadata
            .insert(key.to_string(), serde_json::to_value(value).expect("serialisable"));
        self
    }
}

/// Reorders `mb` to the labels of `ma`.
fn align(ma: &MetricMatrix, mb: &MetricMatrix) -> Result<MetricMatrix> {
    if ma.n() != mb.n() || !ma.labels().iter().all(|l| mb.contains(l)) {
        return Err(Error::LabelMismatch("the two metrics must share their labels".into()));
    }
    mb.restrict(ma.labels())
}

fn distinct_tuples<const K: usize>(n: usize, budget: usize, seed: u64) -> (Vec<[usize; K]>, bool) {
    let total: f64 = (0..K).map(|i| (n as f64 - i as f64).max(0.0)).product();
    if (budget as f64) >= total {
        let mut out = Vec::new();
        let mut cur = [0usize; K];
        fn rec<const K: usize>(n: usize, depth: usize, cur: &mut [usize; K], out: &mut Vec<[usize; K]>) {
            if depth == K {
                out.push(*cur);
                return;
            }
            for v in 0..n {
                if cur[..depth].contains(&v) {
                    continue;
                }
                cur[depth] = v;
                rec(n, depth + 1, cur, out);
            }
        }
        rec(n, 0, &mut cur, &mut out);
        return (out, true);
    }
    let mut rng = crate::rng(seed);
    let out = (0..budget)
        .map(|_| loop {
            let mut t = [0usize; K];
            for v in t.iter_mut() {
                *v = rng.random_range(0..n);
            }
            if (0..K).all(|i| (0..i).all(|j| t[i] != t[j])) {
                break t;
            }
        })
        .collect();
    (out, false)
}

/// Quasisymmetric distortion samples `t = Ma(x,y)/Ma(x,z)` against
/// `Mb(x,y)/Mb(x,z)`, with an envelope fit.
///
/// A budget at least the number of ordered triples enumerates all of them.
pub fn qs_distortion(ma: &MetricMatrix, mb: &MetricMatrix, budget: usize, seed: u64) -> Result<DistortionReport> {
    if budget == 0 {
        return Err(Error::EmptyBudget);
    }
    let mb = align(ma, mb)?;
    if ma.n() < 3 {
        return Err(Error::Degenerate("need at least three labels".into()));
    }
    let (triples, exhaustive) = distinct_tuples::<3>(ma.n(), budget, seed);
    let mut samples = Vec::with_capacity(triples.len());
    let mut skipped = 0;
    for [x, y, z] in triples {
        let (a1, a2, b1, b2) = (ma.get(x, y), ma.get(x, z), mb.get(x, y), mb.get(x, z));
        if a1 > 0.0 && a2 > 0.0 && b1 > 0.0 && b2 > 0.0 {
            samples.push((a1 / a2, b1 / b2));
        } else {
            skipped += 1;
        }
    }
    let fit = fit_envelope(&samples)?;
    Ok(DistortionReport {
        kind: DistortionKind::Quasisymmetric,
        samples,
        fit,
        skipped,
        exhaustive,
        seed,
        metadata: BTreeMap::new(),
    })
}

/// Quasimöbius distortion samples of cross ratios `|x,y,z,w|` in `Ma`
/// against those in `Mb`.
///
/// `infinity` names a label of `Ma` that is read as the point at infinity
/// there: its two factors are dropped from every cross ratio in `Ma`.
pub fn qm_distortion(
    ma: &MetricMatrix,
    mb: &MetricMatrix,
    budget: usize,
    seed: u64,
    infinity: Option<&str>,
) -> Result<DistortionReport> {
    if budget == 0 {
        return Err(Error::EmptyBudget);
    }
    let mb = align(ma, mb)?;
    if ma.n() < 4 {
        return Err(Error::Degenerate("need at least four labels".into()));
    }
    let inf = infinity.map(|l| ma.index_of(l)).transpose()?;
    let (quads, exhaustive) = distinct_tuples::<4>(ma.n(), budget, seed);
    let mut samples = Vec::with_capacity(quads.len());
    let mut skipped = 0;
    for q in quads {
        let qa = q.map(|i| (Some(i) != inf).then_some(i));
        let ta = cross_ratio_raw(ma, qa);
        let tb = cross_ratio_raw(&mb, q.map(Some));
        if ta.is_finite() && tb.is_finite() && ta > 0.0 && tb > 0.0 {
            samples.push((ta, tb));
        } else {
            skipped += 1;
        }
    }
    let fit = fit_envelope(&samples)?;
    Ok(DistortionReport {
        kind: DistortionKind::Quasimobius,
        samples,
        fit,
        skipped,
        exhaustive,
        seed,
        metadata: BTreeMap::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricKind;

    fn line(pts: &[f64]) -> MetricMatrix {
        let labels = (0..pts.len()).map(|i| format!("p{i}")).collect();
        MetricMatrix::from_fn(labels, MetricKind::D, |i, j| (pts[i] - pts[j]).abs()).unwrap()
    }

    #[test]
    fn identical_metrics_fit_exactly() {
        let m = line(&[0.0, 0.3, 1.1, 2.0, 3.7, 5.2]);
        let r = qs_distortion(&m, &m, 10_000, 1).unwrap();
        assert!(r.exhaustive);
        assert_eq!(r.fit.alpha, 1.0);
        assert_eq!(r.fit.c, 1.0);
        assert_eq!(r.fit.residual_rms, 0.0);
    }

    #[test]
    fn snowflake_exponent() {
        let m = line(&[0.0, 0.3, 1.1, 2.0, 3.7, 5.2, 9.0]);
        let s = m.map(|v| v.powf(0.5));
        let r = qs_distortion(&m, &s, 100_000, 1).unwrap();
        assert!((r.fit.alpha - 0.5).abs() < 1e-9, "{}", r.fit.alpha);
        assert!(r.fit.residual_rms < 1e-9);
    }

    #[test]
    fn noisy_envelope_sits_above_most_points() {
        let mut rng = crate::rng(5);
        let samples: Vec<(f64, f64)> = (0..2000)
            .map(|_| {
                let x: f64 = rng.random_range(-3.0..3.0);
                let y = 2.0 * x - rng.random_range(0.0..1.0);
                (x.exp(), y.exp())
            })
            .collect();
        let f = fit_envelope(&samples).unwrap();
        assert!((f.alpha - 2.0).abs() < 0.05, "{}", f.alpha);
        let above = samples.iter().filter(|(t, r)| r.ln() > f.c.ln() + f.alpha * t.ln() + 1e-12).count();
        assert!(above <= 25);
    }
}
