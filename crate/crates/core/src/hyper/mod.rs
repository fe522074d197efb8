//! Hyperbolic-type metrics built from the boundary distance.
//!
//! For interior points with boundary distances `dx = d(x)`, `dy = d(y)`:
//!
//! * `h(x,y)  = 2 log((d(x,y) + max(dx,dy)) / sqrt(dx dy))`
//! * `j~(x,y) = 1/2 log((1 + d(x,y)/dx)(1 + d(x,y)/dy))`
//! * `j(x,y)  = log(1 + d(x,y) / min(dx,dy))`
//!
//! The quasihyperbolic metric is approximated by shortest paths in a graph,
//! see [`QhGraph`].

mod graph;
mod uniform;

pub use graph::{epsilon_short_check, QhGraph, ShortReport};
pub(crate) use graph::path_from_pred;
pub use uniform::{uniformity_estimate, UniformityReport, UniformityWitness};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{MetricKind, MetricMatrix};
use crate::space::SampledSpace;

#[inline]
pub fn h_value(dxy: f64, dx: f64, dy: f64) -> f64 {
    // 2 log((d + M) / sqrt(M m)) rewritten so that the diagonal is exactly zero.
    let (big, small) = if dx >= dy { (dx, dy) } else { (dy, dx) };
    2.0 * (dxy / big).ln_1p() + (big / small).ln()
}

#[inline]
pub fn jtilde_value(dxy: f64, dx: f64, dy: f64) -> f64 {
    0.5 * ((dxy / dx).ln_1p() + (dxy / dy).ln_1p())
}

#[inline]
pub fn j_value(dxy: f64, dx: f64, dy: f64) -> f64 {
    (dxy / dx.min(dy)).ln_1p()
}

/// The closed-form hyperbolic-type metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointMetric {
    H,
    Jtilde,
    J,
}

impl PointMetric {
    pub fn kind(self) -> MetricKind {
        match self {
            PointMetric::H => MetricKind::H,
            PointMetric::Jtilde => MetricKind::Jtilde,
            PointMetric::J => MetricKind::J,
        }
    }

    #[inline]
    pub fn value(self, dxy: f64, dx: f64, dy: f64) -> f64 {
        match self {
            PointMetric::H => h_value(dxy, dx, dy),
            PointMetric::Jtilde => jtilde_value(dxy, dx, dy),
            PointMetric::J => j_value(dxy, dx, dy),
        }
    }
}

/// Matrix of `metric` over the interior points with the given global indices.
pub fn point_metric_on(space: &SampledSpace, metric: PointMetric, idx: &[usize]) -> Result<MetricMatrix> {
    let bd = space.bdist();
    if let Some(&g) = idx.iter().find(|&&g| g >= space.n_interior()) {
        return Err(Error::Parameter(format!(
            "{} is a boundary label; hyperbolic-type metrics live on interior points",
            space.label(g)
        )));
    }
    let labels = idx.iter().map(|&g| space.label(g).to_string()).collect();
    MetricMatrix::from_fn(labels, metric.kind(), |a, b| {
        let (x, y) = (idx[a], idx[b]);
        metric.value(space.dist(x, y), bd[x], bd[y])
    })
}

fn all_interior(space: &SampledSpace) -> Vec<usize> {
    (0..space.n_interior()).collect()
}

/// `h` on all interior points.
pub fn h_metric(space: &SampledSpace) -> MetricMatrix {
    point_metric_on(space, PointMetric::H, &all_interior(space)).expect("interior indices")
}

/// `j~` on all interior points.
pub fn jtilde_metric(space: &SampledSpace) -> MetricMatrix {
    point_metric_on(space, PointMetric::Jtilde, &all_interior(space)).expect("interior indices")
}

/// `j` on all interior points.
pub fn j_metric(space: &SampledSpace) -> MetricMatrix {
    point_metric_on(space, PointMetric::J, &all_interior(space)).expect("interior indices")
}

/// Worst violation of `2 j~ <= h <= 2 j~ + 2 log 2` over all interior pairs.
///
/// Returns `(lower, upper)` where `lower = max(2 j~ - h)` and
/// `upper = max(h - 2 j~ - 2 log 2)`; both are non-positive when the
/// sandwich holds.
pub fn sandwich_defect(space: &SampledSpace) -> (f64, f64) {
    use rayon::prelude::*;
    let n = space.n_interior();
    let bd = space.bdist();
    let two_log2 = 2.0 * std::f64::consts::LN_2;
    (0..n)
        .into_par_iter()
        .map(|x| {
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for y in (x + 1)..n {
                let d = space.dist(x, y);
                let h = h_value(d, bd[x], bd[y]);
                let jt = jtilde_value(d, bd[x], bd[y]);
                lo = lo.max(2.0 * jt - h);
                hi = hi.max(h - 2.0 * jt - two_log2);
            }
            (lo, hi)
        })
        .reduce(
            || (f64::NEG_INFINITY, f64::NEG_INFINITY),
            |a, b| (a.0.max(b.0), a.1.max(b.1)),
        )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_plane_vertical_pair() {
        // x = (0,1), y = (0,2): d = 1, d(x) = 1, d(y) = 2.
        let h = h_value(1.0, 1.0, 2.0);
        assert!((h - 2.0 * (3.0 / 2f64.sqrt()).ln()).abs() < 1e-15);
        let jt = jtilde_value(1.0, 1.0, 2.0);
        assert!((jt - 0.5 * (2.0f64 * 1.5).ln()).abs() < 1e-15);
        assert!((j_value(1.0, 1.0, 2.0) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn zero_on_diagonal() {
        assert_eq!(h_value(0.0, 0.7, 0.7), 0.0);
        assert_eq!(jtilde_value(0.0, 0.7, 0.7), 0.0);
        assert_eq!(j_value(0.0, 0.7, 0.7), 0.0);
    }
}
