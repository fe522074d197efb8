use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{boundary_gromov_product, is_gromov_sequence, AnchorSequence, Base, Endpoint};
use crate::error::{Error, Result};
use crate::metric::MetricMatrix;

/// Busemann function `b(x) = (xi|w)_x - (xi|x)_w` of a boundary point `xi`,
/// normalised by `b(w) = 0`.
///
/// Along an anchor sequence `u_n -> xi` the finite-stage value is
/// `d(u_n, x) - d(u_n, w)`; the last term is kept and the difference to the
/// previous one is the stabilisation gap. The anchors of the sequence itself
/// are excluded from the gap, as they never stabilise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusemannFunction {
    pub w: String,
    pub target: String,
    pub labels: Vec<String>,
    pub values: Vec<f64>,
    /// Largest gap between the last two finite-stage values.
    pub max_gap: f64,
}

impl BusemannFunction {
    pub fn value(&self, label: &str) -> Result<f64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.values[i])
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    fn check_aligned(&self, m: &MetricMatrix) -> Result<()> {
        if m.labels() != self.labels.as_slice() {
            return Err(Error::LabelMismatch(
                "Busemann function was computed on a different matrix".into(),
            ));
        }
        Ok(())
    }

    /// `(x|y)_b = (b(x) + b(y) - d(x,y)) / 2` on matrix indices.
    pub fn product_indices(&self, m: &MetricMatrix, x: usize, y: usize) -> Result<f64> {
        self.check_aligned(m)?;
        Ok(0.5 * (self.values[x] + self.values[y] - m.get(x, y)))
    }

    pub fn product(&self, m: &MetricMatrix, x: &str, y: &str) -> Result<f64> {
        self.product_indices(m, m.index_of(x)?, m.index_of(y)?)
    }
}

/// Busemann function of the boundary point represented by `xi`, based at `w`.
pub fn busemann(m: &MetricMatrix, xi: &AnchorSequence, w: &str, tolerance: f64) -> Result<BusemannFunction> {
    let wi = m.index_of(w)?;
    if xi.points.len() < 2 {
        return Err(Error::Parameter("anchor sequence needs at least two points".into()));
    }
    if !is_gromov_sequence(m, xi, w)? {
        return Err(Error::Precondition(format!(
            "the anchors of {} do not form a Gromov sequence",
            xi.target
        )));
    }
    let us: Vec<usize> = xi.points.iter().map(|l| m.index_of(l)).collect::<Result<_>>()?;
    let (u_last, u_prev) = (us[us.len() - 1], us[us.len() - 2]);
    let mut values = Vec::with_capacity(m.n());
    let mut max_gap = 0.0f64;
    let mut worst = 0usize;
    for x in 0..m.n() {
        let v = m.get(u_last, x) - m.get(u_last, wi);
        let prev = m.get(u_prev, x) - m.get(u_prev, wi);
        let gap = (v - prev).abs();
        if gap > max_gap && !us.contains(&x) {
            max_gap = gap;
            worst = x;
        }
        values.push(v);
    }
    values[wi] = 0.0;
    if max_gap > tolerance {
        return Err(Error::NonConvergence {
            label: m.labels()[worst].clone(),
            gap: max_gap,
            tolerance,
        });
    }
    Ok(BusemannFunction {
        w: w.to_string(),
        target: xi.target.clone(),
        labels: m.labels().to_vec(),
        values,
        max_gap,
    })
}

/// Largest `|(x|y)_b - [(x|y)_w - (xi|x)_w - (xi|y)_w]|` over random pairs of
/// the given labels.
pub fn busemann_identity_defect(
    m: &MetricMatrix,
    b: &BusemannFunction,
    xi: &AnchorSequence,
    labels: &[String],
    pairs: usize,
    tail: usize,
    seed: u64,
) -> Result<f64> {
    if labels.len() < 2 {
        return Err(Error::Degenerate("need at least two labels".into()));
    }
    let w = b.w.as_str();
    let wi = m.index_of(w)?;
    let mut rng = crate::rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let x = &labels[rng.random_range(0..labels.len())];
        let y = &labels[rng.random_range(0..labels.len())];
        let (xi_x, yi_y) = (m.index_of(x)?, m.index_of(y)?);
        let lhs = b.product_indices(m, xi_x, yi_y)?;
        let px = boundary_gromov_product(m, Endpoint::Sequence(xi), Endpoint::Point(x), Base::Point(w), tail)?;
        let py = boundary_gromov_product(m, Endpoint::Sequence(xi), Endpoint::Point(y), Base::Point(w), tail)?;
        let rhs = crate::gromov::product(m, xi_x, yi_y, wi) - px.mid() - py.mid();
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Largest `min{(x|z)_b, (z|y)_b} - (x|y)_b` over all triples of the matrix.
pub fn busemann_triple_defect(m: &MetricMatrix, b: &BusemannFunction) -> Result<f64> {
    let n = m.n();
    let mut p = vec![0.0; n * n];
    for x in 0..n {
        for y in 0..n {
            p[x * n + y] = b.product_indices(m, x, y)?;
        }
    }
    let mut worst = f64::NEG_INFINITY;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                worst = worst.max(p[x * n + z].min(p[z * n + y]) - p[x * n + y]);
            }
        }
    }
    Ok(worst)
}
