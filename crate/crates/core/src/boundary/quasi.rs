use serde::{Deserialize, Serialize};

use super::{boundary_gromov_product, AnchorSequence, Base, BusemannFunction, Endpoint};
use crate::error::{Error, Result};
use crate::metric::{MetricKind, MetricMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "base", rename_all = "snake_case")]
pub enum BoundaryBase {
    /// `rho = exp(-eps (xi|zeta)_w)` based at an interior point.
    Visual { w: String },
    /// `rho = exp(-eps (xi|zeta)_b)` for a Busemann function of `target`.
    Hamenstadt { w: String, target: String },
}

/// A quasimetric on boundary points and its chain metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMetric {
    pub base: BoundaryBase,
    pub epsilon: f64,
    pub delta: f64,
    pub tail: usize,
    pub rho: MetricMatrix,
    pub dmat: MetricMatrix,
    /// Widest tail interval among the products used.
    pub max_width: f64,
}

/// `rho(i, j) = exp(-eps * p)` with `p` the midpoint of the tail interval of
/// the boundary product; the diagonal is zero.
pub fn quasimetric_rho(
    m: &MetricMatrix,
    seqs: &[&AnchorSequence],
    base: Base<'_>,
    epsilon: f64,
    tail: usize,
) -> Result<(MetricMatrix, f64)> {
    let n = seqs.len();
    let mut values = vec![0.0; n * n];
    let mut max_width = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let p = boundary_gromov_product(m, Endpoint::Sequence(seqs[i]), Endpoint::Sequence(seqs[j]), base, tail)?;
            if p.diverging {
                return Err(Error::Degenerate(format!(
                    "{} and {} represent the same boundary point",
                    seqs[i].target, seqs[j].target
                )));
            }
            max_width = max_width.max(p.width());
            let r = (-epsilon * p.mid()).exp();
            values[i * n + j] = r;
            values[j * n + i] = r;
        }
    }
    let labels = seqs.iter().map(|s| s.target.clone()).collect();
    Ok((MetricMatrix::new(labels, values, MetricKind::Quasi)?, max_width))
}

impl BoundaryMetric {
    /// Visual metric based at `w`; requires `eps < min(1, 1/(5 delta))`.
    pub fn visual(
        m: &MetricMatrix,
        seqs: &[&AnchorSequence],
        w: &str,
        epsilon: f64,
        delta: f64,
        tail: usize,
    ) -> Result<Self> {
        let bound = if delta > 0.0 { (1.0 / (5.0 * delta)).min(1.0) } else { 1.0 };
        if !(epsilon > 0.0 && epsilon < bound) {
            return Err(Error::Parameter(format!(
                "visual parameter {epsilon} must lie in (0, {bound}) for delta {delta}"
            )));
        }
        let (rho, max_width) = quasimetric_rho(m, seqs, Base::Point(w), epsilon, tail)?;
        let dmat = chain_metrize(&rho)?.with_kind(MetricKind::Visual);
        Ok(Self {
            base: BoundaryBase::Visual { w: w.to_string() },
            epsilon,
            delta,
            tail,
            rho,
            dmat,
            max_width,
        })
    }

    /// Hamenstädt metric of a Busemann function; requires `exp(22 eps delta) <= 2`.
    pub fn hamenstadt(
        m: &MetricMatrix,
        seqs: &[&AnchorSequence],
        b: &BusemannFunction,
        epsilon: f64,
        delta: f64,
        tail: usize,
    ) -> Result<Self> {
        if !(epsilon > 0.0) || (22.0 * epsilon * delta).exp() > 2.0 {
            return Err(Error::Parameter(format!(
                "Hamenstadt parameter {epsilon} needs exp(22 eps delta) <= 2 for delta {delta}"
            )));
        }
        if let Some(s) = seqs.iter().find(|s| s.target == b.target) {
            return Err(Error::Parameter(format!(
                "{} is the centre of the Busemann function and has no finite distance",
                s.target
            )));
        }
        let (rho, max_width) = quasimetric_rho(m, seqs, Base::Busemann(b), epsilon, tail)?;
        let dmat = chain_metrize(&rho)?.with_kind(MetricKind::Hamenstadt);
        Ok(Self {
            base: BoundaryBase::Hamenstadt {
                w: b.w.clone(),
                target: b.target.clone(),
            },
            epsilon,
            delta,
            tail,
            rho,
            dmat,
            max_width,
        })
    }

    /// Largest ratio `e^(22 eps delta)` allowed by the quasimetric inequality.
    pub fn quasi_constant(&self) -> f64 {
        match self.base {
            BoundaryBase::Visual { .. } => (self.epsilon * self.delta).exp(),
            BoundaryBase::Hamenstadt { .. } => (22.0 * self.epsilon * self.delta).exp(),
        }
    }
}

/// Chain metric `inf sum rho(x_i, x_{i+1})` over finite chains.
///
/// Computed by Dijkstra from each source on the complete graph weighted by
/// `rho`; each path sum accumulates from the source outwards.
pub fn chain_metrize(rho: &MetricMatrix) -> Result<MetricMatrix> {
    rho.ensure_symmetric()?;
    let n = rho.n();
    let mut values = vec![0.0; n * n];
    for s in 0..n {
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        dist[s] = 0.0;
        for _ in 0..n {
            let mut u = usize::MAX;
            for v in 0..n {
                if !done[v] && (u == usize::MAX || dist[v] < dist[u]) {
                    u = v;
                }
            }
            done[u] = true;
            for v in 0..n {
                if !done[v] {
                    let nd = dist[u] + rho.get(u, v);
                    if nd < dist[v] {
                        dist[v] = nd;
                    }
                }
            }
        }
        values[s * n..(s + 1) * n].copy_from_slice(&dist);
    }
    MetricMatrix::new(rho.labels().to_vec(), values, rho.kind())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrinkReport {
    /// Smallest off-diagonal `d / rho`; at least one half when the bound holds.
    pub min_ratio: f64,
    /// Largest off-diagonal `d / rho`; at most one.
    pub max_ratio: f64,
    pub holds: bool,
}

/// Checks `rho / 2 <= d <= rho` off the diagonal.
pub fn frink_bound_check(bm: &BoundaryMetric) -> FrinkReport {
    let n = bm.rho.n();
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let r = bm.dmat.get(i, j) / bm.rho.get(i, j);
                min_ratio = min_ratio.min(r);
                max_ratio = max_ratio.max(r);
            }
        }
    }
    if n < 2 {
        min_ratio = 1.0;
        max_ratio = 1.0;
    }
    FrinkReport {
        min_ratio,
        max_ratio,
        holds: min_ratio >= 0.5 && max_ratio <= 1.0,
    }
}

/// Largest `rho(a,b) / max(rho(a,c), rho(c,b))` over distinct triples.
pub fn quasimetric_factor(rho: &MetricMatrix) -> f64 {
    let n = rho.n();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            for c in 0..n {
                if c == a || c == b {
                    continue;
                }
                worst = worst.max(rho.get(a, b) / rho.get(a, c).max(rho.get(c, b)));
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_of_ultrametric_is_itself() {
        let labels: Vec<String> = (0..3).map(|i| format!("z{i}")).collect();
        let rho = MetricMatrix::from_fn(labels, MetricKind::Quasi, |i, j| if i + j == 1 { 0.5 } else { 1.0 }).unwrap();
        let d = chain_metrize(&rho).unwrap();
        assert_eq!(d.get(0, 1), 0.5);
        assert_eq!(d.get(0, 2), 1.0);
    }

    #[test]
    fn chain_shortcut() {
        let labels: Vec<String> = (0..3).map(|i| format!("z{i}")).collect();
        let rho = MetricMatrix::from_fn(labels, MetricKind::Quasi, |i, j| if i + j == 2 { 3.0 } else { 1.0 }).unwrap();
        let d = chain_metrize(&rho).unwrap();
        assert_eq!(d.get(0, 2), 2.0);
    }
}
