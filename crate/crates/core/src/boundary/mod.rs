//! Boundaries at infinity through anchor sequences.
//!
//! A boundary point is represented by a sequence of interior points that
//! converges to it (a Gromov sequence). Products with boundary points are
//! read off from the last few terms of these sequences and reported as an
//! interval.

mod busemann;
mod quasi;

pub use busemann::{busemann, busemann_identity_defect, busemann_triple_defect, BusemannFunction};
pub use quasi::{
    chain_metrize, frink_bound_check, quasimetric_factor, quasimetric_rho, BoundaryBase, BoundaryMetric,
    FrinkReport,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::MetricMatrix;
use crate::space::SampledSpace;
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorKind {
    /// Interior points approaching a boundary sample.
    Proxy,
    /// Interior points escaping to infinity.
    Infinity,
}

/// Labels of interior points converging to a boundary point, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorSequence {
    /// The boundary label it represents, or `"inf"`.
    pub target: String,
    pub kind: AnchorKind,
    pub points: Vec<String>,
}

/// Label used for the point at infinity.
pub const INFINITY_LABEL: &str = "inf";

/// Placement of anchor sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorSchedule {
    /// Boundary distance `r` of the first proxy; later proxies sit at `r 2^-n`.
    pub proxy_start: f64,
    pub proxy_levels: usize,
    /// Distance `R` of the first infinity anchor; later ones sit at `R 2^n`.
    pub infinity_start: f64,
    pub infinity_levels: usize,
    /// Origin of the infinity ray; defaults to the centroid of the interior.
    #[serde(default)]
    pub infinity_origin: Option<[f64; 2]>,
    /// When set, intermediate points are added along each sequence so that
    /// consecutive points differ by at most this ratio, keeping the anchors
    /// connected in a quasihyperbolic graph.
    #[serde(default)]
    pub fill_ratio: Option<f64>,
}

impl AnchorSchedule {
    pub fn new(proxy_start: f64, infinity_start: f64) -> Self {
        Self {
            proxy_start,
            proxy_levels: 13,
            infinity_start,
            infinity_levels: 13,
            infinity_origin: None,
            fill_ratio: None,
        }
    }

    /// Schedule scaled to a sample: proxies start at a quarter of the smallest
    /// gap between boundary samples, halved until each first proxy lies at
    /// boundary distance at least half its offset; infinity anchors at twice the radius of
    /// the interior around its centroid.
    pub fn for_space(space: &SampledSpace) -> Self {
        let n = space.n_interior();
        let nb = space.n_boundary();
        let mut gap = f64::INFINITY;
        for a in n..n + nb {
            for b in (a + 1)..n + nb {
                gap = gap.min(space.dist(a, b));
            }
        }
        let radius = space.bdist().iter().copied().fold(0.0, f64::max);
        let mut proxy = if gap.is_finite() { 0.25 * gap } else { 0.25 * radius };
        if let Some(dom) = space.domain() {
            // Shrink until every first proxy sits well inside the domain.
            for site in space.boundary() {
                let Some(b) = site.coords.as_deref() else { continue };
                let nrm = dom.inward_normal([b[0], b[1]]);
                for _ in 0..60 {
                    let p = [b[0] + proxy * nrm[0], b[1] + proxy * nrm[1]];
                    if dom.contains(p) && dom.boundary_distance(p) >= 0.5 * proxy {
                        break;
                    }
                    proxy *= 0.5;
                }
            }
        }
        let spread = match space.interior().first().and_then(|s| s.coords.as_ref()) {
            Some(_) => {
                let mut c = [0.0, 0.0];
                for s in space.interior() {
                    let x = s.coords.as_deref().unwrap();
                    c[0] += x[0] / n as f64;
                    c[1] += x[1] / n as f64;
                }
                space
                    .interior()
                    .iter()
                    .map(|s| {
                        let x = s.coords.as_deref().unwrap();
                        (x[0] - c[0]).hypot(x[1] - c[1])
                    })
                    .fold(0.0, f64::max)
            }
            None => radius,
        };
        Self::new(proxy, 2.0 * spread.max(radius))
    }

    pub fn with_fill(mut self, ratio: f64) -> Self {
        self.fill_ratio = Some(ratio);
        self
    }

    pub fn with_origin(mut self, origin: [f64; 2]) -> Self {
        self.infinity_origin = Some(origin);
        self
    }
}

/// A space extended by anchor points, with the sequences that use them.
#[derive(Debug, Clone)]
pub struct AnchoredSpace {
    pub space: SampledSpace,
    /// One sequence per boundary sample, in boundary order.
    pub proxies: Vec<AnchorSequence>,
    /// Present when the space is unbounded.
    pub infinity: Option<AnchorSequence>,
}

impl AnchoredSpace {
    /// Every anchor label, infinity last.
    pub fn anchor_labels(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for s in self.proxies.iter().chain(&self.infinity) {
            for p in &s.points {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
        }
        out
    }

    pub fn proxy(&self, target: &str) -> Result<&AnchorSequence> {
        self.proxies
            .iter()
            .find(|s| s.target == target)
            .ok_or_else(|| Error::UnknownLabel(target.to_string()))
    }
}

/// Subdivision of `[1, 2]` into `m` equal geometric steps with `2^(1/m) <= ratio`.
fn fill_steps(ratio: f64) -> usize {
    (std::f64::consts::LN_2 / ratio.ln() - 1e-9).ceil().max(1.0) as usize
}

/// Adds proxy sequences for every boundary sample and, for unbounded spaces,
/// an infinity sequence.
///
/// Proxies sit on the inward normal at boundary distance `r 2^-n`; infinity
/// anchors sit on the escape ray at distance `R 2^n` from the origin.
pub fn attach_anchors(space: &SampledSpace, schedule: &AnchorSchedule) -> Result<AnchoredSpace> {
    let dom = space.domain().ok_or_else(|| {
        Error::Precondition("anchor sequences need a space with an analytic domain".into())
    })?;
    if !(schedule.proxy_start > 0.0 && schedule.infinity_start > 0.0) {
        return Err(Error::Parameter("anchor distances must be positive".into()));
    }
    if schedule.proxy_levels < 2 || schedule.infinity_levels < 2 {
        return Err(Error::Parameter("anchor sequences need at least two levels".into()));
    }
    if let Some(q) = schedule.fill_ratio {
        if !(q > 1.0) {
            return Err(Error::Parameter(format!("fill ratio must exceed 1, got {q}")));
        }
    }
    let steps = schedule.fill_ratio.map(fill_steps).unwrap_or(1);

    // (label, coordinates, is an anchor of sequence s)
    let mut requests: Vec<(String, Vec<f64>)> = Vec::new();
    let mut seq_slots: Vec<(String, AnchorKind, Vec<usize>)> = Vec::new();

    for site in space.boundary() {
        let b = site
            .coords
            .as_deref()
            .ok_or_else(|| Error::Precondition("boundary samples need coordinates".into()))?;
        let b = [b[0], b[1]];
        let nrm = dom.inward_normal(b);
        let mut slots = Vec::new();
        let total = (schedule.proxy_levels - 1) * steps;
        for k in 0..=total {
            let t = schedule.proxy_start * 2f64.powf(-(k as f64) / steps as f64);
            let p = vec![b[0] + t * nrm[0], b[1] + t * nrm[1]];
            let label = if k % steps == 0 {
                format!("{}@{}", site.label, k / steps)
            } else {
                format!("{}@f{}", site.label, k)
            };
            if k % steps == 0 {
                slots.push(requests.len());
            }
            requests.push((label, p));
        }
        seq_slots.push((site.label.clone(), AnchorKind::Proxy, slots));
    }

    if space.is_unbounded() {
        let origin = schedule.infinity_origin.unwrap_or_else(|| {
            let n = space.n_interior() as f64;
            let mut c = [0.0, 0.0];
            for s in space.interior() {
                let x = s.coords.as_deref().unwrap();
                c[0] += x[0] / n;
                c[1] += x[1] / n;
            }
            c
        });
        let dir = dom.escape_direction();
        // With filling, connect the origin to the first anchor as well.
        let lead = dom.boundary_distance(origin);
        if let (Some(q), true) = (schedule.fill_ratio, dom.contains(origin) && lead > 0.0) {
            let mut t = schedule.infinity_start;
            let mut j = 0;
            while t > (q - 1.0) * lead {
                t /= q;
                j += 1;
                requests.push((format!("{INFINITY_LABEL}@l{j}"), vec![origin[0] + t * dir[0], origin[1] + t * dir[1]]));
            }
        }
        let mut slots = Vec::new();
        let total = (schedule.infinity_levels - 1) * steps;
        for k in 0..=total {
            let t = schedule.infinity_start * 2f64.powf(k as f64 / steps as f64);
            let p = vec![origin[0] + t * dir[0], origin[1] + t * dir[1]];
            let label = if k % steps == 0 {
                format!("{INFINITY_LABEL}@{}", k / steps)
            } else {
                format!("{INFINITY_LABEL}@f{k}")
            };
            if k % steps == 0 {
                slots.push(requests.len());
            }
            requests.push((label, p));
        }
        seq_slots.push((INFINITY_LABEL.to_string(), AnchorKind::Infinity, slots));
    }

    for (_, p) in &requests {
        if !dom.contains([p[0], p[1]]) {
            return Err(Error::Precondition(format!(
                "anchor at ({}, {}) falls outside the domain",
                p[0], p[1]
            )));
        }
    }
    let (extended, labels) = space.with_interior_points(&requests)?;
    let mut proxies = Vec::new();
    let mut infinity = None;
    for (target, kind, slots) in seq_slots {
        let points: Vec<String> = slots.iter().map(|&i| labels[i].clone()).collect();
        let seq = AnchorSequence { target, kind, points };
        match kind {
            AnchorKind::Proxy => proxies.push(seq),
            AnchorKind::Infinity => infinity = Some(seq),
        }
    }
    Ok(AnchoredSpace {
        space: extended,
        proxies,
        infinity,
    })
}

/// One side of a boundary product.
#[derive(Debug, Clone, Copy)]
pub enum Endpoint<'a> {
    Sequence(&'a AnchorSequence),
    /// An interior point, read as a constant sequence.
    Point(&'a str),
}

/// Base of a Gromov product: an interior point or a Busemann function.
#[derive(Debug, Clone, Copy)]
pub enum Base<'a> {
    Point(&'a str),
    Busemann(&'a BusemannFunction),
}

/// A boundary Gromov product, reported as the range over the tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryProduct {
    pub lo: f64,
    pub hi: f64,
    /// Set when every step of the tail grows by at least
    /// [`tolerance::DIVERGENCE_STEP`]; both ends then name the same boundary point.
    pub diverging: bool,
}

impl BoundaryProduct {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

fn resolve(m: &MetricMatrix, e: Endpoint<'_>) -> Result<Vec<usize>> {
    match e {
        Endpoint::Point(l) => Ok(vec![m.index_of(l)?]),
        Endpoint::Sequence(s) => s.points.iter().map(|l| m.index_of(l)).collect(),
    }
}

/// Gromov product of two endpoints over the last `tail` aligned terms.
///
/// Sequences are aligned from their ends; a point is paired with every term.
pub fn boundary_gromov_product(
    m: &MetricMatrix,
    a: Endpoint<'_>,
    b: Endpoint<'_>,
    base: Base<'_>,
    tail: usize,
) -> Result<BoundaryProduct> {
    let ia = resolve(m, a)?;
    let ib = resolve(m, b)?;
    let len = match (a, b) {
        (Endpoint::Point(_), Endpoint::Point(_)) => 1,
        (Endpoint::Point(_), _) => ib.len(),
        (_, Endpoint::Point(_)) => ia.len(),
        _ => ia.len().min(ib.len()),
    };
    if tail == 0 {
        return Err(Error::Parameter("tail must be positive".into()));
    }
    if tail > len {
        return Err(Error::TailTooLong { tail, len });
    }
    let pick = |v: &[usize], k: usize| -> usize {
        if v.len() == 1 {
            v[0]
        } else {
            v[v.len() - len + k]
        }
    };
    let prod = |x: usize, y: usize| -> Result<f64> {
        match base {
            Base::Point(w) => Ok(crate::gromov::product(m, x, y, m.index_of(w)?)),
            Base::Busemann(bf) => bf.product_indices(m, x, y),
        }
    };
    let mut values = Vec::with_capacity(tail);
    for k in (len - tail)..len {
        values.push(prod(pick(&ia, k), pick(&ib, k))?);
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let diverging = values.len() >= tolerance::DIVERGENCE_MIN_TAIL
        && values.windows(2).all(|w| w[1] - w[0] >= tolerance::DIVERGENCE_STEP);
    Ok(BoundaryProduct { lo, hi, diverging })
}

/// Whether the sequence is a Gromov sequence with respect to `w` on its tail:
/// consecutive products must grow.
pub fn is_gromov_sequence(m: &MetricMatrix, seq: &AnchorSequence, w: &str) -> Result<bool> {
    let wi = m.index_of(w)?;
    let idx = resolve(m, Endpoint::Sequence(seq))?;
    let products: Vec<f64> = idx
        .windows(2)
        .map(|p| crate::gromov::product(m, p[0], p[1], wi))
        .collect();
    Ok(products.windows(2).all(|p| p[1] > p[0]))
}
