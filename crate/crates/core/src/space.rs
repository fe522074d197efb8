//! Sampled metric spaces: interior points, boundary samples and boundary distances.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::metric::{validate_metric, MetricKind, MetricMatrix, ValidationReport};
use crate::tolerance;

/// A labelled point, with coordinates when the space is Euclidean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
}

impl Site {
    pub fn new(label: impl Into<String>, coords: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            coords: Some(coords),
        }
    }

    pub fn opaque(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            coords: None,
        }
    }
}

/// How distances are obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Geometry {
    /// Euclidean distance between coordinates, computed on demand.
    Euclidean,
    /// Explicit table over interior followed by boundary labels.
    Table { table: MetricMatrix },
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    interior: Vec<Site>,
    boundary: Vec<Site>,
    geometry: Geometry,
    #[serde(default)]
    bdist: Vec<f64>,
    unbounded: bool,
    #[serde(default)]
    domain: Option<Domain>,
}

/// A finite sample of a noncomplete metric space together with samples of its
/// metric boundary.
///
/// Points are addressed by a global index: interior points come first, then
/// boundary points.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSpace {
    interior: Vec<Site>,
    boundary: Vec<Site>,
    geometry: Geometry,
    bdist: Vec<f64>,
    unbounded: bool,
    domain: Option<Domain>,
    index: HashMap<String, usize>,
}

impl Serialize for SampledSpace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpaceRepr {
            interior: self.interior.clone(),
            boundary: self.boundary.clone(),
            geometry: self.geometry.clone(),
            bdist: self.bdist.clone(),
            unbounded: self.unbounded,
            domain: self.domain,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SampledSpace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SpaceRepr::deserialize(d)?;
        let space = Self::assemble(r.interior, r.boundary, r.geometry, r.domain, r.unbounded)
            .map_err(serde::de::Error::custom)?;
        if space.domain.is_none() && !r.bdist.is_empty() && r.bdist != space.bdist {
            space.with_bdist(r.bdist).map_err(serde::de::Error::custom)
        } else {
            Ok(space)
        }
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl SampledSpace {
    /// Euclidean space from coordinates.
    ///
    /// With a `domain` the boundary distance is exact; otherwise it is the
    /// distance to the nearest boundary sample.
    pub fn euclidean(
        interior: Vec<Site>,
        boundary: Vec<Site>,
        domain: Option<Domain>,
        unbounded: bool,
    ) -> Result<Self> {
        Self::assemble(interior, boundary, Geometry::Euclidean, domain, unbounded)
    }

    /// Space given by an explicit distance table over interior and boundary labels.
    pub fn from_table(table: &MetricMatrix, boundary_labels: &[String], unbounded: bool) -> Result<Self> {
        let is_boundary: std::collections::HashSet<&str> =
            boundary_labels.iter().map(String::as_str).collect();
        for b in boundary_labels {
            table.index_of(b)?;
        }
        let interior: Vec<Site> = table
            .labels()
            .iter()
            .filter(|l| !is_boundary.contains(l.as_str()))
            .map(|l| Site::opaque(l.clone()))
            .collect();
        let boundary: Vec<Site> = boundary_labels.iter().map(|l| Site::opaque(l.clone())).collect();
        let order: Vec<String> = interior
            .iter()
            .chain(&boundary)
            .map(|s| s.label.clone())
            .collect();
        let table = table.restrict(&order)?.with_kind(MetricKind::D);
        Self::assemble(interior, boundary, Geometry::Table { table }, None, unbounded)
    }

    fn assemble(
        interior: Vec<Site>,
        boundary: Vec<Site>,
        geometry: Geometry,
        domain: Option<Domain>,
        unbounded: bool,
    ) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, s) in interior.iter().chain(&boundary).enumerate() {
            if index.insert(s.label.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(s.label.clone()));
            }
        }
        if interior.is_empty() {
            return Err(Error::Malformed("the space has no interior points".into()));
        }
        match &geometry {
            Geometry::Euclidean => {
                let dim = interior[0].coords.as_ref().map(Vec::len);
                for s in interior.iter().chain(&boundary) {
                    let c = s.coords.as_ref().ok_or_else(|| {
                        Error::Malformed(format!("point {} has no coordinates", s.label))
                    })?;
                    if Some(c.len()) != dim || c.iter().any(|v| !v.is_finite()) {
                        return Err(Error::Malformed(format!(
                            "point {} has inconsistent or non-finite coordinates",
                            s.label
                        )));
                    }
                }
                if domain.is_some() && dim != Some(2) {
                    return Err(Error::Malformed("analytic domains are planar".into()));
                }
            }
            Geometry::Table { table } => {
                let expected: Vec<&str> = interior.iter().chain(&boundary).map(|s| s.label.as_str()).collect();
                if table.labels().iter().map(String::as_str).ne(expected.iter().copied()) {
                    return Err(Error::LabelMismatch(
                        "table labels must list interior then boundary labels".into(),
                    ));
                }
                if domain.is_some() {
                    return Err(Error::Malformed("a table space cannot carry an analytic domain".into()));
                }
            }
        }
        let mut space = Self {
            interior,
            boundary,
            geometry,
            bdist: Vec::new(),
            unbounded,
            domain,
            index,
        };
        space.bdist = space.compute_bdist()?;
        Ok(space)
    }

    fn compute_bdist(&self) -> Result<Vec<f64>> {
        let n = self.interior.len();
        let out: Vec<f64> = match self.domain {
            Some(dom) => self
                .interior
                .iter()
                .map(|s| {
                    let c = s.coords.as_ref().expect("checked");
                    let p = [c[0], c[1]];
                    if dom.boundary_distance(p) == 0.0 {
                        Err(Error::TouchesBoundary(s.label.clone()))
                    } else if dom.contains(p) {
                        Ok(dom.boundary_distance(p))
                    } else {
                        Err(Error::Malformed(format!(
                            "point {} lies outside the {} domain",
                            s.label,
                            dom.name()
                        )))
                    }
                })
                .collect::<Result<_>>()?,
            None => {
                if self.boundary.is_empty() {
                    return Err(Error::NoBoundary);
                }
                (0..n)
                    .map(|i| {
                        (n..n + self.boundary.len())
                            .map(|b| self.dist(i, b))
                            .fold(f64::INFINITY, f64::min)
                    })
                    .collect()
            }
        };
        for (i, &v) in out.iter().enumerate() {
            if !(v > 0.0) {
                return Err(Error::TouchesBoundary(self.interior[i].label.clone()));
            }
        }
        Ok(out)
    }

    /// Replaces sample-based boundary distances by known values, which may
    /// not exceed the distance to any boundary sample.
    pub fn with_bdist(mut self, bdist: Vec<f64>) -> Result<Self> {
        if self.domain.is_some() {
            return Err(Error::Parameter("analytic domains fix the boundary distance".into()));
        }
        if bdist.len() != self.interior.len() {
            return Err(Error::Malformed(format!(
                "{} boundary distances for {} interior points",
                bdist.len(),
                self.interior.len()
            )));
        }
        for (i, &v) in bdist.iter().enumerate() {
            if !(v > 0.0) {
                return Err(Error::TouchesBoundary(self.interior[i].label.clone()));
            }
            if v > self.bdist[i] * (1.0 + tolerance::METRIC_AXIOM) {
                return Err(Error::Malformed(format!(
                    "boundary distance of {} exceeds its distance to a boundary sample",
                    self.interior[i].label
                )));
            }
        }
        self.bdist = bdist;
        Ok(self)
    }

    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    pub fn n_boundary(&self) -> usize {
        self.boundary.len()
    }

    pub fn interior(&self) -> &[Site] {
        &self.interior
    }

    pub fn boundary(&self) -> &[Site] {
        &self.boundary
    }

    pub fn interior_labels(&self) -> Vec<String> {
        self.interior.iter().map(|s| s.label.clone()).collect()
    }

    pub fn boundary_labels(&self) -> Vec<String> {
        self.boundary.iter().map(|s| s.label.clone()).collect()
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn domain(&self) -> Option<Domain> {
        self.domain
    }

    pub fn is_unbounded(&self) -> bool {
        self.unbounded
    }

    /// Boundary distances of the interior points.
    pub fn bdist(&self) -> &[f64] {
        &self.bdist
    }

    pub fn site(&self, g: usize) -> &Site {
        if g < self.interior.len() {
            &self.interior[g]
        } else {
            &self.boundary[g - self.interior.len()]
        }
    }

    pub fn label(&self, g: usize) -> &str {
        &self.site(g).label
    }

    pub fn coords(&self, g: usize) -> Option<&[f64]> {
        self.site(g).coords.as_deref()
    }

    /// Global index of a label.
    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Index of an interior label; errors on boundary labels.
    pub fn interior_index(&self, label: &str) -> Result<usize> {
        let g = self.index_of(label)?;
        if g >= self.interior.len() {
            return Err(Error::Parameter(format!("{label} is a boundary label")));
        }
        Ok(g)
    }

    /// Distance between global indices.
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.geometry {
            Geometry::Euclidean => euclid(
                self.site(i).coords.as_deref().expect("checked"),
                self.site(j).coords.as_deref().expect("checked"),
            ),
            Geometry::Table { table } => table.get(i, j),
        }
    }

    /// Interior point nearest to the given coordinates.
    pub fn nearest_interior(&self, p: &[f64]) -> Option<usize> {
        (0..self.interior.len())
            .filter_map(|i| self.interior[i].coords.as_deref().map(|c| (i, euclid(c, p))))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }

    /// Ambient distance matrix over the given global indices.
    pub fn d_matrix(&self, idx: &[usize]) -> MetricMatrix {
        let labels = idx.iter().map(|&g| self.label(g).to_string()).collect();
        MetricMatrix::from_fn(labels, MetricKind::D, |a, b| self.dist(idx[a], idx[b]))
            .expect("labels are unique")
    }

    /// Ambient distance matrix over the boundary samples.
    pub fn boundary_d_matrix(&self) -> MetricMatrix {
        let n = self.interior.len();
        let idx: Vec<usize> = (n..n + self.boundary.len()).collect();
        self.d_matrix(&idx)
    }

    /// Adds interior points (Euclidean spaces only), reusing existing points
    /// that coincide up to a tiny multiple of the boundary distance.
    ///
    /// Returns the extended space and, for each request, the label of the
    /// point that now represents it.
    pub fn with_interior_points(&self, points: &[(String, Vec<f64>)]) -> Result<(Self, Vec<String>)> {
        if !matches!(self.geometry, Geometry::Euclidean) {
            return Err(Error::Parameter("points can only be added to Euclidean spaces".into()));
        }
        let mut interior = self.interior.clone();
        let mut bd = self.bdist.clone();
        let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let key = |c: &[f64]| ((c[0] * 1e6).round() as i64, (c.get(1).copied().unwrap_or(0.0) * 1e6).round() as i64);
        for (i, s) in interior.iter().enumerate() {
            grid.entry(key(s.coords.as_deref().unwrap())).or_default().push(i);
        }
        let mut out = Vec::with_capacity(points.len());
        let mut taken: std::collections::HashSet<String> = self.index.keys().cloned().collect();
        for (label, p) in points {
            let bp = match self.domain {
                Some(dom) => dom.boundary_distance([p[0], p[1]]),
                None => self
                    .boundary
                    .iter()
                    .map(|b| euclid(p, b.coords.as_deref().unwrap()))
                    .fold(f64::INFINITY, f64::min),
            };
            let k = key(p);
            let mut hit = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(list) = grid.get(&(k.0 + dx, k.1 + dy)) {
                        for &i in list {
                            let c = interior[i].coords.as_deref().unwrap();
                            if euclid(c, p) <= tolerance::DEDUP_RELATIVE * bp.min(bd[i]) {
                                hit = Some(i);
                                break 'search;
                            }
                        }
                    }
                }
            }
            match hit {
                Some(i) => out.push(interior[i].label.clone()),
                None => {
                    if !taken.insert(label.clone()) {
                        return Err(Error::DuplicateLabel(label.clone()));
                    }
                    grid.entry(k).or_default().push(interior.len());
                    interior.push(Site::new(label.clone(), p.clone()));
                    bd.push(bp);
                    out.push(label.clone());
                }
            }
        }
        let space = Self::assemble(interior, self.boundary.clone(), Geometry::Euclidean, self.domain, self.unbounded)?;
        let space = if self.domain.is_none() { space.with_bdist(bd)? } else { space };
        Ok((space, out))
    }

    /// Checks the metric axioms of the ambient distance and the boundary distances.
    pub fn validate(&self) -> SpaceReport {
        let all: Vec<usize> = (0..self.interior.len() + self.boundary.len()).collect();
        let metric = if all.len() <= 1500 {
            Some(validate_metric(&self.d_matrix(&all)))
        } else {
            None
        };
        let n = self.interior.len();
        let mut bdist_excess = 0.0f64;
        for i in 0..n {
            for b in n..n + self.boundary.len() {
                bdist_excess = bdist_excess.max(self.bdist[i] - self.dist(i, b));
            }
        }
        SpaceReport {
            n_interior: n,
            n_boundary: self.boundary.len(),
            unbounded: self.unbounded,
            min_bdist: self.bdist.iter().copied().fold(f64::INFINITY, f64::min),
            max_bdist: self.bdist.iter().copied().fold(0.0, f64::max),
            bdist_excess,
            metric,
        }
    }
}

/// Summary returned by [`SampledSpace::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceReport {
    pub n_interior: usize,
    pub n_boundary: usize,
    pub unbounded: bool,
    pub min_bdist: f64,
    pub max_bdist: f64,
    /// Largest amount by which a boundary distance exceeds the distance to a
    /// boundary sample; positive values indicate an inconsistent input.
    pub bdist_excess: f64,
    /// Metric axiom report, omitted for very large samples.
    pub metric: Option<ValidationReport>,
}

impl SpaceReport {
    pub fn is_valid(&self) -> bool {
        self.bdist_excess <= tolerance::METRIC_AXIOM * self.max_bdist.max(1.0)
            && self.metric.as_ref().is_none_or(ValidationReport::is_metric)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bdist_from_samples() {
        let s = SampledSpace::euclidean(
            vec![Site::new("x", vec![0.0, 2.0])],
            vec![Site::new("a", vec![0.0, 0.0]), Site::new("b", vec![1.0, 2.0])],
            None,
            true,
        )
        .unwrap();
        assert_eq!(s.bdist(), &[1.0]);
    }

    #[test]
    fn no_boundary_is_an_error() {
        let e = SampledSpace::euclidean(vec![Site::new("x", vec![0.0, 2.0])], vec![], None, true);
        assert!(matches!(e, Err(Error::NoBoundary)));
    }

    #[test]
    fn touching_point_is_an_error() {
        let e = SampledSpace::euclidean(
            vec![Site::new("x", vec![0.0, 0.0])],
            vec![Site::new("a", vec![0.0, 0.0])],
            None,
            true,
        );
        assert!(matches!(e, Err(Error::TouchesBoundary(l)) if l == "x"));
    }

    #[test]
    fn adding_points_dedups() {
        let s = SampledSpace::euclidean(
            vec![Site::new("x", vec![0.0, 1.0])],
            vec![],
            Some(Domain::HalfPlane),
            true,
        )
        .unwrap();
        let (t, labels) = s
            .with_interior_points(&[
                ("a".into(), vec![0.0, 1.0]),
                ("b".into(), vec![0.0, 2.0]),
                ("c".into(), vec![0.0, 2.0]),
            ])
            .unwrap();
        assert_eq!(labels, ["x", "b", "b"]);
        assert_eq!(t.n_interior(), 2);
        assert_eq!(t.bdist(), &[1.0, 2.0]);
    }
}
