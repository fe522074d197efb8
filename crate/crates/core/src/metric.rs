//! Labelled distance matrices, metric validation and cross ratios.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance;

/// Which construction produced a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// The ambient metric `d`.
    D,
    H,
    Jtilde,
    J,
    /// Graph approximation of the quasihyperbolic metric.
    KGraph,
    /// Chain metric of a visual quasimetric.
    Visual,
    /// Chain metric of a Hamenstädt quasimetric.
    Hamenstadt,
    /// A quasimetric that has not been chain-metrized.
    Quasi,
    #[default]
    Custom,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::D => "d",
            MetricKind::H => "h",
            MetricKind::Jtilde => "jtilde",
            MetricKind::J => "j",
            MetricKind::KGraph => "k_graph",
            MetricKind::Visual => "visual",
            MetricKind::Hamenstadt => "hamenstadt",
            MetricKind::Quasi => "quasi",
            MetricKind::Custom => "custom",
        }
    }
}

/// Square matrix of pairwise distances indexed by labels.
///
/// Serialises as `{"labels": [...], "matrix": [[...], ...]}` plus the kind tag.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMatrix {
    labels: Vec<String>,
    values: Vec<f64>,
    kind: MetricKind,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    labels: Vec<String>,
    matrix: Vec<Vec<f64>>,
    #[serde(default)]
    kind: MetricKind,
}

impl Serialize for MetricMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr {
            labels: self.labels.clone(),
            matrix: (0..self.n()).map(|i| self.row(i).to_vec()).collect(),
            kind: self.kind,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MetricMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MatrixRepr::deserialize(d)?;
        MetricMatrix::from_rows(r.labels, r.matrix, r.kind).map_err(serde::de::Error::custom)
    }
}

fn build_index(labels: &[String]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(labels.len());
    for (i, l) in labels.iter().enumerate() {
        if index.insert(l.clone(), i).is_some() {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(index)
}

impl MetricMatrix {
    /// Builds a matrix from row-major values.
    pub fn new(labels: Vec<String>, values: Vec<f64>, kind: MetricKind) -> Result<Self> {
        let n = labels.len();
        if values.len() != n * n {
            return Err(Error::Malformed(format!(
                "{} labels need {} entries, got {}",
                n,
                n * n,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| v.is_nan()) {
            return Err(Error::Malformed(format!("matrix entry {v} is not a number")));
        }
        let index = build_index(&labels)?;
        Ok(Self {
            labels,
            values,
            kind,
            index,
        })
    }

    pub fn from_rows(labels: Vec<String>, rows: Vec<Vec<f64>>, kind: MetricKind) -> Result<Self> {
        let n = labels.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Malformed(format!("matrix is not {n} x {n}")));
        }
        Self::new(labels, rows.into_iter().flatten().collect(), kind)
    }

    /// Builds a symmetric matrix with zero diagonal from `f(i, j)` for `i < j`.
    pub fn from_fn(
        labels: Vec<String>,
        kind: MetricKind,
        f: impl Fn(usize, usize) -> f64 + Sync,
    ) -> Result<Self> {
        let n = labels.len();
        let upper: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| ((i + 1)..n).map(|j| f(i, j)).collect())
            .collect();
        let mut values = vec![0.0; n * n];
        for (i, row) in upper.into_iter().enumerate() {
            for (k, v) in row.into_iter().enumerate() {
                let j = i + 1 + k;
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self::new(labels, values, kind)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: MetricKind) -> Self {
        self.kind = kind;
        self
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.labels.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }

    /// Distance between two labels.
    pub fn value(&self, a: &str, b: &str) -> Result<f64> {
        Ok(self.get(self.index_of(a)?, self.index_of(b)?))
    }

    /// Restriction to the given indices, in that order.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let m = idx.len();
        let mut values = Vec::with_capacity(m * m);
        for &i in idx {
            for &j in idx {
                values.push(self.get(i, j));
            }
        }
        let labels = idx.iter().map(|&i| self.labels[i].clone()).collect();
        Self::new(labels, values, self.kind).expect("indices come from a valid matrix")
    }

    /// Restriction to the given labels, in that order.
    pub fn restrict<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let idx = labels
            .iter()
            .map(|l| self.index_of(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.submatrix(&idx))
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        self.map(|v| lambda * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            labels: self.labels.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            kind: self.kind,
            index: self.index.clone(),
        }
    }

    /// Same values with labels renamed; `labels[i]` becomes the name of row `i`.
    pub fn relabeled(&self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(Error::LabelMismatch("relabel length differs".into()));
        }
        Self::new(labels, self.values.clone(), self.kind)
    }

    pub fn max_entry(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn ensure_symmetric(&self) -> Result<()> {
        let n = self.n();
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (self.get(i, j), self.get(j, i));
                if (a - b).abs() > tolerance::METRIC_AXIOM * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::Asymmetric(self.labels[i].clone(), self.labels[j].clone()));
                }
            }
        }
        Ok(())
    }
}

/// A metric axiom that a matrix can violate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Nonnegativity,
    ZeroDiagonal,
    Separation,
    Symmetry,
    Triangle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub labels: Vec<String>,
    /// Amount by which the axiom fails, in units of the largest entry.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n: usize,
    pub total_violations: usize,
    /// At most [`ValidationReport::LISTED`] witnesses, worst first.
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub const LISTED: usize = 64;

    pub fn is_metric(&self) -> bool {
        self.total_violations == 0
    }
}

/// Checks the metric axioms with a tolerance relative to the largest entry.
pub fn validate_metric(m: &MetricMatrix) -> ValidationReport {
    let n = m.n();
    let scale = m.max_entry().max(f64::MIN_POSITIVE);
    let tol = tolerance::METRIC_AXIOM;
    let lab = |ix: &[usize]| ix.iter().map(|&i| m.labels[i].clone()).collect::<Vec<_>>();

    let mut found: Vec<Violation> = Vec::new();
    let mut total = 0usize;
    for i in 0..n {
        let dii = m.get(i, i) / scale;
        if dii.abs() > tol {
            total += 1;
            found.push(Violation {
                axiom: Axiom::ZeroDiagonal,
                labels: lab(&[i]),
                excess: dii.abs(),
            });
        }
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = m.get(i, j) / scale;
            if v < -tol {
                total += 1;
                found.push(Violation {
                    axiom: Axiom::Nonnegativity,
                    labels: lab(&[i, j]),
                    excess: -v,
                });
            } else if v <= 0.0 && i < j {
                total += 1;
                found.push(Violation {
                    axiom: Axiom::Separation,
                    labels: lab(&[i, j]),
                    excess: 0.0,
                });
            }
            if i < j {
                let asym = (m.get(i, j) - m.get(j, i)).abs() / scale;
                if asym > tol {
                    total += 1;
                    found.push(Violation {
                        axiom: Axiom::Symmetry,
                        labels: lab(&[i, j]),
                        excess: asym,
                    });
                }
            }
        }
    }

    let tri: Vec<(usize, Vec<Violation>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut count = 0;
            let mut local = Vec::new();
            for j in 0..n {
                let dij = m.get(i, j);
                for k in 0..n {
                    if i == j || j == k || i == k {
                        continue;
                    }
                    let excess = (m.get(i, k) - dij - m.get(j, k)) / scale;
                    if excess > tol {
                        count += 1;
                        if local.len() < ValidationReport::LISTED {
                            local.push(Violation {
                                axiom: Axiom::Triangle,
                                labels: lab(&[i, j, k]),
                                excess,
                            });
                        }
                    }
                }
            }
            (count, local)
        })
        .collect();
    for (c, v) in tri {
        total += c;
        found.extend(v);
    }
    found.sort_by(|a, b| b.excess.total_cmp(&a.excess));
    found.truncate(ValidationReport::LISTED);
    ValidationReport {
        n,
        total_violations: total,
        violations: found,
    }
}

/// A vertex of a cross ratio: a label of the matrix or the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossPoint<'a> {
    Label(&'a str),
    Infinity,
}

/// Cross ratio `|x,y,z,w| = d(x,z) d(y,w) / (d(x,y) d(z,w))`.
///
/// One vertex may be [`CrossPoint::Infinity`]; the two factors involving it
/// are dropped, so `|x,y,z,oo| = d(x,z) / d(x,y)`.
pub fn cross_ratio(m: &MetricMatrix, q: [CrossPoint<'_>; 4]) -> Result<f64> {
    let inf = q.iter().filter(|p| matches!(p, CrossPoint::Infinity)).count();
    if inf > 1 {
        return Err(Error::Degenerate("more than one vertex at infinity".into()));
    }
    let idx: Vec<Option<usize>> = q
        .iter()
        .map(|p| match p {
            CrossPoint::Label(l) => m.index_of(l).map(Some),
            CrossPoint::Infinity => Ok(None),
        })
        .collect::<Result<_>>()?;
    for a in 0..4 {
        for b in (a + 1)..4 {
            if let (Some(i), Some(j)) = (idx[a], idx[b]) {
                if i == j {
                    return Err(Error::Degenerate("cross ratio vertices must be distinct".into()));
                }
            }
        }
    }
    let d = |a: usize, b: usize| match (idx[a], idx[b]) {
        (Some(i), Some(j)) => Some(m.get(i, j)),
        _ => None,
    };
    let factor = |a: usize, b: usize| d(a, b).unwrap_or(1.0);
    let num = factor(0, 2) * factor(1, 3);
    let den = factor(0, 1) * factor(2, 3);
    if den == 0.0 || num == 0.0 {
        return Err(Error::Degenerate("cross ratio has a zero distance".into()));
    }
    Ok(num / den)
}

/// Cross ratio on raw indices with an optional vertex at infinity, without checks.
#[inline]
pub(crate) fn cross_ratio_raw(m: &MetricMatrix, q: [Option<usize>; 4]) -> f64 {
    let f = |a: usize, b: usize| match (q[a], q[b]) {
        (Some(i), Some(j)) => m.get(i, j),
        _ => 1.0,
    };
    (f(0, 2) * f(1, 3)) / (f(0, 1) * f(2, 3))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i}")).collect()
    }

    #[test]
    fn detects_triangle_violation() {
        let m = MetricMatrix::from_rows(
            labels(3),
            vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]],
            MetricKind::Custom,
        )
        .unwrap();
        let r = validate_metric(&m);
        assert!(!r.is_metric());
        assert!(r.violations.iter().any(|v| v.axiom == Axiom::Triangle
            && v.labels == ["p0", "p1", "p2"]));
    }

    #[test]
    fn detects_nonzero_diagonal() {
        let m = MetricMatrix::from_rows(
            labels(2),
            vec![vec![0.1, 1.0], vec![1.0, 0.0]],
            MetricKind::Custom,
        )
        .unwrap();
        let r = validate_metric(&m);
        assert_eq!(r.violations[0].axiom, Axiom::ZeroDiagonal);
    }

    #[test]
    fn cross_ratio_values() {
        let pts: [f64; 4] = [0.0, 1.0, 3.0, 7.0];
        let m = MetricMatrix::from_fn(labels(4), MetricKind::D, |i, j| (pts[i] - pts[j]).abs()).unwrap();
        use CrossPoint::*;
        let t = cross_ratio(&m, [Label("p0"), Label("p1"), Label("p2"), Label("p3")]).unwrap();
        assert!((t - (3.0 * 6.0) / (1.0 * 4.0)).abs() < 1e-15);
        let t = cross_ratio(&m, [Label("p0"), Label("p1"), Label("p2"), Infinity]).unwrap();
        assert_eq!(t, 3.0);
        assert!(cross_ratio(&m, [Label("p0"), Label("p0"), Label("p2"), Label("p3")]).is_err());
    }

    #[test]
    fn json_shape() {
        let m = MetricMatrix::from_fn(labels(2), MetricKind::H, |_, _| 2.5).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"labels":["p0","p1"],"matrix":[[0.0,2.5],[2.5,0.0]],"kind":"h"}"#);
        let back: MetricMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
