use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{MetricKind, MetricMatrix};
use crate::space::{Geometry, SampledSpace};

/// Graph approximation of the quasihyperbolic metric on the interior points.
///
/// Two points are joined when `d(x,y) <= sigma * min(d(x), d(y))`, with weight
/// `2 d(x,y) / (d(x) + d(y))`, the trapezoid estimate of the integral of
/// `1/d` along the segment.
#[derive(Debug)]
pub struct QhGraph {
    labels: Vec<String>,
    adj: Vec<Vec<(u32, f64)>>,
    sigma: f64,
    apsp: OnceLock<MetricMatrix>,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, u32);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Serialize)]
struct GraphRepr<'a> {
    sigma: f64,
    nodes: &'a [String],
    edges: Vec<(&'a str, &'a str, f64)>,
}

impl QhGraph {
    /// Builds the graph; fails with [`Error::InsufficientSampling`] when it is
    /// disconnected.
    pub fn new(space: &SampledSpace, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::Parameter(format!("sigma must lie in (0, 1), got {sigma}")));
        }
        let n = space.n_interior();
        let bd = space.bdist();
        let admit = |i: usize, j: usize| -> Option<f64> {
            let d = space.dist(i, j);
            (d <= sigma * bd[i].min(bd[j])).then(|| 2.0 * d / (bd[i] + bd[j]))
        };
        let edges: Vec<Vec<(u32, f64)>> = match space.geometry() {
            Geometry::Euclidean => {
                let x0 = |i: usize| space.coords(i).unwrap()[0];
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| x0(a).total_cmp(&x0(b)));
                let mut rank = vec![0usize; n];
                for (r, &i) in order.iter().enumerate() {
                    rank[i] = r;
                }
                (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let reach = sigma * bd[i];
                        let xi = x0(i);
                        let mut out = Vec::new();
                        for &j in &order[rank[i] + 1..] {
                            if x0(j) - xi > reach {
                                break;
                            }
                            if let Some(w) = admit(i, j) {
                                out.push((j as u32, w));
                            }
                        }
                        for &j in order[..rank[i]].iter().rev() {
                            if xi - x0(j) > reach {
                                break;
                            }
                            if let Some(w) = admit(i, j) {
                                out.push((j as u32, w));
                            }
                        }
                        out
                    })
                    .collect()
            }
            Geometry::Table { .. } => (0..n)
                .into_par_iter()
                .map(|i| {
                    (0..n)
                        .filter(|&j| j != i)
                        .filter_map(|j| admit(i, j).map(|w| (j as u32, w)))
                        .collect()
                })
                .collect(),
        };
        let mut adj = edges;
        for list in &mut adj {
            list.sort_by_key(|e| e.0);
        }
        let graph = Self {
            labels: space.interior_labels(),
            adj,
            sigma,
            apsp: OnceLock::new(),
        };
        let comps = graph.components();
        if comps.len() > 1 {
            let named = comps
                .into_iter()
                .map(|c| c.into_iter().map(|i| graph.labels[i].clone()).collect())
                .collect();
            return Err(Error::InsufficientSampling(named));
        }
        Ok(graph)
    }

    fn components(&self) -> Vec<Vec<usize>> {
        let n = self.labels.len();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut stack = vec![s];
            seen[s] = true;
            let mut comp = Vec::new();
            while let Some(u) = stack.pop() {
                comp.push(u);
                for &(v, _) in &self.adj[u] {
                    if !seen[v as usize] {
                        seen[v as usize] = true;
                        stack.push(v as usize);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps.sort_by_key(|c| std::cmp::Reverse(c.len()));
        comps
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, i: usize) -> &[(u32, f64)] {
        &self.adj[i]
    }

    /// Weight of the edge `i -- j`, if present.
    pub fn edge_weight(&self, i: usize, j: usize) -> Option<f64> {
        self.adj[i]
            .binary_search_by_key(&(j as u32), |e| e.0)
            .ok()
            .map(|k| self.adj[i][k].1)
    }

    /// Single-source shortest path distances and predecessors.
    pub fn dijkstra(&self, src: usize) -> (Vec<f64>, Vec<u32>) {
        let n = self.n();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![u32::MAX; n];
        let mut heap = BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(Entry(0.0, src as u32));
        while let Some(Entry(du, u)) = heap.pop() {
            let u = u as usize;
            if du > dist[u] {
                continue;
            }
            for &(v, w) in &self.adj[u] {
                let nd = du + w;
                if nd < dist[v as usize] {
                    dist[v as usize] = nd;
                    pred[v as usize] = u as u32;
                    heap.push(Entry(nd, v));
                }
            }
        }
        (dist, pred)
    }

    /// Shortest path distances from each source to every node.
    pub fn distances_from(&self, sources: &[usize]) -> Vec<Vec<f64>> {
        sources.par_iter().map(|&s| self.dijkstra(s).0).collect()
    }

    /// Graph distances restricted to the given node set.
    pub fn k_matrix(&self, idx: &[usize]) -> MetricMatrix {
        let rows = self.distances_from(idx);
        let labels = idx.iter().map(|&i| self.labels[i].clone()).collect();
        let m = idx.len();
        let mut values = vec![0.0; m * m];
        for a in 0..m {
            for b in 0..m {
                // Symmetrise: the two directions agree up to summation order.
                values[a * m + b] = if a == b {
                    0.0
                } else {
                    rows[a.min(b)][idx[a.max(b)]]
                };
            }
        }
        MetricMatrix::new(labels, values, MetricKind::KGraph).expect("unique labels")
    }

    /// All-pairs graph distances, computed once on first use.
    pub fn apsp(&self) -> &MetricMatrix {
        self.apsp.get_or_init(|| {
            let all: Vec<usize> = (0..self.n()).collect();
            self.k_matrix(&all)
        })
    }

    /// Node sequence of a shortest path from `src` to `dst`.
    pub fn shortest_path(&self, src: usize, dst: usize) -> Vec<usize> {
        let (_, pred) = self.dijkstra(src);
        path_from_pred(&pred, src, dst)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut edges = Vec::with_capacity(self.edge_count());
        for (i, list) in self.adj.iter().enumerate() {
            for &(j, w) in list {
                if (j as usize) > i {
                    edges.push((self.labels[i].as_str(), self.labels[j as usize].as_str(), w));
                }
            }
        }
        serde_json::to_value(GraphRepr {
            sigma: self.sigma,
            nodes: &self.labels,
            edges,
        })
        .expect("serialisable")
    }
}

pub(crate) fn path_from_pred(pred: &[u32], src: usize, dst: usize) -> Vec<usize> {
    let mut path = vec![dst];
    let mut cur = dst;
    while cur != src {
        cur = pred[cur] as usize;
        path.push(cur);
    }
    path.reverse();
    path
}

/// Outcome of [`epsilon_short_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShortReport {
    pub length: f64,
    pub distance: f64,
    /// `length - distance`.
    pub slack: f64,
    pub epsilon: f64,
    pub is_short: bool,
}

/// Checks whether a path of graph nodes is `epsilon`-short, that is whether its
/// length exceeds the graph distance between its endpoints by at most `epsilon`.
pub fn epsilon_short_check<S: AsRef<str>>(graph: &QhGraph, path: &[S], epsilon: f64) -> Result<ShortReport> {
    if path.is_empty() {
        return Err(Error::InvalidPath("empty path".into()));
    }
    let idx = path
        .iter()
        .map(|l| {
            graph
                .labels
                .iter()
                .position(|x| x == l.as_ref())
                .ok_or_else(|| Error::InvalidPath(format!("{} is not a graph node", l.as_ref())))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut length = 0.0;
    for w in idx.windows(2) {
        length += graph.edge_weight(w[0], w[1]).ok_or_else(|| {
            Error::InvalidPath(format!(
                "{} and {} are not adjacent",
                graph.labels[w[0]], graph.labels[w[1]]
            ))
        })?;
    }
    let distance = graph.dijkstra(idx[0]).0[*idx.last().unwrap()];
    let slack = length - distance;
    Ok(ShortReport {
        length,
        distance,
        slack,
        epsilon,
        is_short: slack <= epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use crate::space::Site;

    fn vertical_fiber(ratio: f64, top: f64) -> SampledSpace {
        let mut pts = Vec::new();
        let mut y = 1.0;
        let mut i = 0;
        while y <= top * (1.0 + 1e-12) {
            pts.push(Site::new(format!("v{i}"), vec![0.0, y]));
            y *= ratio;
            i += 1;
        }
        SampledSpace::euclidean(pts, vec![], Some(Domain::HalfPlane), true).unwrap()
    }

    #[test]
    fn fiber_length_matches_log() {
        let s = vertical_fiber(1.05, 1.05f64.powi(20));
        let g = QhGraph::new(&s, 0.1).unwrap();
        let k = g.apsp().get(0, 20);
        // Each step contributes 2 (r - 1) / (r + 1), close to log r.
        let step = 2.0 * 0.05 / 2.05;
        assert!((k - 20.0 * step).abs() < 1e-12);
        assert!((k - 20.0 * 1.05f64.ln()).abs() < 0.01);
    }

    #[test]
    fn disconnected_names_components() {
        let s = SampledSpace::euclidean(
            vec![Site::new("a", vec![0.0, 1.0]), Site::new("b", vec![5.0, 1.0])],
            vec![],
            Some(Domain::HalfPlane),
            true,
        )
        .unwrap();
        match QhGraph::new(&s, 0.1) {
            Err(Error::InsufficientSampling(c)) => {
                assert_eq!(c.len(), 2);
                assert!(format!("{}", Error::InsufficientSampling(c)).contains("a"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn short_check() {
        let s = vertical_fiber(1.05, 1.05f64.powi(4));
        let g = QhGraph::new(&s, 0.1).unwrap();
        let r = epsilon_short_check(&g, &["v0", "v1", "v2"], 1e-12).unwrap();
        assert!(r.is_short);
        let r = epsilon_short_check(&g, &["v0", "v1", "v0", "v1", "v2"], 0.05).unwrap();
        assert!(!r.is_short);
        assert!(epsilon_short_check(&g, &["v0", "v4"], 1.0).is_err());
    }
}
