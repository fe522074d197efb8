//! Gromov products, four-point hyperbolicity and related estimates.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyper::QhGraph;
use crate::metric::MetricMatrix;
use crate::space::SampledSpace;

/// `(x|y)_w = (d(x,w) + d(y,w) - d(x,y)) / 2` on matrix indices.
#[inline]
pub fn product(m: &MetricMatrix, x: usize, y: usize, w: usize) -> f64 {
    0.5 * (m.get(x, w) + m.get(y, w) - m.get(x, y))
}

/// Gromov product of labels `x`, `y` based at `w`.
pub fn gromov_product(m: &MetricMatrix, x: &str, y: &str, w: &str) -> Result<f64> {
    Ok(product(m, m.index_of(x)?, m.index_of(y)?, m.index_of(w)?))
}

/// Closed form of the Gromov product of `h` on interior points (global indices):
///
/// `(x|y)_w = log([d(w,x) + max(d(w),d(x))][d(w,y) + max(d(w),d(y))]
///              / (d(w) [d(x,y) + max(d(x),d(y))]))`.
pub fn h_product_closed_form(space: &SampledSpace, x: usize, y: usize, w: usize) -> f64 {
    let bd = space.bdist();
    let (dx, dy, dw) = (bd[x], bd[y], bd[w]);
    let a = space.dist(w, x) + dw.max(dx);
    let b = space.dist(w, y) + dw.max(dy);
    let c = space.dist(x, y) + dx.max(dy);
    (a / dw).ln() + (b / c).ln()
}

/// How to scan quadruples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DeltaMode {
    Exhaustive,
    Sampled { budget: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub delta: f64,
    /// `[x, y, z, w]` attaining the maximum, when it is positive.
    pub witness: Option<[String; 4]>,
    /// Number of (base point, triple) configurations evaluated.
    pub evaluated: u64,
    pub exhaustive: bool,
    pub seed: Option<u64>,
}

/// Excess of a triple at a base point: with the three products sorted, the
/// four-point condition fails by `middle - smallest`.
#[inline]
fn triple_excess(m: &MetricMatrix, a: usize, b: usize, c: usize, w: usize) -> (f64, [usize; 4]) {
    let pab = product(m, a, b, w);
    let pac = product(m, a, c, w);
    let pbc = product(m, b, c, w);
    // The pair with the smallest product plays (x, y); the third point is z.
    let (lo, mid, quad) = if pab <= pac && pab <= pbc {
        (pab, pac.min(pbc), [a, b, c, w])
    } else if pac <= pbc {
        (pac, pab.min(pbc), [a, c, b, w])
    } else {
        (pbc, pab.min(pac), [b, c, a, w])
    };
    (mid - lo, quad)
}

fn choose3(n: u64) -> u64 {
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

/// Four-point constant `max[min((x|z)_w, (z|y)_w) - (x|y)_w]`, clamped at zero.
///
/// Quadruples with a repeated point never contribute a positive value, so the
/// exhaustive scan visits each base point with each triple of the other points
/// once. In sampled mode a budget covering every configuration falls back to
/// the exhaustive scan.
pub fn delta_hyperbolicity(m: &MetricMatrix, mode: DeltaMode) -> Result<DeltaReport> {
    let n = m.n();
    let total = n as u64 * choose3(n.saturating_sub(1) as u64);
    let (best, evaluated, exhaustive, seed) = match mode {
        DeltaMode::Sampled { budget, seed } if budget < total => {
            if budget == 0 {
                return Err(Error::EmptyBudget);
            }
            let mut rng = crate::rng(seed);
            let draws: Vec<[usize; 4]> = (0..budget)
                .map(|_| loop {
                    let q = [
                        rng.random_range(0..n),
                        rng.random_range(0..n),
                        rng.random_range(0..n),
                        rng.random_range(0..n),
                    ];
                    if q[0] != q[1] && q[0] != q[2] && q[0] != q[3] && q[1] != q[2] && q[1] != q[3] && q[2] != q[3] {
                        break q;
                    }
                })
                .collect();
            let best = draws
                .par_iter()
                .map(|q| triple_excess(m, q[0], q[1], q[2], q[3]))
                .reduce(|| (f64::NEG_INFINITY, [0; 4]), pick);
            (best, budget, false, Some(seed))
        }
        _ => {
            let best = (0..n)
                .into_par_iter()
                .map(|w| {
                    let mut best = (f64::NEG_INFINITY, [0; 4]);
                    for a in 0..n {
                        if a == w {
                            continue;
                        }
                        for b in (a + 1)..n {
                            if b == w {
                                continue;
                            }
                            for c in (b + 1)..n {
                                if c == w {
                                    continue;
                                }
                                best = pick(best, triple_excess(m, a, b, c, w));
                            }
                        }
                    }
                    best
                })
                .reduce(|| (f64::NEG_INFINITY, [0; 4]), pick);
            (best, total, true, None)
        }
    };
    let (delta, witness) = if best.0 > 0.0 {
        (best.0, Some(best.1.map(|i| m.labels()[i].clone())))
    } else {
        (0.0, None)
    };
    Ok(DeltaReport {
        delta,
        witness,
        evaluated,
        exhaustive,
        seed,
    })
}

fn pick(a: (f64, [usize; 4]), b: (f64, [usize; 4])) -> (f64, [usize; 4]) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoughSimilarityReport {
    pub lambda: f64,
    /// `max |M2(x,y) - lambda M1(x,y)|`.
    pub mu: f64,
    /// Pair attaining `mu`.
    pub witness: Option<[String; 2]>,
}

/// Smallest additive constant `mu` with `|M2 - lambda M1| <= mu` on all pairs.
///
/// Without a hint, `lambda` minimises `mu`; the objective is convex in
/// `lambda`, so a golden-section search over a bracket containing every
/// pairwise ratio finds it.
pub fn rough_similarity_check(
    m1: &MetricMatrix,
    m2: &MetricMatrix,
    lambda_hint: Option<f64>,
) -> Result<RoughSimilarityReport> {
    if m1.labels() != m2.labels() {
        return Err(Error::LabelMismatch("rough similarity needs identical label lists".into()));
    }
    let n = m1.n();
    let mu_of = |lambda: f64| -> (f64, usize, usize) {
        let mut best = (0.0, 0, 0);
        for i in 0..n {
            for j in (i + 1)..n {
                let e = (m2.get(i, j) - lambda * m1.get(i, j)).abs();
                if e > best.0 {
                    best = (e, i, j);
                }
            }
        }
        best
    };
    let lambda = match lambda_hint {
        Some(l) => l,
        None => {
            let hi = (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .filter(|&(i, j)| m1.get(i, j) > 0.0)
                .map(|(i, j)| m2.get(i, j) / m1.get(i, j))
                .fold(1.0, f64::max);
            crate::numeric::golden_min(|l| mu_of(l).0, 0.0, hi, 1e-12)
        }
    };
    let (mu, i, j) = mu_of(lambda);
    Ok(RoughSimilarityReport {
        lambda,
        mu,
        witness: (n > 1).then(|| [m1.labels()[i].clone(), m1.labels()[j].clone()]),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardEstimateReport {
    pub triples: usize,
    pub delta: f64,
    pub epsilon: f64,
    /// `max[k(p, alpha) - 2 delta - epsilon - (x|y)_p]`; non-positive when the
    /// lower bound holds.
    pub lower_excess: f64,
    /// `max[(x|y)_p - k(p, alpha) - epsilon/2]`.
    pub upper_excess: f64,
}

/// Slack of the standard estimate for one triple and a given path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardEstimate {
    /// Graph distance from `p` to the path.
    pub to_path: f64,
    pub product: f64,
    /// `(x|y)_p - (k(p, alpha) - 2 delta - epsilon)`.
    pub lower_slack: f64,
    /// `k(p, alpha) + epsilon/2 - (x|y)_p`.
    pub upper_slack: f64,
    pub holds: bool,
}

/// Checks `k(p,alpha) - 2 delta - eps <= (x|y)_p <= k(p,alpha) + eps/2` for an
/// `eps`-short path of graph nodes from `x` to `y`.
pub fn standard_estimate_single<S: AsRef<str>>(
    graph: &QhGraph,
    p: &str,
    path: &[S],
    delta: f64,
    epsilon: f64,
) -> Result<StandardEstimate> {
    let short = crate::hyper::epsilon_short_check(graph, path, epsilon)?;
    if !short.is_short {
        return Err(Error::InvalidPath(format!(
            "path exceeds the geodesic distance by {} > {}",
            short.slack, epsilon
        )));
    }
    let find = |l: &str| {
        graph
            .labels()
            .iter()
            .position(|x| x == l)
            .ok_or_else(|| Error::UnknownLabel(l.to_string()))
    };
    let pi = find(p)?;
    let idx = path.iter().map(|l| find(l.as_ref())).collect::<Result<Vec<_>>>()?;
    let dp = graph.dijkstra(pi).0;
    let (x, y) = (idx[0], *idx.last().unwrap());
    let to_path = idx.iter().map(|&z| dp[z]).fold(f64::INFINITY, f64::min);
    let product = 0.5 * (dp[x] + dp[y] - short.distance);
    let lower_slack = product - (to_path - 2.0 * delta - epsilon);
    let upper_slack = to_path + 0.5 * epsilon - product;
    Ok(StandardEstimate {
        to_path,
        product,
        lower_slack,
        upper_slack,
        holds: lower_slack >= 0.0 && upper_slack >= 0.0,
    })
}

/// Compares `(x|y)_p` with the graph distance from `p` to a geodesic `alpha`
/// from `x` to `y`, for random interior triples.
///
/// The geodesic is a shortest graph path, so it is `epsilon`-short for every
/// `epsilon >= 0`.
pub fn standard_estimate_check(
    graph: &QhGraph,
    triples: usize,
    delta: f64,
    epsilon: f64,
    seed: u64,
) -> Result<StandardEstimateReport> {
    let n = graph.n();
    if triples == 0 {
        return Err(Error::EmptyBudget);
    }
    if n < 3 {
        return Err(Error::Degenerate("need at least three nodes".into()));
    }
    let mut rng = crate::rng(seed);
    let picks: Vec<[usize; 3]> = (0..triples)
        .map(|_| loop {
            let t = [rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n)];
            if t[0] != t[1] && t[0] != t[2] && t[1] != t[2] {
                break t;
            }
        })
        .collect();
    let (lower_excess, upper_excess) = picks
        .par_iter()
        .map(|&[x, y, p]| {
            let (dx, pred) = graph.dijkstra(x);
            let dp = graph.dijkstra(p).0;
            let path = crate::hyper::path_from_pred(&pred, x, y);
            let to_alpha = path.iter().map(|&z| dp[z]).fold(f64::INFINITY, f64::min);
            let gp = 0.5 * (dp[x] + dp[y] - dx[y]);
            (
                to_alpha - 2.0 * delta - epsilon - gp,
                gp - to_alpha - 0.5 * epsilon,
            )
        })
        .reduce(
            || (f64::NEG_INFINITY, f64::NEG_INFINITY),
            |a, b| (a.0.max(b.0), a.1.max(b.1)),
        );
    Ok(StandardEstimateReport {
        triples,
        delta,
        epsilon,
        lower_excess,
        upper_excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricKind;

    fn matrix(pts: &[[f64; 2]]) -> MetricMatrix {
        let labels = (0..pts.len()).map(|i| format!("p{i}")).collect();
        MetricMatrix::from_fn(labels, MetricKind::D, |i, j| {
            (pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1])
        })
        .unwrap()
    }

    #[test]
    fn unit_square() {
        let m = matrix(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let r = delta_hyperbolicity(&m, DeltaMode::Exhaustive).unwrap();
        assert!((r.delta - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        assert_eq!(r.evaluated, 4);
    }

    #[test]
    fn tree_metric_is_zero_hyperbolic() {
        // Star with leaves at distance 1 from a hub.
        let labels = (0..5).map(|i| format!("v{i}")).collect();
        let m = MetricMatrix::from_fn(labels, MetricKind::Custom, |i, j| {
            if i == 0 || j == 0 {
                1.0
            } else {
                2.0
            }
        })
        .unwrap();
        assert_eq!(delta_hyperbolicity(&m, DeltaMode::Exhaustive).unwrap().delta, 0.0);
    }

    #[test]
    fn sampled_with_large_budget_is_exhaustive() {
        let m = matrix(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.3, 0.2]]);
        let s = delta_hyperbolicity(&m, DeltaMode::Sampled { budget: 10_000, seed: 3 }).unwrap();
        let e = delta_hyperbolicity(&m, DeltaMode::Exhaustive).unwrap();
        assert!(s.exhaustive);
        assert_eq!(s.delta, e.delta);
    }

    #[test]
    fn rough_similarity_recovers_scale() {
        let m = matrix(&[[0.0, 0.0], [1.0, 0.0], [3.0, 1.0], [0.0, 2.0]]);
        let r = rough_similarity_check(&m, &m.scaled(3.0), None).unwrap();
        assert!((r.lambda - 3.0).abs() < 1e-9);
        assert!(r.mu < 1e-8);
    }
}
