//! Analytic planar domains with exact boundary distances.

use serde::{Deserialize, Serialize};

/// A planar domain whose boundary distance is known in closed form (or by a
/// one-dimensional minimisation for the cusp).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// `{x2 > 0}`, boundary the real line.
    HalfPlane,
    /// The plane minus the origin.
    PuncturedPlane,
    /// `{|x| > 1}`.
    ExteriorDisk,
    /// The plane minus the ray `{x2 = 0, x1 <= 0}`.
    SlitPlane,
    /// `{0 < x2 < x1^2, 0 < x1 < 1}`, bounded with an outward cusp at the origin.
    Cusp,
}

impl Domain {
    pub fn is_unbounded(self) -> bool {
        !matches!(self, Domain::Cusp)
    }

    pub fn name(self) -> &'static str {
        match self {
            Domain::HalfPlane => "half_plane",
            Domain::PuncturedPlane => "punctured_plane",
            Domain::ExteriorDisk => "exterior_disk",
            Domain::SlitPlane => "slit_plane",
            Domain::Cusp => "cusp",
        }
    }

    pub fn contains(self, p: [f64; 2]) -> bool {
        let [x, y] = p;
        match self {
            Domain::HalfPlane => y > 0.0,
            Domain::PuncturedPlane => x != 0.0 || y != 0.0,
            Domain::ExteriorDisk => x.hypot(y) > 1.0,
            Domain::SlitPlane => !(y == 0.0 && x <= 0.0),
            Domain::Cusp => x > 0.0 && x < 1.0 && y > 0.0 && y < x * x,
        }
    }

    /// Euclidean distance from `p` to the boundary.
    pub fn boundary_distance(self, p: [f64; 2]) -> f64 {
        let [x, y] = p;
        match self {
            Domain::HalfPlane => y.abs(),
            Domain::PuncturedPlane => x.hypot(y),
            Domain::ExteriorDisk => (x.hypot(y) - 1.0).abs(),
            Domain::SlitPlane => {
                if x <= 0.0 {
                    y.abs()
                } else {
                    x.hypot(y)
                }
            }
            Domain::Cusp => cusp_boundary_distance(p),
        }
    }

    /// Unit vector pointing into the domain at the boundary point `b`.
    pub fn inward_normal(self, b: [f64; 2]) -> [f64; 2] {
        match self {
            Domain::HalfPlane | Domain::SlitPlane => [0.0, 1.0],
            Domain::PuncturedPlane => [1.0, 0.0],
            Domain::ExteriorDisk => {
                let r = b[0].hypot(b[1]);
                if r == 0.0 {
                    [1.0, 0.0]
                } else {
                    [b[0] / r, b[1] / r]
                }
            }
            Domain::Cusp => {
                let [x, y] = b;
                if (x - 1.0).abs() < 1e-12 {
                    [-1.0, 0.0]
                } else if y.abs() < 1e-12 {
                    [0.0, 1.0]
                } else {
                    let n = [2.0 * x, -1.0];
                    let r = n[0].hypot(n[1]);
                    [n[0] / r, n[1] / r]
                }
            }
        }
    }

    /// Direction along which anchor sequences escape to infinity.
    pub fn escape_direction(self) -> [f64; 2] {
        match self {
            Domain::HalfPlane => [0.0, 1.0],
            _ => [1.0, 0.0],
        }
    }
}

fn seg_dist(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    (p[0] - a[0] - t * d[0]).hypot(p[1] - a[1] - t * d[1])
}

/// Distance from `p` to the arc `{(t, t^2) : 0 <= t <= 1}`.
///
/// Stationary points solve `2t^3 + (1 - 2b)t - a = 0`; the cubic is monotone
/// or has one interior critical point, so bisection on each monotone piece
/// finds every root.
pub(crate) fn parabola_distance(p: [f64; 2]) -> f64 {
    let [a, b] = p;
    let f = |t: f64| (t - a).hypot(t * t - b);
    let g = |t: f64| 2.0 * t * t * t + (1.0 - 2.0 * b) * t - a;
    let mut best = f(0.0).min(f(1.0));
    let mut pieces = vec![(0.0, 1.0)];
    if 1.0 - 2.0 * b < 0.0 {
        let tc = ((2.0 * b - 1.0) / 6.0).sqrt();
        if tc < 1.0 {
            pieces = vec![(0.0, tc), (tc, 1.0)];
        }
    }
    for (mut lo, mut hi) in pieces {
        let (glo, ghi) = (g(lo), g(hi));
        if glo == 0.0 {
            best = best.min(f(lo));
        }
        if glo.signum() == ghi.signum() {
            continue;
        }
        let rising = ghi > glo;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (g(mid) < 0.0) == rising {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-16 {
                break;
            }
        }
        best = best.min(f(0.5 * (lo + hi)));
    }
    best
}

fn cusp_boundary_distance(p: [f64; 2]) -> f64 {
    let bottom = seg_dist(p, [0.0, 0.0], [1.0, 0.0]);
    let right = seg_dist(p, [1.0, 0.0], [1.0, 1.0]);
    bottom.min(right).min(parabola_distance(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(Domain::HalfPlane.boundary_distance([3.0, 0.25]), 0.25);
        assert_eq!(Domain::PuncturedPlane.boundary_distance([3.0, 4.0]), 5.0);
        assert_eq!(Domain::ExteriorDisk.boundary_distance([0.0, 3.0]), 2.0);
        assert_eq!(Domain::SlitPlane.boundary_distance([-2.0, 0.5]), 0.5);
        assert_eq!(Domain::SlitPlane.boundary_distance([3.0, 4.0]), 5.0);
    }

    #[test]
    fn cusp_matches_dense_sampling() {
        let mut arcs = Vec::new();
        let m = 10_000;
        for i in 0..=m {
            let t = i as f64 / m as f64;
            arcs.push([t, 0.0]);
            arcs.push([1.0, t]);
            arcs.push([t, t * t]);
        }
        for &p in &[[0.5, 0.1], [0.9, 0.5], [0.2, 0.02], [0.7, 0.3], [0.05, 0.001]] {
            assert!(Domain::Cusp.contains(p));
            let oracle = arcs
                .iter()
                .map(|q| (p[0] - q[0]).hypot(p[1] - q[1]))
                .fold(f64::INFINITY, f64::min);
            let exact = Domain::Cusp.boundary_distance(p);
            assert!(exact <= oracle + 1e-12);
            assert!(oracle - exact < 2e-4, "{p:?}: {exact} vs {oracle}");
        }
    }
}
