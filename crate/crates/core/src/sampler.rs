//! Deterministic samplers for the planar test families.

use std::f64::consts::{LN_2, TAU};
use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::space::{SampledSpace, Site};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    HalfPlane,
    PuncturedPlane,
    ExteriorDisk,
    SlitPlane,
    CuspDomain,
    CustomCloud,
}

impl Family {
    pub fn domain(self) -> Option<Domain> {
        match self {
            Family::HalfPlane => Some(Domain::HalfPlane),
            Family::PuncturedPlane => Some(Domain::PuncturedPlane),
            Family::ExteriorDisk => Some(Domain::ExteriorDisk),
            Family::SlitPlane => Some(Domain::SlitPlane),
            Family::CuspDomain => Some(Domain::Cusp),
            Family::CustomCloud => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::HalfPlane => "half_plane",
            Family::PuncturedPlane => "punctured_plane",
            Family::ExteriorDisk => "exterior_disk",
            Family::SlitPlane => "slit_plane",
            Family::CuspDomain => "cusp_domain",
            Family::CustomCloud => "custom_cloud",
        }
    }

    /// The four unbounded analytic families.
    pub const UNBOUNDED: [Family; 4] = [
        Family::HalfPlane,
        Family::PuncturedPlane,
        Family::ExteriorDisk,
        Family::SlitPlane,
    ];
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Parameter(format!("unknown family {s}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Grading {
    #[default]
    Uniform,
    /// Denser towards the boundary, with spacing proportional to the boundary
    /// distance.
    BoundaryGraded,
}

fn default_extent() -> f64 {
    4.0
}

fn default_resolution() -> f64 {
    0.1
}

fn default_depth() -> u32 {
    12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub family: Family,
    pub n_interior: usize,
    pub n_boundary: usize,
    /// Size of the sampled window.
    #[serde(default = "default_extent")]
    pub extent: f64,
    pub seed: u64,
    #[serde(default)]
    pub grading: Grading,
    /// Spacing of graded samples relative to the boundary distance.
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    /// Graded samples reach boundary distance `extent 2^-depth`.
    #[serde(default = "default_depth")]
    pub depth: u32,
    /// Point cloud file for [`Family::CustomCloud`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cloud: Option<PathBuf>,
}

impl SamplerSpec {
    pub fn new(family: Family, n_interior: usize, n_boundary: usize, seed: u64) -> Self {
        Self {
            family,
            n_interior,
            n_boundary,
            extent: default_extent(),
            seed,
            grading: Grading::Uniform,
            resolution: default_resolution(),
            depth: default_depth(),
            cloud: None,
        }
    }

    pub fn graded(mut self, resolution: f64) -> Self {
        self.grading = Grading::BoundaryGraded;
        self.resolution = resolution;
        self
    }

    pub fn with_extent(mut self, extent: f64) -> Self {
        self.extent = extent;
        self
    }

    pub fn with_depth(mut self, depth: u32) -> Self {
        self.depth = depth;
        self
    }
}

/// Draws a sample according to `spec`. Equal specs give identical samples.
pub fn sample(spec: &SamplerSpec) -> Result<SampledSpace> {
    if spec.family == Family::CustomCloud {
        let path = spec
            .cloud
            .as_ref()
            .ok_or_else(|| Error::Parameter("custom_cloud needs a point cloud file".into()))?;
        return crate::io::load_space(path);
    }
    if spec.n_interior == 0 {
        return Err(Error::EmptyBudget);
    }
    if spec.n_interior < 4 {
        return Err(Error::Parameter("a sample needs at least four interior points".into()));
    }
    if !(spec.extent > 0.0 && spec.extent.is_finite()) {
        return Err(Error::Parameter(format!("extent must be positive, got {}", spec.extent)));
    }
    if spec.family == Family::ExteriorDisk && spec.extent <= 1.0 {
        return Err(Error::Parameter("the exterior disk needs extent > 1".into()));
    }
    if !(spec.resolution > 0.0 && spec.resolution < 1.0) {
        return Err(Error::Parameter("resolution must lie in (0, 1)".into()));
    }
    let dom = spec.family.domain().expect("analytic family");
    let mut rng = crate::rng(spec.seed);
    let boundary = boundary_samples(spec, &mut rng);
    let pts = match (spec.grading, spec.family) {
        (Grading::Uniform, _) => (0..spec.n_interior)
            .map(|_| uniform_point(spec, &mut rng))
            .collect(),
        (Grading::BoundaryGraded, Family::HalfPlane) => graded_half_plane(spec, &boundary, &mut rng)?,
        (Grading::BoundaryGraded, Family::CuspDomain) => graded_cusp(spec),
        (Grading::BoundaryGraded, _) => (0..spec.n_interior)
            .map(|_| graded_point(spec, dom, &mut rng))
            .collect(),
    };
    let interior = pts
        .into_iter()
        .enumerate()
        .map(|(i, p)| Site::new(format!("x{i}"), p.to_vec()))
        .collect();
    let boundary = boundary
        .into_iter()
        .enumerate()
        .map(|(i, p)| Site::new(format!("b{i}"), p.to_vec()))
        .collect();
    SampledSpace::euclidean(interior, boundary, Some(dom), dom.is_unbounded())
}

/// Evenly spaced positions in `[lo, hi]` with jitter of a quarter spacing.
fn jittered(n: usize, lo: f64, hi: f64, rng: &mut crate::Rng) -> Vec<f64> {
    let h = (hi - lo) / n as f64;
    (0..n)
        .map(|k| lo + (k as f64 + 0.5 + rng.random_range(-0.25..0.25)) * h)
        .collect()
}

fn boundary_samples(spec: &SamplerSpec, rng: &mut crate::Rng) -> Vec<[f64; 2]> {
    let e = spec.extent;
    let n = spec.n_boundary;
    match spec.family {
        Family::HalfPlane => jittered(n, -e, e, rng).into_iter().map(|x| [x, 0.0]).collect(),
        Family::PuncturedPlane => {
            if n > 1 {
                log::warn!("the punctured plane has a single finite boundary point");
            }
            if n == 0 {
                vec![]
            } else {
                vec![[0.0, 0.0]]
            }
        }
        Family::ExteriorDisk => jittered(n, 0.0, TAU, rng)
            .into_iter()
            .map(|t| [t.cos(), t.sin()])
            .collect(),
        Family::SlitPlane => jittered(n, -e, 0.0, rng).into_iter().map(|x| [x, 0.0]).collect(),
        Family::CuspDomain => jittered(n, 0.0, 3.0, rng)
            .into_iter()
            .map(|s| {
                if s < 1.0 {
                    [s, 0.0]
                } else if s < 2.0 {
                    [1.0, s - 1.0]
                } else {
                    let t = 3.0 - s;
                    [t, t * t]
                }
            })
            .collect(),
        Family::CustomCloud => unreachable!(),
    }
}

fn uniform_point(spec: &SamplerSpec, rng: &mut crate::Rng) -> [f64; 2] {
    let e = spec.extent;
    loop {
        let p = match spec.family {
            Family::HalfPlane => [rng.random_range(-e..e), e * (1.0 - rng.random::<f64>())],
            Family::PuncturedPlane | Family::SlitPlane => {
                let r = e * rng.random::<f64>().sqrt();
                let t = rng.random_range(0.0..TAU);
                [r * t.cos(), r * t.sin()]
            }
            Family::ExteriorDisk => {
                let r = (1.0 + rng.random::<f64>() * (e * e - 1.0)).sqrt();
                let t = rng.random_range(0.0..TAU);
                [r * t.cos(), r * t.sin()]
            }
            Family::CuspDomain => [rng.random::<f64>(), rng.random::<f64>()],
            Family::CustomCloud => unreachable!(),
        };
        let dom = spec.family.domain().unwrap();
        if dom.contains(p) && dom.boundary_distance(p) > 0.0 {
            return p;
        }
    }
}

/// Points whose boundary distance is log-uniform in `[extent 2^-depth, extent]`.
fn graded_point(spec: &SamplerSpec, dom: Domain, rng: &mut crate::Rng) -> [f64; 2] {
    let e = spec.extent;
    let lo = (e * 2f64.powi(-(spec.depth as i32))).ln();
    loop {
        let t = rng.random_range(lo..e.ln()).exp();
        let p = match spec.family {
            Family::PuncturedPlane => {
                let a = rng.random_range(0.0..TAU);
                [t * a.cos(), t * a.sin()]
            }
            Family::ExteriorDisk => {
                let a = rng.random_range(0.0..TAU);
                let r = 1.0 + t * (e - 1.0) / e;
                [r * a.cos(), r * a.sin()]
            }
            Family::SlitPlane => {
                let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                [rng.random_range(-e..e), s * t]
            }
            _ => unreachable!(),
        };
        if dom.contains(p) {
            return p;
        }
    }
}

/// Number of geometric steps per doubling with step ratio at most `1 + res`.
pub fn ladder_steps(res: f64) -> usize {
    (LN_2 / res.ln_1p()).ceil() as usize
}

/// Height `2^(m / steps)`, exact at integer powers of two.
pub fn ladder_height(m: i64, steps: usize) -> f64 {
    let k = steps as i64;
    2f64.powi(m.div_euclid(k) as i32) * 2f64.powf(m.rem_euclid(k) as f64 / steps as f64)
}

/// Whitney-type net of the half-plane window plus vertical fibers.
///
/// Heights follow the ladder `2^(m/K)` with `2^(1/K) <= 1 + res`. Fibers run
/// above each boundary sample and above `x1 = 0` from `extent 2^-depth` to the
/// top height `2^ceil(log2(4 extent))`. The remaining budget fills rows of the
/// net from the top down, each row spaced `res y` apart with a random phase.
fn graded_half_plane(spec: &SamplerSpec, boundary: &[[f64; 2]], rng: &mut crate::Rng) -> Result<Vec<[f64; 2]>> {
    let e = spec.extent;
    let res = spec.resolution;
    let k = ladder_steps(res);
    let top_exp = (4.0 * e).log2().ceil() as i64;
    let m_top = top_exp * k as i64;
    let m_floor = ((e.log2() - spec.depth as f64) * k as f64).floor() as i64;
    let mut columns: Vec<f64> = vec![0.0];
    for b in boundary {
        if b[0].abs() > 1e-12 {
            columns.push(b[0]);
        }
    }
    let mut pts: Vec<[f64; 2]> = Vec::new();
    for &x in &columns {
        for m in m_floor..=m_top {
            pts.push([x, ladder_height(m, k)]);
        }
    }
    if pts.len() > spec.n_interior {
        return Err(Error::Parameter(format!(
            "graded budget {} is below the {} fiber points; raise n_interior, resolution or lower depth",
            spec.n_interior,
            pts.len()
        )));
    }
    let mut m = m_top;
    while pts.len() < spec.n_interior && m > m_floor {
        let y = ladder_height(m, k);
        let phase: f64 = rng.random();
        let mut row: Vec<[f64; 2]> = Vec::new();
        let mut j = 0.0;
        loop {
            let x = -e + (j + phase) * res * y;
            if x > e {
                break;
            }
            if columns.iter().all(|c| (c - x).abs() > 1e-9 * y) {
                row.push([x, y]);
            }
            j += 1.0;
        }
        let room = spec.n_interior - pts.len();
        if row.len() > room {
            row.sort_by(|a, b| a[0].abs().total_cmp(&b[0].abs()));
            row.truncate(room);
            row.sort_by(|a, b| a[0].total_cmp(&b[0]));
        }
        pts.extend(row);
        m -= 1;
    }
    Ok(pts)
}

/// Chain along `x2 = x1^2 / 2` towards the cusp tip with steps of
/// `0.75 res d(x)`; more points reach closer to the tip.
fn graded_cusp(spec: &SamplerSpec) -> Vec<[f64; 2]> {
    let mut pts = Vec::with_capacity(spec.n_interior);
    let mut x = 0.75;
    while pts.len() < spec.n_interior {
        let p = [x, 0.5 * x * x];
        pts.push(p);
        x -= 0.75 * spec.resolution * Domain::Cusp.boundary_distance(p);
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let spec = SamplerSpec::new(Family::HalfPlane, 50, 5, 7);
        assert_eq!(sample(&spec).unwrap(), sample(&spec).unwrap());
        let other = SamplerSpec::new(Family::HalfPlane, 50, 5, 8);
        assert_ne!(sample(&spec).unwrap(), sample(&other).unwrap());
    }

    #[test]
    fn half_plane_counts() {
        let s = sample(&SamplerSpec::new(Family::HalfPlane, 100, 10, 7)).unwrap();
        assert_eq!(s.n_interior(), 100);
        assert_eq!(s.n_boundary(), 10);
        assert!(s.interior().iter().all(|p| p.coords.as_ref().unwrap()[1] > 0.0));
        assert!(s.is_unbounded());
    }

    #[test]
    fn graded_reaches_boundary() {
        let spec = SamplerSpec::new(Family::HalfPlane, 600, 2, 1).graded(0.1);
        let s = sample(&spec).unwrap();
        assert_eq!(s.n_interior(), 600);
        let min = s.bdist().iter().copied().fold(f64::INFINITY, f64::min);
        assert!(min <= spec.extent * 2f64.powi(-8));
        for m in [0, 1, 2, 3] {
            let y = 2f64.powi(m);
            assert!(s.interior().iter().any(|p| p.coords.as_deref() == Some(&[0.0, y][..])));
        }
    }

    #[test]
    fn cusp_is_bounded() {
        let s = sample(&SamplerSpec::new(Family::CuspDomain, 30, 6, 2)).unwrap();
        assert!(!s.is_unbounded());
    }

    #[test]
    fn ladder_is_exact_at_powers() {
        assert_eq!(ladder_height(30, 10), 8.0);
        assert_eq!(ladder_height(-20, 10), 0.25);
    }
}
