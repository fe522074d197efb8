//! End-to-end comparisons of boundary metrics with the ambient metric.

use serde::{Deserialize, Serialize};

use super::{qm_distortion, qs_distortion, DistortionReport, EnvelopeFit};
use crate::boundary::{attach_anchors, busemann, AnchorSchedule, AnchoredSpace, BoundaryMetric, BusemannFunction};
use crate::error::{Error, Result};
use crate::gromov::{delta_hyperbolicity, rough_similarity_check, DeltaMode, DeltaReport, RoughSimilarityReport};
use crate::hyper::{point_metric_on, uniformity_estimate, PointMetric, QhGraph, UniformityReport};
use crate::metric::MetricMatrix;
use crate::space::SampledSpace;
use crate::tolerance;

/// Configurations scanned exhaustively when estimating the four-point
/// constant on anchor tails; larger sets are sampled with this budget.
const DELTA_EXHAUSTIVE_LIMIT: u64 = 50_000_000;

/// Metric restricted to a base point, anchor points and extra labels,
/// with the Busemann function of infinity when the space is unbounded.
struct AnchorFrame {
    anchored: AnchoredSpace,
    m: MetricMatrix,
    busemann: Option<BusemannFunction>,
    delta: DeltaReport,
}

impl AnchorFrame {
    fn proxy_refs(&self) -> Vec<&crate::boundary::AnchorSequence> {
        self.anchored.proxies.iter().collect()
    }
}

/// Labels of the key set: base point, anchors, extras, without repeats.
fn key_labels(anchored: &AnchoredSpace, w: &str, extra: &[String]) -> Vec<String> {
    let mut out = vec![w.to_string()];
    for l in anchored.anchor_labels().into_iter().chain(extra.iter().cloned()) {
        if !out.contains(&l) {
            out.push(l);
        }
    }
    out
}

/// Four-point constant on the base point and the last terms of every anchor
/// sequence.
pub(crate) fn tail_delta(m: &MetricMatrix, anchored: &AnchoredSpace, w: &str, tail: usize, seed: u64) -> Result<DeltaReport> {
    let mut labels = vec![w.to_string()];
    for s in anchored.proxies.iter().chain(&anchored.infinity) {
        for l in s.points.iter().rev().take(tail) {
            if !labels.contains(l) {
                labels.push(l.clone());
            }
        }
    }
    let sub = m.restrict(&labels)?;
    let n = sub.n() as u64;
    let configs = n * (n.saturating_sub(1)) * (n.saturating_sub(2)) * (n.saturating_sub(3)) / 6;
    let mode = if configs <= DELTA_EXHAUSTIVE_LIMIT {
        DeltaMode::Exhaustive
    } else {
        DeltaMode::Sampled {
            budget: DELTA_EXHAUSTIVE_LIMIT,
            seed,
        }
    };
    delta_hyperbolicity(&sub, mode)
}

fn default_base(space: &SampledSpace) -> String {
    space.label(0).to_string()
}

fn frame_on_point_metric(
    space: &SampledSpace,
    metric: PointMetric,
    schedule: &AnchorSchedule,
    w: Option<&str>,
    seed: u64,
) -> Result<AnchorFrame> {
    let w = w.map(str::to_string).unwrap_or_else(|| default_base(space));
    space.interior_index(&w)?;
    let anchored = attach_anchors(space, schedule)?;
    let labels = key_labels(&anchored, &w, &[]);
    let idx = labels
        .iter()
        .map(|l| anchored.space.index_of(l))
        .collect::<Result<Vec<_>>>()?;
    let m = point_metric_on(&anchored.space, metric, &idx)?;
    let busemann = match &anchored.infinity {
        Some(xi) => Some(busemann(&m, xi, &w, tolerance::BUSEMANN_STABILIZATION)?),
        None => None,
    };
    let delta = tail_delta(&m, &anchored, &w, 2, seed)?;
    Ok(AnchorFrame {
        anchored,
        m,
        busemann,
        delta,
    })
}

fn relative_error(value: f64, expected: f64) -> f64 {
    (value / expected - 1.0).abs()
}

/// Largest Hamenstädt parameter allowed for the measured constant, capped.
pub(crate) fn hamenstadt_epsilon(delta: f64, cap: f64) -> f64 {
    if delta > 0.0 {
        cap.min(std::f64::consts::LN_2 / (22.0 * delta))
    } else {
        cap
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Params {
    pub metric: PointMetric,
    /// Defaults to `min(0.02, log 2 / (22 delta))`.
    pub epsilon: Option<f64>,
    pub schedule: Option<AnchorSchedule>,
    pub w: Option<String>,
    pub budget: usize,
    pub seed: u64,
    pub tail: usize,
    /// Also fit against a seeded relabelling of the ambient metric, which
    /// must fail the fit-quality gate.
    pub control: bool,
}

impl Default for Theorem1Params {
    fn default() -> Self {
        Self {
            metric: PointMetric::H,
            epsilon: None,
            schedule: None,
            w: None,
            budget: 200_000,
            seed: 0,
            tail: 4,
            control: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlReport {
    pub fit: EnvelopeFit,
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub metric: PointMetric,
    pub labels: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub busemann_gap: f64,
    pub max_product_width: f64,
    pub expected_alpha: f64,
    pub distortion: DistortionReport,
    pub alpha_error: f64,
    pub alpha_ok: bool,
    pub fit_ok: bool,
    pub control: Option<ControlReport>,
    pub passed: bool,
}

/// Compares the Hamenstädt metric of a hyperbolic-type metric, centred at
/// infinity, with `d` on the boundary samples.
///
/// The samples `t = rho(x,y)/rho(x,z)` against `d(x,y)/d(x,z)` should follow
/// `t^(1/eps)`, the Hamenstädt metric being comparable to a snowflake of `d`.
pub fn theorem1_report(space: &SampledSpace, params: &Theorem1Params) -> Result<Theorem1Report> {
    if !space.is_unbounded() {
        return Err(Error::Precondition("the space must be unbounded".into()));
    }
    if space.n_boundary() < 3 {
        return Err(Error::Precondition("need at least three boundary samples".into()));
    }
    let schedule = params.schedule.clone().unwrap_or_else(|| AnchorSchedule::for_space(space));
    let frame = frame_on_point_metric(space, params.metric, &schedule, params.w.as_deref(), params.seed)?;
    let delta = frame.delta.delta;
    let epsilon = params.epsilon.unwrap_or_else(|| hamenstadt_epsilon(delta, 0.02));
    let b = frame.busemann.as_ref().expect("unbounded");
    let ham = BoundaryMetric::hamenstadt(&frame.m, &frame.proxy_refs(), b, epsilon, delta, params.tail)?;
    let d = space.boundary_d_matrix();
    let distortion = qs_distortion(&ham.dmat, &d, params.budget, params.seed)?
        .with_meta("source", format!("hamenstadt({})", params.metric.kind().name()))
        .with_meta("target", "d");
    let expected_alpha = 1.0 / epsilon;
    let alpha_error = relative_error(distortion.fit.alpha, expected_alpha);
    let alpha_ok = alpha_error <= tolerance::EXPONENT;
    let fit_ok = distortion.fit.is_good();
    let control = if params.control {
        let mut perm: Vec<String> = d.labels().to_vec();
        use rand::seq::SliceRandom;
        perm.shuffle(&mut crate::rng(params.seed ^ 0x5eed));
        let shuffled = d.relabeled(perm)?;
        let c = qs_distortion(&ham.dmat, &shuffled, params.budget, params.seed)?;
        Some(ControlReport {
            fit: c.fit,
            rejected: !c.fit.is_good(),
        })
    } else {
        None
    };
    let passed = alpha_ok && fit_ok && control.as_ref().is_none_or(|c| c.rejected);
    Ok(Theorem1Report {
        metric: params.metric,
        labels: d.n(),
        delta,
        epsilon,
        busemann_gap: b.max_gap,
        max_product_width: ham.max_width,
        expected_alpha,
        distortion,
        alpha_error,
        alpha_ok,
        fit_ok,
        control,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corollary1Params {
    /// Hamenstädt parameter for `j~`.
    pub epsilon: f64,
    /// Hamenstädt parameter for `h`.
    pub epsilon_prime: f64,
    pub schedule: Option<AnchorSchedule>,
    pub w: Option<String>,
    pub budget: usize,
    pub seed: u64,
    pub tail: usize,
}

impl Default for Corollary1Params {
    fn default() -> Self {
        Self {
            epsilon: 0.02,
            epsilon_prime: 0.02,
            schedule: None,
            w: None,
            budget: 200_000,
            seed: 0,
            tail: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corollary1Report {
    /// `h` against `2 j~` on the interior sample.
    pub rough: RoughSimilarityReport,
    pub rough_ok: bool,
    pub delta_jtilde: f64,
    pub delta_h: f64,
    pub expected_alpha: f64,
    pub distortion: DistortionReport,
    pub alpha_error: f64,
    pub alpha_ok: bool,
    pub fit_ok: bool,
    pub passed: bool,
}

/// Checks that the identity `(X, j~) -> (X, h)` is a `(2, 2 log 2)` rough
/// similarity, and compares the two Hamenstädt metrics on the boundary: the
/// expected exponent of `h_{b,eps'}` against `j~_{b,eps}` is `2 eps' / eps`.
pub fn corollary1_report(space: &SampledSpace, params: &Corollary1Params) -> Result<Corollary1Report> {
    if !space.is_unbounded() {
        return Err(Error::Precondition("the space must be unbounded".into()));
    }
    let all: Vec<usize> = (0..space.n_interior()).collect();
    let jt_all = point_metric_on(space, PointMetric::Jtilde, &all)?;
    let h_all = point_metric_on(space, PointMetric::H, &all)?;
    let rough = rough_similarity_check(&jt_all, &h_all, Some(2.0))?;
    let rough_ok = rough.mu <= 2.0 * std::f64::consts::LN_2 + tolerance::DELTA_BOUND;

    let schedule = params.schedule.clone().unwrap_or_else(|| AnchorSchedule::for_space(space));
    let fj = frame_on_point_metric(space, PointMetric::Jtilde, &schedule, params.w.as_deref(), params.seed)?;
    let fh = frame_on_point_metric(space, PointMetric::H, &schedule, params.w.as_deref(), params.seed)?;
    let hj = BoundaryMetric::hamenstadt(
        &fj.m,
        &fj.proxy_refs(),
        fj.busemann.as_ref().expect("unbounded"),
        params.epsilon,
        fj.delta.delta,
        params.tail,
    )?;
    let hh = BoundaryMetric::hamenstadt(
        &fh.m,
        &fh.proxy_refs(),
        fh.busemann.as_ref().expect("unbounded"),
        params.epsilon_prime,
        fh.delta.delta,
        params.tail,
    )?;
    let distortion = qs_distortion(&hj.dmat, &hh.dmat, params.budget, params.seed)?
        .with_meta("source", "hamenstadt(jtilde)")
        .with_meta("target", "hamenstadt(h)");
    let expected_alpha = 2.0 * params.epsilon_prime / params.epsilon;
    let alpha_error = relative_error(distortion.fit.alpha, expected_alpha);
    let alpha_ok = alpha_error <= tolerance::EXPONENT;
    let fit_ok = distortion.fit.is_good();
    Ok(Corollary1Report {
        rough,
        rough_ok,
        delta_jtilde: fj.delta.delta,
        delta_h: fh.delta.delta,
        expected_alpha,
        distortion,
        alpha_error,
        alpha_ok,
        fit_ok,
        passed: rough_ok && alpha_ok && fit_ok,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphBoundaryParams {
    pub sigma: f64,
    /// Anchor schedule; a fill ratio is added when missing.
    pub schedule: Option<AnchorSchedule>,
    pub w: Option<String>,
    /// Labels added to the key set.
    #[serde(default)]
    pub extra: Vec<String>,
    pub pair_budget: usize,
    pub seed: u64,
    pub tail: usize,
}

impl Default for GraphBoundaryParams {
    fn default() -> Self {
        Self {
            sigma: 0.1,
            schedule: None,
            w: None,
            extra: Vec::new(),
            pair_budget: 200,
            seed: 0,
            tail: 4,
        }
    }
}

/// Graph approximation of the quasihyperbolic metric restricted to anchors.
pub struct GraphBoundary {
    pub anchored: AnchoredSpace,
    pub graph: QhGraph,
    /// Graph distances on the base point, anchors and extras.
    pub k: MetricMatrix,
    pub w: String,
    pub delta: DeltaReport,
    pub busemann: Option<BusemannFunction>,
}

impl GraphBoundary {
    pub fn build(space: &SampledSpace, params: &GraphBoundaryParams) -> Result<Self> {
        let mut schedule = params.schedule.clone().unwrap_or_else(|| AnchorSchedule::for_space(space));
        if schedule.fill_ratio.is_none() {
            schedule.fill_ratio = Some(1.0 + 0.8 * params.sigma);
        }
        let w = params.w.clone().unwrap_or_else(|| default_base(space));
        space.interior_index(&w)?;
        let anchored = attach_anchors(space, &schedule)?;
        let graph = QhGraph::new(&anchored.space, params.sigma)?;
        let labels = key_labels(&anchored, &w, &params.extra);
        let idx = labels
            .iter()
            .map(|l| anchored.space.interior_index(l))
            .collect::<Result<Vec<_>>>()?;
        let k = graph.k_matrix(&idx);
        let busemann = match &anchored.infinity {
            Some(xi) => Some(busemann(&k, xi, &w, tolerance::BUSEMANN_STABILIZATION)?),
            None => None,
        };
        let delta = tail_delta(&k, &anchored, &w, 2, params.seed)?;
        Ok(Self {
            anchored,
            graph,
            k,
            w,
            delta,
            busemann,
        })
    }

    pub fn proxy_refs(&self) -> Vec<&crate::boundary::AnchorSequence> {
        self.anchored.proxies.iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Params {
    pub graph: GraphBoundaryParams,
    /// Defaults to `log 2 / (22 delta)`, capped at 0.1.
    pub epsilon: Option<f64>,
    pub budget: usize,
}

impl Default for Theorem2Params {
    fn default() -> Self {
        Self {
            graph: GraphBoundaryParams::default(),
            epsilon: None,
            budget: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Report {
    pub sigma: f64,
    pub uniformity: UniformityReport,
    pub uniformity_refined: Option<UniformityReport>,
    /// Set when the uniformity constant grows under refinement; the exponent
    /// checks are then skipped.
    pub uniformity_warning: Option<String>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub distortion: Option<DistortionReport>,
    /// Envelope on samples with `t < 1`.
    pub small: Option<EnvelopeFit>,
    /// Envelope on samples with `t >= 1`.
    pub large: Option<EnvelopeFit>,
    pub small_ok: Option<bool>,
    pub large_ok: Option<bool>,
    /// `None` when the checks were skipped.
    pub passed: Option<bool>,
}

/// Compares `d` on the boundary samples with the Hamenstädt metric of the
/// graph quasihyperbolic metric, for a uniform space.
///
/// Uniformity is estimated first; when a refined sample is given and the
/// estimate grows by more than [`tolerance::UNIFORMITY_DIVERGENCE`], the
/// space is reported as non-uniform and no exponent is asserted.
pub fn theorem2_report(
    space: &SampledSpace,
    refined: Option<&SampledSpace>,
    params: &Theorem2Params,
) -> Result<Theorem2Report> {
    let g = &params.graph;
    let graph0 = QhGraph::new(space, g.sigma)?;
    let uniformity = uniformity_estimate(space, &graph0, g.pair_budget, g.seed)?;
    drop(graph0);
    let uniformity_refined = match refined {
        Some(r) => {
            let gr = QhGraph::new(r, g.sigma)?;
            Some(uniformity_estimate(r, &gr, g.pair_budget, g.seed)?)
        }
        None => None,
    };
    let mut report = Theorem2Report {
        sigma: g.sigma,
        uniformity,
        uniformity_refined,
        uniformity_warning: None,
        delta: None,
        epsilon: None,
        distortion: None,
        small: None,
        large: None,
        small_ok: None,
        large_ok: None,
        passed: None,
    };
    if let Some(r) = &report.uniformity_refined {
        let growth = r.a_hat / report.uniformity.a_hat;
        if growth > tolerance::UNIFORMITY_DIVERGENCE {
            report.uniformity_warning = Some(format!(
                "uniformity estimate grows from {:.3} to {:.3} under refinement; the space does not look uniform",
                report.uniformity.a_hat, r.a_hat
            ));
            return Ok(report);
        }
    }
    if !space.is_unbounded() {
        return Err(Error::Precondition("the space must be unbounded".into()));
    }
    if space.n_boundary() < 3 {
        return Err(Error::Precondition("need at least three boundary samples".into()));
    }
    let gb = GraphBoundary::build(space, g)?;
    let delta = gb.delta.delta;
    let epsilon = params.epsilon.unwrap_or_else(|| hamenstadt_epsilon(delta, 0.1));
    let b = gb.busemann.as_ref().expect("unbounded");
    let ham = BoundaryMetric::hamenstadt(&gb.k, &gb.proxy_refs(), b, epsilon, delta, g.tail)?;
    let d = space.boundary_d_matrix();
    let distortion = qs_distortion(&d, &ham.dmat, params.budget, g.seed)?
        .with_meta("source", "d")
        .with_meta("target", "hamenstadt(k_graph)");
    let small = distortion.branch(|t| t < 1.0)?;
    let large = distortion.branch(|t| t >= 1.0)?;
    let a = report.uniformity.a_hat;
    let small_ok = relative_error(small.alpha, epsilon) <= tolerance::EXPONENT && small.is_good();
    let large_ok = large.alpha <= 4.0 * a * a * small.alpha * tolerance::LARGE_BRANCH;
    report.delta = Some(delta);
    report.epsilon = Some(epsilon);
    report.small = Some(small);
    report.large = Some(large);
    report.small_ok = Some(small_ok);
    report.large_ok = Some(large_ok);
    report.passed = Some(small_ok && large_ok);
    report.distortion = Some(distortion);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corollary2Params {
    pub graph: GraphBoundaryParams,
    /// Visual parameter.
    pub epsilon_visual: f64,
    /// Hamenstädt parameter.
    pub epsilon_hamenstadt: f64,
    pub budget: usize,
    /// Allowed relative error of the exponent.
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corollary2Report {
    pub delta: f64,
    pub epsilon_visual: f64,
    pub epsilon_hamenstadt: f64,
    pub expected_alpha: f64,
    pub distortion: DistortionReport,
    pub alpha_error: f64,
    pub passed: bool,
}

/// Quasimöbius comparison of the visual metric based at the base point with
/// the Hamenstädt metric centred at infinity; the expected exponent is
/// `eps_hamenstadt / eps_visual`.
pub fn corollary2_check(space: &SampledSpace, params: &Corollary2Params) -> Result<Corollary2Report> {
    if !space.is_unbounded() {
        return Err(Error::Precondition("the space must be unbounded".into()));
    }
    let g = &params.graph;
    let gb = GraphBoundary::build(space, g)?;
    corollary2_on(&gb, params)
}

/// As [`corollary2_check`] on an already built graph boundary.
pub fn corollary2_on(gb: &GraphBoundary, params: &Corollary2Params) -> Result<Corollary2Report> {
    let delta = gb.delta.delta;
    let g = &params.graph;
    let vis = BoundaryMetric::visual(&gb.k, &gb.proxy_refs(), &gb.w, params.epsilon_visual, delta, g.tail)?;
    let b = gb
        .busemann
        .as_ref()
        .ok_or_else(|| Error::Precondition("the space must be unbounded".into()))?;
    let ham = BoundaryMetric::hamenstadt(&gb.k, &gb.proxy_refs(), b, params.epsilon_hamenstadt, delta, g.tail)?;
    let distortion = qm_distortion(&vis.dmat, &ham.dmat, params.budget, g.seed, None)?
        .with_meta("source", "visual(k_graph)")
        .with_meta("target", "hamenstadt(k_graph)");
    let expected_alpha = params.epsilon_hamenstadt / params.epsilon_visual;
    let alpha_error = relative_error(distortion.fit.alpha, expected_alpha);
    let passed = alpha_error <= params.tolerance && distortion.fit.is_good();
    Ok(Corollary2Report {
        delta,
        epsilon_visual: params.epsilon_visual,
        epsilon_hamenstadt: params.epsilon_hamenstadt,
        expected_alpha,
        distortion,
        alpha_error,
        passed,
    })
}
