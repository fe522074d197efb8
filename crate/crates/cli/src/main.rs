//! `hyperbolize`: sampling, hyperbolic-type metrics, boundary metrics and
//! distortion reports from the command line.
//!
//! Every run writes its artifacts and a `manifest.json` into a run directory
//! (`--out`, or `$HYPERBOLIZE_RUN_DIR/<command>`, or `runs/<command>`).
//! Exit codes: 0 pass, 1 failed check, 2 input or usage error.

mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use hyperbolization::boundary::{
    attach_anchors, busemann, frink_bound_check, quasimetric_factor, AnchorSchedule, AnchorSequence, AnchoredSpace,
    BoundaryMetric,
};
use hyperbolization::certify::{run_criterion, CertifyConfig, CRITERIA};
use hyperbolization::distortion::{
    corollary1_report, corollary2_check, qm_distortion, qs_distortion, theorem1_report, theorem2_report,
    Corollary1Params, Corollary2Params, DistortionReport, GraphBoundaryParams, Theorem1Params, Theorem2Params,
};
use hyperbolization::gromov::{delta_hyperbolicity, DeltaMode};
use hyperbolization::hyper::{point_metric_on, PointMetric, QhGraph};
use hyperbolization::io;
use hyperbolization::metric::{validate_metric, MetricMatrix};
use hyperbolization::sampler::{sample, Family, Grading, SamplerSpec};
use hyperbolization::space::SampledSpace;
use hyperbolization::tolerance;
use hyperbolization::Error;

use manifest::RunManifest;

#[derive(Parser, Debug)]
#[command(name = "hyperbolize", version, about = "Hyperbolic-type metrics and boundary metrics on sampled spaces")]
struct Cli {
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Run directory for artifacts and the manifest.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a space file (or a matrix file) for consistency and metric axioms.
    Validate(ValidateArgs),
    /// Draw a sample from one of the built-in families.
    Sample(SampleArgs),
    /// Compute h, j~, j or the graph quasihyperbolic metric of a space.
    Metric(MetricArgs),
    /// Four-point hyperbolicity constant of a metric.
    Delta(DeltaArgs),
    /// Busemann function of the point at infinity.
    Busemann(BusemannArgs),
    /// Visual or Hamenstadt metric on the boundary samples.
    Boundary(BoundaryArgs),
    /// Quasisymmetric distortion between two metrics on the same labels.
    QsReport(QsArgs),
    /// Quasimobius distortion between two metrics on the same labels.
    QmReport(QmArgs),
    /// Hamenstadt metric of h (or j~, j) against the ambient metric.
    Theorem1(Theorem1Args),
    /// Hamenstadt metric of the graph metric against the ambient metric.
    Theorem2(Theorem2Args),
    /// Rough similarity of h and j~ and their Hamenstadt metrics.
    Corollary1(Corollary1Args),
    /// Visual against Hamenstadt metric of the graph metric.
    Corollary2(Corollary2Args),
    /// Run the certification suite.
    CheckAll(CheckAllArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Kind {
    H,
    Jtilde,
    J,
    K,
}

impl Kind {
    fn point(self) -> Option<PointMetric> {
        match self {
            Kind::H => Some(PointMetric::H),
            Kind::Jtilde => Some(PointMetric::Jtilde),
            Kind::J => Some(PointMetric::J),
            Kind::K => None,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Mode {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum BaseKind {
    Visual,
    Hamenstadt,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum OutFormat {
    Csv,
    Json,
}

impl OutFormat {
    fn ext(self) -> &'static str {
        match self {
            OutFormat::Csv => "csv",
            OutFormat::Json => "json",
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct ValidateArgs {
    /// Point cloud or table space (.csv or .json).
    #[arg(long, required_unless_present = "matrix")]
    space: Option<PathBuf>,
    /// Distance matrix to check instead of a space.
    #[arg(long, conflicts_with = "space")]
    matrix: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SampleArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    n_boundary: usize,
    #[arg(long, default_value_t = 4.0)]
    extent: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Place points with spacing proportional to the boundary distance.
    #[arg(long)]
    graded: bool,
    /// Relative spacing of graded samples.
    #[arg(long, default_value_t = 0.1)]
    resolution: f64,
    /// Graded samples reach boundary distance `extent 2^-depth`.
    #[arg(long, default_value_t = 12)]
    depth: u32,
    /// Point cloud file for the custom_cloud family.
    #[arg(long)]
    cloud: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

#[derive(Args, Debug, Serialize)]
struct MetricSource {
    /// Space file.
    #[arg(long)]
    space: PathBuf,
    #[arg(long, value_enum, default_value_t = Kind::H)]
    kind: Kind,
    /// Edge admission ratio of the graph metric (kind k).
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
}

#[derive(Args, Debug, Serialize)]
struct MetricArgs {
    #[command(flatten)]
    source: MetricSource,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
}

#[derive(Args, Debug, Serialize)]
struct DeltaArgs {
    /// Distance matrix file; otherwise computed from `--space` and `--kind`.
    #[arg(long, conflicts_with = "space")]
    matrix: Option<PathBuf>,
    #[arg(long, required_unless_present = "matrix")]
    space: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Kind::H)]
    kind: Kind,
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
    mode: Mode,
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct AnchorArgs {
    /// Base point label (defaults to the first interior label).
    #[arg(long)]
    w: Option<String>,
    /// Anchor schedule as JSON; defaults to one scaled to the sample.
    #[arg(long)]
    anchor_schedule: Option<PathBuf>,
    /// Number of trailing anchor terms used for boundary products.
    #[arg(long, default_value_t = 4)]
    tail: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct BusemannArgs {
    #[command(flatten)]
    source: MetricSource,
    #[command(flatten)]
    anchors: AnchorArgs,
    /// Stabilisation tolerance between the last two anchors.
    #[arg(long, default_value_t = tolerance::BUSEMANN_STABILIZATION)]
    tolerance: f64,
}

#[derive(Args, Debug, Serialize)]
struct BoundaryArgs {
    #[command(flatten)]
    source: MetricSource,
    #[command(flatten)]
    anchors: AnchorArgs,
    #[arg(long, value_enum)]
    base: BaseKind,
    /// Parameter of the boundary metric; defaults to the largest admissible
    /// value for the measured four-point constant, capped at 0.02.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct QsArgs {
    /// Source metric (its ratios are `t`).
    #[arg(long)]
    a: PathBuf,
    /// Target metric.
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = 200_000)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct QmArgs {
    #[command(flatten)]
    pair: QsArgs,
    /// Label of `a` treated as the point at infinity.
    #[arg(long)]
    infinity: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct Theorem1Args {
    #[arg(long)]
    space: PathBuf,
    #[arg(long, value_enum, default_value_t = Kind::H)]
    kind: Kind,
    #[arg(long)]
    epsilon: Option<f64>,
    #[command(flatten)]
    anchors: AnchorArgs,
    #[arg(long, default_value_t = 200_000)]
    budget: usize,
    /// Skip the shuffled control.
    #[arg(long)]
    no_control: bool,
}

#[derive(Args, Debug, Serialize)]
struct GraphArgs {
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    /// Pairs used for the uniformity estimate.
    #[arg(long, default_value_t = 200)]
    pair_budget: usize,
}

#[derive(Args, Debug, Serialize)]
struct Theorem2Args {
    #[arg(long)]
    space: PathBuf,
    /// Denser sample of the same space, used to detect non-uniformity.
    #[arg(long)]
    refined: Option<PathBuf>,
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    anchors: AnchorArgs,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 200_000)]
    budget: usize,
}

#[derive(Args, Debug, Serialize)]
struct Corollary1Args {
    #[arg(long)]
    space: PathBuf,
    /// Parameter for j~.
    #[arg(long, default_value_t = 0.02)]
    epsilon: f64,
    /// Parameter for h.
    #[arg(long, default_value_t = 0.02)]
    epsilon_prime: f64,
    #[command(flatten)]
    anchors: AnchorArgs,
    #[arg(long, default_value_t = 200_000)]
    budget: usize,
}

#[derive(Args, Debug, Serialize)]
struct Corollary2Args {
    #[arg(long)]
    space: PathBuf,
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    anchors: AnchorArgs,
    #[arg(long)]
    epsilon_visual: f64,
    #[arg(long)]
    epsilon_hamenstadt: f64,
    #[arg(long, default_value_t = 200_000)]
    budget: usize,
    /// Allowed relative error of the exponent.
    #[arg(long, default_value_t = tolerance::EXPONENT)]
    tolerance: f64,
}

#[derive(Args, Debug, Serialize)]
struct CheckAllArgs {
    /// Family of the primary fixture.
    #[arg(long, value_parser = parse_family, default_value = "half_plane")]
    family: Family,
    /// Interior points of the primary fixture.
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Run only these criteria (comma separated numbers).
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
    /// Point cloud for a custom_cloud primary fixture.
    #[arg(long)]
    cloud: Option<PathBuf>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Verdict {
    Pass,
    Fail(String),
}

type CmdResult = hyperbolization::Result<Verdict>;

struct Run {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Run {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn input(&mut self, path: &Path) -> hyperbolization::Result<()> {
        self.manifest.input(path)?;
        Ok(())
    }

    fn report<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> hyperbolization::Result<()> {
        let p = self.path(name);
        io::save_report(value, &p)?;
        self.manifest.artifact(&p);
        Ok(())
    }

    fn matrix(&mut self, name: &str, m: &MetricMatrix) -> hyperbolization::Result<()> {
        let p = self.path(name);
        io::save_matrix(m, &p)?;
        self.manifest.artifact(&p);
        Ok(())
    }

    fn scatter(&mut self, name: &str, r: &DistortionReport, split: bool) -> hyperbolization::Result<()> {
        let p = self.path(name);
        io::save_scatter(
            &r.samples,
            |t| match (split, t < 1.0) {
                (false, _) => "all",
                (true, true) => "small",
                (true, false) => "large",
            },
            &p,
        )?;
        self.manifest.artifact(&p);
        Ok(())
    }

    fn timed<T>(&mut self, step: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.manifest.time(step, t.elapsed().as_secs_f64());
        out
    }
}

fn load_space(run: &mut Run, path: &Path) -> hyperbolization::Result<SampledSpace> {
    run.input(path)?;
    io::load_space(path)
}

fn load_matrix(run: &mut Run, path: &Path) -> hyperbolization::Result<MetricMatrix> {
    run.input(path)?;
    io::load_matrix(path)
}

fn space_metric(run: &mut Run, space: &SampledSpace, kind: Kind, sigma: f64) -> hyperbolization::Result<MetricMatrix> {
    let idx: Vec<usize> = (0..space.n_interior()).collect();
    match kind.point() {
        Some(p) => run.timed("metric", || point_metric_on(space, p, &idx)),
        None => run.timed("metric", || Ok(QhGraph::new(space, sigma)?.k_matrix(&idx))),
    }
}

fn schedule(run: &mut Run, args: &AnchorArgs, space: &SampledSpace) -> hyperbolization::Result<AnchorSchedule> {
    match &args.anchor_schedule {
        Some(p) => {
            run.input(p)?;
            Ok(serde_json::from_str(&fs::read_to_string(p)?)?)
        }
        None => Ok(AnchorSchedule::for_space(space)),
    }
}

/// Anchored space with its metric restricted to the base point and anchors.
struct Frame {
    anchored: AnchoredSpace,
    m: MetricMatrix,
    w: String,
}

fn frame(run: &mut Run, src: &MetricSource, args: &AnchorArgs) -> hyperbolization::Result<Frame> {
    let space = load_space(run, &src.space)?;
    let sched = schedule(run, args, &space)?;
    let anchored = attach_anchors(&space, &sched)?;
    let w = args.w.clone().unwrap_or_else(|| space.label(0).to_string());
    anchored.space.interior_index(&w)?;
    let mut labels = vec![w.clone()];
    labels.extend(anchored.anchor_labels().into_iter().filter(|l| *l != w));
    let idx = labels
        .iter()
        .map(|l| anchored.space.interior_index(l))
        .collect::<hyperbolization::Result<Vec<_>>>()?;
    let m = match src.kind.point() {
        Some(p) => run.timed("metric", || point_metric_on(&anchored.space, p, &idx))?,
        None => run.timed("metric", || {
            Ok::<_, Error>(QhGraph::new(&anchored.space, src.sigma)?.k_matrix(&idx))
        })?,
    };
    Ok(Frame { anchored, m, w })
}

fn frame_delta(m: &MetricMatrix, seed: u64) -> hyperbolization::Result<f64> {
    let n = m.n() as u64;
    let mode = if n * n * n * n / 6 <= 50_000_000 {
        DeltaMode::Exhaustive
    } else {
        DeltaMode::Sampled { budget: 5_000_000, seed }
    };
    Ok(delta_hyperbolicity(m, mode)?.delta)
}

fn cmd_validate(run: &mut Run, a: &ValidateArgs) -> CmdResult {
    if let Some(p) = &a.matrix {
        let m = load_matrix(run, p)?;
        let r = validate_metric(&m);
        run.report("validation.json", &r)?;
        println!("{} labels, {} violations", r.n, r.total_violations);
        return Ok(if r.is_metric() {
            Verdict::Pass
        } else {
            Verdict::Fail(format!("metric axiom {:?} violated", r.violations[0].axiom))
        });
    }
    let space = load_space(run, a.space.as_ref().expect("clap requires one"))?;
    let r = run.timed("validate", || space.validate());
    run.report("validation.json", &r)?;
    println!(
        "{} interior, {} boundary, bdist in [{:.3e}, {:.3e}], unbounded = {}",
        r.n_interior, r.n_boundary, r.min_bdist, r.max_bdist, r.unbounded
    );
    Ok(if r.is_valid() {
        Verdict::Pass
    } else if r.bdist_excess > 0.0 {
        Verdict::Fail(format!("boundary distance exceeds a sample distance by {:e}", r.bdist_excess))
    } else {
        Verdict::Fail("ambient distances violate the metric axioms".into())
    })
}

fn cmd_sample(run: &mut Run, a: &SampleArgs) -> CmdResult {
    let spec = SamplerSpec {
        family: a.family,
        n_interior: a.n,
        n_boundary: a.n_boundary,
        extent: a.extent,
        seed: a.seed,
        grading: if a.graded { Grading::BoundaryGraded } else { Grading::Uniform },
        resolution: a.resolution,
        depth: a.depth,
        cloud: a.cloud.clone(),
    };
    run.manifest.seed("sampler", a.seed);
    if let Some(c) = &a.cloud {
        run.input(c)?;
    }
    let space = run.timed("sample", || sample(&spec))?;
    let p = run.path(&format!("space.{}", a.format.ext()));
    io::save_space(&space, &p)?;
    run.manifest.artifact(&p);
    run.report("spec.json", &spec)?;
    println!("{} interior and {} boundary points written to {}", space.n_interior(), space.n_boundary(), p.display());
    Ok(Verdict::Pass)
}

fn cmd_metric(run: &mut Run, a: &MetricArgs) -> CmdResult {
    let space = load_space(run, &a.source.space)?;
    let m = space_metric(run, &space, a.source.kind, a.source.sigma)?;
    let r = run.timed("validate", || validate_metric(&m));
    run.matrix(&format!("metric.{}", a.format.ext()), &m)?;
    run.report("validation.json", &r)?;
    println!("{} x {} {} matrix, {} axiom violations", m.n(), m.n(), m.kind().name(), r.total_violations);
    Ok(if r.is_metric() {
        Verdict::Pass
    } else {
        Verdict::Fail(format!("metric axiom {:?} violated", r.violations[0].axiom))
    })
}

fn cmd_delta(run: &mut Run, a: &DeltaArgs) -> CmdResult {
    let m = match (&a.matrix, &a.space) {
        (Some(p), _) => load_matrix(run, p)?,
        (None, Some(p)) => {
            let space = load_space(run, p)?;
            space_metric(run, &space, a.kind, a.sigma)?
        }
        (None, None) => unreachable!("clap requires one"),
    };
    let mode = match a.mode {
        Mode::Exhaustive => DeltaMode::Exhaustive,
        Mode::Sampled => {
            run.manifest.seed("delta", a.seed);
            DeltaMode::Sampled {
                budget: a.budget,
                seed: a.seed,
            }
        }
    };
    let r = run.timed("delta", || delta_hyperbolicity(&m, mode))?;
    run.report("delta.json", &r)?;
    println!("delta = {} over {} configurations", r.delta, r.evaluated);
    Ok(Verdict::Pass)
}

fn cmd_busemann(run: &mut Run, a: &BusemannArgs) -> CmdResult {
    run.manifest.seed("anchors", a.anchors.seed);
    let f = frame(run, &a.source, &a.anchors)?;
    let xi = f
        .anchored
        .infinity
        .as_ref()
        .ok_or_else(|| Error::Precondition("the space is bounded; there is no point at infinity".into()))?;
    let b = run.timed("busemann", || busemann(&f.m, xi, &f.w, a.tolerance))?;
    run.report("busemann.json", &b)?;
    println!("Busemann function at {} over {} labels, gap {:.3e}", f.w, b.labels.len(), b.max_gap);
    Ok(Verdict::Pass)
}

fn cmd_boundary(run: &mut Run, a: &BoundaryArgs) -> CmdResult {
    run.manifest.seed("anchors", a.anchors.seed);
    let f = frame(run, &a.source, &a.anchors)?;
    let delta = run.timed("delta", || frame_delta(&f.m, a.anchors.seed))?;
    let epsilon = a.epsilon.unwrap_or_else(|| {
        if delta > 0.0 {
            0.02f64.min(std::f64::consts::LN_2 / (22.0 * delta))
        } else {
            0.02
        }
    });
    let bm = match a.base {
        BaseKind::Visual => {
            let mut seqs: Vec<&AnchorSequence> = f.anchored.proxies.iter().collect();
            seqs.extend(f.anchored.infinity.as_ref());
            BoundaryMetric::visual(&f.m, &seqs, &f.w, epsilon, delta, a.anchors.tail)?
        }
        BaseKind::Hamenstadt => {
            let xi = f
                .anchored
                .infinity
                .as_ref()
                .ok_or_else(|| Error::Precondition("the space is bounded; there is no point at infinity".into()))?;
            let b = busemann(&f.m, xi, &f.w, tolerance::BUSEMANN_STABILIZATION)?;
            let seqs: Vec<&AnchorSequence> = f.anchored.proxies.iter().collect();
            BoundaryMetric::hamenstadt(&f.m, &seqs, &b, epsilon, delta, a.anchors.tail)?
        }
    };
    let frink = frink_bound_check(&bm);
    let factor = quasimetric_factor(&bm.rho);
    run.matrix("rho.csv", &bm.rho)?;
    run.matrix("boundary_metric.csv", &bm.dmat)?;
    run.report(
        "boundary.json",
        &json!({
            "base": bm.base,
            "epsilon": epsilon,
            "delta": delta,
            "tail": bm.tail,
            "max_product_width": bm.max_width,
            "quasimetric_factor": factor,
            "quasi_constant": bm.quasi_constant(),
            "frink": frink,
        }),
    )?;
    println!(
        "{} boundary points, eps = {epsilon:.4}, delta = {delta:.4}, d/rho in [{:.4}, {:.4}]",
        bm.rho.n(),
        frink.min_ratio,
        frink.max_ratio
    );
    Ok(if frink.holds {
        Verdict::Pass
    } else {
        Verdict::Fail("chain metric violates rho/2 <= d <= rho".into())
    })
}

fn distortion_summary(r: &DistortionReport) -> Value {
    json!({ "alpha": r.fit.alpha, "c": r.fit.c, "relative_residual": r.fit.relative_residual, "samples": r.samples.len() })
}

fn cmd_qs(run: &mut Run, a: &QsArgs) -> CmdResult {
    let (ma, mb) = (load_matrix(run, &a.a)?, load_matrix(run, &a.b)?);
    run.manifest.seed("triples", a.seed);
    let r = run.timed("distortion", || qs_distortion(&ma, &mb, a.budget, a.seed))?;
    run.report("qs_report.json", &r)?;
    run.scatter("qs_scatter.csv", &r, false)?;
    println!("{}", distortion_summary(&r));
    Ok(Verdict::Pass)
}

fn cmd_qm(run: &mut Run, a: &QmArgs) -> CmdResult {
    let (ma, mb) = (load_matrix(run, &a.pair.a)?, load_matrix(run, &a.pair.b)?);
    run.manifest.seed("quadruples", a.pair.seed);
    let r = run.timed("distortion", || {
        qm_distortion(&ma, &mb, a.pair.budget, a.pair.seed, a.infinity.as_deref())
    })?;
    run.report("qm_report.json", &r)?;
    run.scatter("qm_scatter.csv", &r, false)?;
    println!("{}", distortion_summary(&r));
    Ok(Verdict::Pass)
}

fn optional_schedule(run: &mut Run, args: &AnchorArgs) -> hyperbolization::Result<Option<AnchorSchedule>> {
    match &args.anchor_schedule {
        Some(p) => {
            run.input(p)?;
            Ok(Some(serde_json::from_str(&fs::read_to_string(p)?)?))
        }
        None => Ok(None),
    }
}

fn verdict(passed: bool, what: &str) -> Verdict {
    if passed {
        Verdict::Pass
    } else {
        Verdict::Fail(what.to_string())
    }
}

fn cmd_theorem1(run: &mut Run, a: &Theorem1Args) -> CmdResult {
    let space = load_space(run, &a.space)?;
    let metric = a
        .kind
        .point()
        .ok_or_else(|| Error::Parameter("theorem1 uses h, jtilde or j; use theorem2 for the graph metric".into()))?;
    run.manifest.seed("triples", a.anchors.seed);
    let params = Theorem1Params {
        metric,
        epsilon: a.epsilon,
        schedule: optional_schedule(run, &a.anchors)?,
        w: a.anchors.w.clone(),
        budget: a.budget,
        seed: a.anchors.seed,
        tail: a.anchors.tail,
        control: !a.no_control,
    };
    let r = run.timed("theorem1", || theorem1_report(&space, &params))?;
    run.report("theorem1.json", &r)?;
    run.scatter("theorem1_scatter.csv", &r.distortion, false)?;
    println!(
        "alpha {:.4} (expected {:.4}), relative residual {:.3}, control rejected: {:?}",
        r.distortion.fit.alpha,
        r.expected_alpha,
        r.distortion.fit.relative_residual,
        r.control.as_ref().map(|c| c.rejected)
    );
    Ok(verdict(
        r.passed,
        "Hamenstadt exponent outside tolerance, poor fit, or control not rejected",
    ))
}

fn graph_params(a: &GraphArgs, anchors: &AnchorArgs, schedule: Option<AnchorSchedule>) -> GraphBoundaryParams {
    GraphBoundaryParams {
        sigma: a.sigma,
        schedule,
        w: anchors.w.clone(),
        extra: Vec::new(),
        pair_budget: a.pair_budget,
        seed: anchors.seed,
        tail: anchors.tail,
    }
}

fn cmd_theorem2(run: &mut Run, a: &Theorem2Args) -> CmdResult {
    let space = load_space(run, &a.space)?;
    let refined = match &a.refined {
        Some(p) => Some(load_space(run, p)?),
        None => None,
    };
    run.manifest.seed("triples", a.anchors.seed);
    let params = Theorem2Params {
        graph: graph_params(&a.graph, &a.anchors, optional_schedule(run, &a.anchors)?),
        epsilon: a.epsilon,
        budget: a.budget,
    };
    let r = run.timed("theorem2", || theorem2_report(&space, refined.as_ref(), &params))?;
    run.report("theorem2.json", &r)?;
    if let Some(d) = &r.distortion {
        run.scatter("theorem2_scatter.csv", d, true)?;
    }
    if let Some(w) = &r.uniformity_warning {
        println!("warning: {w}");
        return Ok(Verdict::Pass);
    }
    println!(
        "A = {:.3}, eps = {:.4}, t<1 slope {:.4}, t>=1 slope {:.4}",
        r.uniformity.a_hat,
        r.epsilon.unwrap_or(f64::NAN),
        r.small.map_or(f64::NAN, |f| f.alpha),
        r.large.map_or(f64::NAN, |f| f.alpha)
    );
    Ok(verdict(r.passed == Some(true), "branch exponents outside their bounds"))
}

fn cmd_corollary1(run: &mut Run, a: &Corollary1Args) -> CmdResult {
    let space = load_space(run, &a.space)?;
    run.manifest.seed("triples", a.anchors.seed);
    let params = Corollary1Params {
        epsilon: a.epsilon,
        epsilon_prime: a.epsilon_prime,
        schedule: optional_schedule(run, &a.anchors)?,
        w: a.anchors.w.clone(),
        budget: a.budget,
        seed: a.anchors.seed,
        tail: a.anchors.tail,
    };
    let r = run.timed("corollary1", || corollary1_report(&space, &params))?;
    run.report("corollary1.json", &r)?;
    run.scatter("corollary1_scatter.csv", &r.distortion, false)?;
    println!(
        "mu = {:.6}, alpha {:.4} (expected {:.4})",
        r.rough.mu, r.distortion.fit.alpha, r.expected_alpha
    );
    Ok(verdict(
        r.passed,
        "rough similarity constant above 2 log 2 or exponent outside tolerance",
    ))
}

fn cmd_corollary2(run: &mut Run, a: &Corollary2Args) -> CmdResult {
    let space = load_space(run, &a.space)?;
    run.manifest.seed("quadruples", a.anchors.seed);
    let params = Corollary2Params {
        graph: graph_params(&a.graph, &a.anchors, optional_schedule(run, &a.anchors)?),
        epsilon_visual: a.epsilon_visual,
        epsilon_hamenstadt: a.epsilon_hamenstadt,
        budget: a.budget,
        tolerance: a.tolerance,
    };
    let r = run.timed("corollary2", || corollary2_check(&space, &params))?;
    run.report("corollary2.json", &r)?;
    run.scatter("corollary2_scatter.csv", &r.distortion, false)?;
    println!("alpha {:.4} (expected {:.4})", r.distortion.fit.alpha, r.expected_alpha);
    Ok(verdict(r.passed, "cross-ratio exponent outside tolerance"))
}

fn cmd_check_all(run: &mut Run, a: &CheckAllArgs) -> CmdResult {
    let mut cfg = CertifyConfig::new(a.family, a.n, a.seed);
    if let Some(c) = &a.cloud {
        run.input(c)?;
        cfg.primary.cloud = Some(c.clone());
    }
    run.manifest.seed("suite", a.seed);
    let ids: Vec<u8> = if a.only.is_empty() {
        CRITERIA.iter().map(|c| c.0).collect()
    } else {
        a.only.clone()
    };
    let mut results = Vec::new();
    for id in ids {
        let r = run_criterion(id, &cfg)?;
        println!("{r}");
        run.manifest.time(&format!("C{id:02}"), r.seconds);
        results.push(r);
    }
    run.report("check_all.json", &results)?;
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| format!("C{:02}", r.id)).collect();
    println!("{} of {} criteria passed", results.len() - failed.len(), results.len());
    Ok(if failed.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail(format!("failed criteria: {}", failed.join(", ")))
    })
}

fn run_dir(cli: &Cli, name: &str) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| {
        std::env::var_os("HYPERBOLIZE_RUN_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("runs"))
            .join(name)
    })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate(_) => "validate",
        Command::Sample(_) => "sample",
        Command::Metric(_) => "metric",
        Command::Delta(_) => "delta",
        Command::Busemann(_) => "busemann",
        Command::Boundary(_) => "boundary",
        Command::QsReport(_) => "qs-report",
        Command::QmReport(_) => "qm-report",
        Command::Theorem1(_) => "theorem1",
        Command::Theorem2(_) => "theorem2",
        Command::Corollary1(_) => "corollary1",
        Command::Corollary2(_) => "corollary2",
        Command::CheckAll(_) => "check-all",
    }
}

fn parameters(c: &Command) -> Value {
    let v = match c {
        Command::Validate(a) => serde_json::to_value(a),
        Command::Sample(a) => serde_json::to_value(a),
        Command::Metric(a) => serde_json::to_value(a),
        Command::Delta(a) => serde_json::to_value(a),
        Command::Busemann(a) => serde_json::to_value(a),
        Command::Boundary(a) => serde_json::to_value(a),
        Command::QsReport(a) => serde_json::to_value(a),
        Command::QmReport(a) => serde_json::to_value(a),
        Command::Theorem1(a) => serde_json::to_value(a),
        Command::Theorem2(a) => serde_json::to_value(a),
        Command::Corollary1(a) => serde_json::to_value(a),
        Command::Corollary2(a) => serde_json::to_value(a),
        Command::CheckAll(a) => serde_json::to_value(a),
    };
    v.unwrap_or(Value::Null)
}

fn dispatch(run: &mut Run, c: &Command) -> CmdResult {
    match c {
        Command::Validate(a) => cmd_validate(run, a),
        Command::Sample(a) => cmd_sample(run, a),
        Command::Metric(a) => cmd_metric(run, a),
        Command::Delta(a) => cmd_delta(run, a),
        Command::Busemann(a) => cmd_busemann(run, a),
        Command::Boundary(a) => cmd_boundary(run, a),
        Command::QsReport(a) => cmd_qs(run, a),
        Command::QmReport(a) => cmd_qm(run, a),
        Command::Theorem1(a) => cmd_theorem1(run, a),
        Command::Theorem2(a) => cmd_theorem2(run, a),
        Command::Corollary1(a) => cmd_corollary1(run, a),
        Command::Corollary2(a) => cmd_corollary2(run, a),
        Command::CheckAll(a) => cmd_check_all(run, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let name = command_name(&cli.command);
    let dir = run_dir(&cli, name);
    if let Err(e) = fs::create_dir_all(&dir) {
        eprintln!("error: cannot create run directory {}: {e}", dir.display());
        return ExitCode::from(2);
    }
    let mut run = Run {
        manifest: RunManifest::new(name, parameters(&cli.command), rayon::current_num_threads()),
        dir,
    };
    let code = match dispatch(&mut run, &cli.command) {
        Ok(Verdict::Pass) => 0,
        Ok(Verdict::Fail(why)) => {
            eprintln!("check failed: {why}");
            run.manifest.failure = Some(why);
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            run.manifest.failure = Some(e.to_string());
            if e.is_input_error() {
                2
            } else {
                1
            }
        }
    };
    run.manifest.exit_code = code;
    let dir = run.dir.clone();
    if let Err(e) = run.manifest.write(&dir) {
        eprintln!("error: cannot write manifest: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code as u8)
}
