use hyperbolization::boundary::{frink_bound_check, quasimetric_factor, BoundaryMetric};
use hyperbolization::certify::chain_enumeration;
use hyperbolization::hyper::{point_metric_on, PointMetric};
use hyperbolization::prelude::*;
use proptest::prelude::*;

fn quasimetric(vals: &[f64], n: usize) -> MetricMatrix {
    let labels = (0..n).map(|i| format!("q{i}")).collect();
    let mut k = 0;
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            rows[i][j] = vals[k];
            rows[j][i] = vals[k];
            k += 1;
        }
    }
    MetricMatrix::from_rows(labels, rows, MetricKind::Quasi).unwrap()
}

proptest! {
    #[test]
    fn chain_metric_equals_enumeration(vals in prop::collection::vec(1e-3f64..10.0, 21)) {
        let rho = quasimetric(&vals, 7);
        let d = chain_metrize(&rho).unwrap();
        let e = chain_enumeration(&rho);
        prop_assert_eq!(d.values(), e.values());
    }
}

fn half_plane_frame() -> (AnchoredSpace, MetricMatrix, String) {
    let base = sample(&SamplerSpec::new(Family::HalfPlane, 30, 8, 3)).unwrap();
    let (space, labels) = base.with_interior_points(&[("w".into(), vec![0.0, 1.0])]).unwrap();
    let schedule = AnchorSchedule::for_space(&space).with_origin([0.0, 0.0]);
    let anchored = attach_anchors(&space, &schedule).unwrap();
    let idx: Vec<usize> = (0..anchored.space.n_interior()).collect();
    let m = point_metric_on(&anchored.space, PointMetric::H, &idx).unwrap();
    (anchored, m, labels[0].clone())
}

#[test]
fn anchors_form_gromov_sequences() {
    let (a, m, w) = half_plane_frame();
    for s in a.proxies.iter().chain(a.infinity.as_ref()) {
        assert!(hyperbolization::boundary::is_gromov_sequence(&m, s, &w).unwrap(), "{}", s.target);
    }
}

#[test]
fn busemann_on_the_vertical_axis() {
    let (a, m, w) = half_plane_frame();
    let b = busemann(&m, a.infinity.as_ref().unwrap(), &w, 1e-3).unwrap();
    assert_eq!(b.value(&w).unwrap(), 0.0);
    // Infinity anchors sit at (0, R 2^n); along that ray b = -log(height).
    let r = a.infinity.as_ref().unwrap();
    let first = a.space.index_of(&r.points[0]).unwrap();
    let y = a.space.coords(first).unwrap()[1];
    assert!((b.value(&r.points[0]).unwrap() + y.ln()).abs() < 0.02);
}

#[test]
fn boundary_metrics_satisfy_frink_bounds() {
    let (a, m, w) = half_plane_frame();
    let seqs: Vec<&AnchorSequence> = a.proxies.iter().collect();
    let vis = BoundaryMetric::visual(&m, &seqs, &w, 0.02, 0.7, 4).unwrap();
    assert!(frink_bound_check(&vis).holds);
    let b = busemann(&m, a.infinity.as_ref().unwrap(), &w, 1e-3).unwrap();
    let ham = BoundaryMetric::hamenstadt(&m, &seqs, &b, 0.02, 0.7, 4).unwrap();
    assert!(frink_bound_check(&ham).holds);
    assert!(quasimetric_factor(&ham.rho) <= ham.quasi_constant() * 1.05);
}

#[test]
fn half_plane_hamenstadt_is_a_power_of_d() {
    // For h at infinity the product is -log|a - b| up to the tail error, so
    // rho / |a - b|^eps is nearly constant.
    let (a, m, w) = half_plane_frame();
    let seqs: Vec<&AnchorSequence> = a.proxies.iter().collect();
    let b = busemann(&m, a.infinity.as_ref().unwrap(), &w, 1e-3).unwrap();
    let ham = BoundaryMetric::hamenstadt(&m, &seqs, &b, 0.02, 0.7, 4).unwrap();
    let d = a.space.boundary_d_matrix();
    let mut ratios = Vec::new();
    for i in 0..d.n() {
        for j in (i + 1)..d.n() {
            ratios.push(ham.rho.get(i, j) / d.get(i, j).powf(0.02));
        }
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    assert!(hi / lo < 1.001, "{lo} {hi}");
}

#[test]
fn tail_longer_than_sequence_is_rejected() {
    let (a, m, w) = half_plane_frame();
    let r = boundary_gromov_product(
        &m,
        Endpoint::Sequence(&a.proxies[0]),
        Endpoint::Sequence(&a.proxies[1]),
        Base::Point(&w),
        100,
    );
    assert!(matches!(r, Err(Error::TailTooLong { .. })));
}
