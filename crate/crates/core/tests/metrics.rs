use hyperbolization::hyper::{h_value, j_value, jtilde_value, point_metric_on, sandwich_defect, PointMetric};
use hyperbolization::prelude::*;
use hyperbolization::tolerance;
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        Just(Family::HalfPlane),
        Just(Family::PuncturedPlane),
        Just(Family::ExteriorDisk),
        Just(Family::SlitPlane),
        Just(Family::CuspDomain),
    ]
}

fn space(f: Family, n: usize, seed: u64) -> SampledSpace {
    sample(&SamplerSpec::new(f, n, 4, seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn point_metrics_are_metrics(f in family(), seed in 0u64..1000) {
        let s = space(f, 30, seed);
        for kind in [PointMetric::H, PointMetric::Jtilde, PointMetric::J] {
            let m = point_metric_on(&s, kind, &(0..30).collect::<Vec<_>>()).unwrap();
            let r = validate_metric(&m);
            prop_assert!(r.is_metric(), "{:?} on {:?}: {:?}", kind, f, r.violations.first());
        }
    }

    #[test]
    fn sandwich_holds(f in family(), seed in 0u64..1000) {
        let (lo, hi) = sandwich_defect(&space(f, 40, seed));
        prop_assert!(lo <= tolerance::SANDWICH);
        prop_assert!(hi <= tolerance::SANDWICH);
    }

    #[test]
    fn closed_forms(d in 1e-6f64..1e3, a in 1e-6f64..1e3, b in 1e-6f64..1e3) {
        let (big, small) = (a.max(b), a.min(b));
        let h = 2.0 * ((d + big) / (a * b).sqrt()).ln();
        prop_assert!((h_value(d, a, b) - h).abs() <= 1e-9 * h.max(1.0));
        let jt = 0.5 * ((1.0 + d / a) * (1.0 + d / b)).ln();
        prop_assert!((jtilde_value(d, a, b) - jt).abs() <= 1e-9 * jt.max(1.0));
        prop_assert!((j_value(d, a, b) - (1.0 + d / small).ln()).abs() <= 1e-12 * (1.0 + d / small).ln().max(1.0));
    }
}

#[test]
fn h_vanishes_on_the_diagonal() {
    for v in [1e-300, 1e-8, 1.0, 3.7, 1e12] {
        assert_eq!(h_value(0.0, v, v), 0.0);
    }
}

#[test]
fn half_plane_vertical_values() {
    // x = (0,1), y = (0,s): d = s - 1, max = s, so h = 2 log((2s - 1)/sqrt(s)).
    for s in [1.5f64, 2.0, 10.0] {
        let want = 2.0 * ((2.0 * s - 1.0) / s.sqrt()).ln();
        assert!((h_value(s - 1.0, 1.0, s) - want).abs() < 1e-12);
        assert!((j_value(s - 1.0, 1.0, s) - s.ln()).abs() < 1e-12);
    }
}

#[test]
fn matrix_json_round_trip_is_exact() {
    let s = space(Family::ExteriorDisk, 25, 3);
    let m = hyperbolization::hyper::h_metric(&s);
    let back: MetricMatrix = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
    assert_eq!(back, m);
}

#[test]
fn cross_ratio_scale_invariance() {
    let s = space(Family::HalfPlane, 12, 9);
    let m = hyperbolization::hyper::h_metric(&s);
    let scaled = m.scaled(7.25);
    let labels = m.labels().to_vec();
    for q in labels.windows(4) {
        let p = [0, 1, 2, 3].map(|i| CrossPoint::Label(q[i].as_str()));
        let a = cross_ratio(&m, p).unwrap();
        let b = cross_ratio(&scaled, p).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }
}
