use hyperbolization::certify::brute_force_delta;
use hyperbolization::gromov::{h_product_closed_form, product};
use hyperbolization::hyper::h_metric;
use hyperbolization::prelude::*;
use proptest::prelude::*;

fn points(pts: &[(f64, f64)]) -> MetricMatrix {
    let labels = (0..pts.len()).map(|i| format!("p{i}")).collect();
    MetricMatrix::from_fn(labels, MetricKind::D, |i, j| {
        (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1)
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exhaustive_matches_brute_force(pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 4..9)) {
        let m = points(&pts);
        let fast = delta_hyperbolicity(&m, DeltaMode::Exhaustive).unwrap().delta;
        let slow = brute_force_delta(&m);
        prop_assert!((fast - slow).abs() <= 1e-12 * slow.max(1.0), "{fast} vs {slow}");
    }

    #[test]
    fn sampled_never_exceeds_exhaustive(seed in 0u64..500, budget in 1u64..2000) {
        let s = sample(&SamplerSpec::new(Family::SlitPlane, 14, 3, seed)).unwrap();
        let m = h_metric(&s);
        let full = delta_hyperbolicity(&m, DeltaMode::Exhaustive).unwrap().delta;
        let part = delta_hyperbolicity(&m, DeltaMode::Sampled { budget, seed }).unwrap().delta;
        prop_assert!(part <= full + 1e-12);
    }
}

#[test]
fn collinear_points_are_zero_hyperbolic() {
    let m = points(&[(0.0, 0.0), (1.0, 0.0), (2.5, 0.0), (7.0, 0.0)]);
    assert_eq!(delta_hyperbolicity(&m, DeltaMode::Exhaustive).unwrap().delta, 0.0);
}

#[test]
fn unit_square() {
    let m = points(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
    let d = delta_hyperbolicity(&m, DeltaMode::Exhaustive).unwrap().delta;
    assert!((d - (2f64.sqrt() - 1.0)).abs() < 1e-12);
    assert!((brute_force_delta(&m) - d).abs() < 1e-12);
}

#[test]
fn closed_form_product_agrees() {
    let s = sample(&SamplerSpec::new(Family::ExteriorDisk, 20, 3, 4)).unwrap();
    let m = h_metric(&s);
    for x in 0..20 {
        for y in 0..20 {
            for w in [0, 7, 19] {
                if x != y && x != w && y != w {
                    let a = h_product_closed_form(&s, x, y, w);
                    assert!((a - product(&m, x, y, w)).abs() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn h_scaled_is_roughly_similar() {
    let s = sample(&SamplerSpec::new(Family::HalfPlane, 20, 3, 2)).unwrap();
    let m = h_metric(&s);
    let r = rough_similarity_check(&m, &m.scaled(2.5), None).unwrap();
    assert!((r.lambda - 2.5).abs() < 1e-6);
    assert!(r.mu < 1e-5);
}
