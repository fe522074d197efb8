use hyperbolization::distortion::{fit_envelope, qm_distortion, qs_distortion};
use hyperbolization::prelude::*;
use proptest::prelude::*;

fn plane(seed: u64, n: usize) -> MetricMatrix {
    let s = sample(&SamplerSpec::new(Family::PuncturedPlane, n, 1, seed)).unwrap();
    s.d_matrix(&(0..n).collect::<Vec<_>>())
}

#[test]
fn qm_samples_are_scale_invariant() {
    let m = plane(3, 9);
    let a = qm_distortion(&m, &m.map(|v| v.powf(0.7)), 1_000_000, 1, None).unwrap();
    let b = qm_distortion(&m.scaled(13.0), &m.map(|v| v.powf(0.7)).scaled(0.2), 1_000_000, 1, None).unwrap();
    assert!(a.exhaustive && b.exhaustive);
    for (p, q) in a.samples.iter().zip(&b.samples) {
        assert!((p.0 - q.0).abs() <= 1e-12 * p.0);
        assert!((p.1 - q.1).abs() <= 1e-12 * p.1);
    }
}

#[test]
fn qm_with_infinity_drops_factors() {
    let m = plane(4, 6);
    let r = qm_distortion(&m, &m, 1_000_000, 1, Some("x0")).unwrap();
    let l = m.labels();
    let point = |i: usize| if i == 0 { CrossPoint::Infinity } else { CrossPoint::Label(l[i].as_str()) };
    let mut want = Vec::new();
    for a in 0..6 {
        for b in 0..6 {
            for c in 0..6 {
                for d in 0..6 {
                    if a != b && a != c && a != d && b != c && b != d && c != d {
                        want.push(cross_ratio(&m, [point(a), point(b), point(c), point(d)]).unwrap());
                    }
                }
            }
        }
    }
    let mut got: Vec<f64> = r.samples.iter().map(|s| s.0).collect();
    got.sort_by(f64::total_cmp);
    want.sort_by(f64::total_cmp);
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() <= 1e-12 * w);
    }
}

#[test]
fn snowflake_exponent_is_recovered() {
    let m = plane(5, 25);
    for p in [0.25, 0.5, 2.0] {
        let r = qs_distortion(&m, &m.map(|v| v.powf(p)), 50_000, 2).unwrap();
        assert!((r.fit.alpha - p).abs() < 1e-6, "{p}: {}", r.fit.alpha);
        assert!(r.fit.is_good());
    }
}

#[test]
fn relabelled_target_fails_the_quality_gate() {
    let m = plane(6, 30);
    let mut labels = m.labels().to_vec();
    labels.rotate_left(7);
    let shuffled = m.relabeled(labels).unwrap();
    let r = qs_distortion(&m, &shuffled, 50_000, 3).unwrap();
    assert!(!r.fit.is_good(), "{:?}", r.fit);
}

#[test]
fn budget_zero_is_rejected() {
    let m = plane(1, 5);
    assert!(matches!(qs_distortion(&m, &m, 0, 0), Err(Error::EmptyBudget)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // A larger multiplicative error never lowers the envelope.
    #[test]
    fn envelope_is_monotone(seed in 0u64..1000, bump in 0.0f64..2.0) {
        use rand::Rng;
        let mut rng = hyperbolization::rng(seed);
        let base: Vec<(f64, f64)> = (0..300)
            .map(|_| {
                let x: f64 = rng.random_range(-2.0..2.0);
                (x.exp(), (1.5 * x - rng.random_range(0.0..0.5)).exp())
            })
            .collect();
        let raised: Vec<(f64, f64)> = base.iter().map(|&(t, r)| (t, r * bump.exp())).collect();
        let a = fit_envelope(&base).unwrap();
        let b = fit_envelope(&raised).unwrap();
        prop_assert!((b.alpha - a.alpha).abs() < 1e-6);
        prop_assert!(b.c >= a.c * (1.0 - 1e-9));
    }
}
