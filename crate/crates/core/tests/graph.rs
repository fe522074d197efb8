use hyperbolization::hyper::{j_value, QhGraph};
use hyperbolization::prelude::*;
use hyperbolization::sampler::ladder_steps;

fn graded(res: f64, n: usize) -> SampledSpace {
    sample(&SamplerSpec::new(Family::HalfPlane, n, 0, 5).graded(res)).unwrap()
}

#[test]
fn vertical_distances_are_logarithmic() {
    let s = graded(0.08, 600);
    let g = QhGraph::new(&s, 0.1).unwrap();
    let at = |y: f64| s.nearest_interior(&[0.0, y]).unwrap();
    let k = g.dijkstra(at(1.0)).0;
    for y in [0.25, 2.0, 8.0] {
        assert!((k[at(y)] - y.ln().abs()).abs() < 0.01, "{y}: {}", k[at(y)]);
    }
}

#[test]
fn graph_dominates_j_up_to_sigma() {
    let sigma = 0.1;
    let s = graded(0.08, 400);
    let g = QhGraph::new(&s, sigma).unwrap();
    let k = g.apsp();
    let bd = s.bdist();
    for x in 0..s.n_interior() {
        for y in 0..s.n_interior() {
            assert!(k.get(x, y) >= j_value(s.dist(x, y), bd[x], bd[y]) - 3.0 * sigma);
        }
    }
}

#[test]
fn admission_rule_and_weights() {
    let s = graded(0.08, 300);
    let sigma = 0.1;
    let g = QhGraph::new(&s, sigma).unwrap();
    let bd = s.bdist();
    for i in 0..g.n() {
        for &(j, w) in g.neighbors(i) {
            let j = j as usize;
            let d = s.dist(i, j);
            assert!(d <= sigma * bd[i].min(bd[j]));
            assert!((w - 2.0 * d / (bd[i] + bd[j])).abs() < 1e-15);
        }
    }
    assert_eq!(ladder_steps(0.08), 10);
    assert_eq!(ladder_steps(0.5), 2);
}

#[test]
fn sparse_sample_is_reported_disconnected() {
    let s = sample(&SamplerSpec::new(Family::HalfPlane, 20, 2, 1)).unwrap();
    match QhGraph::new(&s, 0.05) {
        Err(Error::InsufficientSampling(parts)) => assert!(parts.len() > 1),
        other => panic!("expected a disconnection error, got {:?}", other.map(|g| g.n())),
    }
}

#[test]
fn uniformity_of_the_half_plane_is_moderate() {
    let s = graded(0.08, 3000);
    let g = QhGraph::new(&s, 0.1).unwrap();
    let u = uniformity_estimate(&s, &g, 300, 1).unwrap();
    assert!(u.a_hat >= 1.0 && u.a_hat < 4.0, "{}", u.a_hat);
}
