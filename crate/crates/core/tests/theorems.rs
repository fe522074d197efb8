use hyperbolization::distortion::{
    corollary1_report, theorem1_report, theorem2_report, Corollary1Params, GraphBoundaryParams, Theorem1Params,
    Theorem2Params,
};
use hyperbolization::prelude::*;

#[test]
fn theorem1_on_a_small_half_plane() {
    let s = sample(&SamplerSpec::new(Family::HalfPlane, 20, 20, 3)).unwrap();
    let r = theorem1_report(&s, &Theorem1Params { budget: 20_000, ..Default::default() }).unwrap();
    assert!(r.delta <= 4f64.ln());
    assert!(r.epsilon <= 0.02);
    assert!(r.alpha_ok, "{} vs {}", r.distortion.fit.alpha, r.expected_alpha);
    assert!(r.control.unwrap().rejected);
}

#[test]
fn bounded_spaces_are_refused() {
    let s = sample(&SamplerSpec::new(Family::CuspDomain, 20, 6, 3)).unwrap();
    let r = theorem1_report(&s, &Theorem1Params::default());
    assert!(matches!(r, Err(Error::Precondition(_))));
}

#[test]
fn corollary1_rough_similarity_constant() {
    let s = sample(&SamplerSpec::new(Family::ExteriorDisk, 30, 12, 5)).unwrap();
    let r = corollary1_report(&s, &Corollary1Params { budget: 20_000, ..Default::default() }).unwrap();
    assert!(r.rough.mu <= 2.0 * std::f64::consts::LN_2 + 1e-9);
    assert!(r.passed);
}

#[test]
fn cusp_refinement_warns() {
    let coarse = sample(&SamplerSpec::new(Family::CuspDomain, 200, 6, 1).graded(0.1)).unwrap();
    let fine = sample(&SamplerSpec::new(Family::CuspDomain, 400, 6, 1).graded(0.1)).unwrap();
    let params = Theorem2Params {
        graph: GraphBoundaryParams { sigma: 0.1, pair_budget: 300, ..Default::default() },
        ..Default::default()
    };
    let r = theorem2_report(&coarse, Some(&fine), &params).unwrap();
    assert!(r.uniformity_warning.is_some());
    assert!(r.passed.is_none());
}
