use hyperbolization::io::{load_matrix, load_space, parse_space_csv, save_matrix, save_space};
use hyperbolization::prelude::*;

#[test]
fn analytic_boundary_distances() {
    let s = sample(&SamplerSpec::new(Family::HalfPlane, 100, 5, 7)).unwrap();
    assert_eq!(s.n_interior(), 100);
    for (i, site) in s.interior().iter().enumerate() {
        let c = site.coords.as_ref().unwrap();
        assert!(c[1] > 0.0);
        assert_eq!(s.bdist()[i], c[1]);
    }
    let p = sample(&SamplerSpec::new(Family::PuncturedPlane, 50, 1, 7)).unwrap();
    for (i, site) in p.interior().iter().enumerate() {
        let c = site.coords.as_ref().unwrap();
        assert!((p.bdist()[i] - c[0].hypot(c[1])).abs() < 1e-15);
    }
    let e = sample(&SamplerSpec::new(Family::ExteriorDisk, 50, 4, 7)).unwrap();
    for (i, site) in e.interior().iter().enumerate() {
        let c = site.coords.as_ref().unwrap();
        assert!((e.bdist()[i] - (c[0].hypot(c[1]) - 1.0)).abs() < 1e-15);
    }
}

#[test]
fn cusp_distance_against_dense_boundary() {
    // 10^4 points on the boundary of {0 < y < x^2, x < 1}.
    let n = 10_000;
    let mut bnd = Vec::with_capacity(n);
    for k in 0..n {
        let s = 3.0 * k as f64 / n as f64;
        bnd.push(if s < 1.0 {
            [s, 0.0]
        } else if s < 2.0 {
            [1.0, s - 1.0]
        } else {
            let t = 3.0 - s;
            [t, t * t]
        });
    }
    let s = sample(&SamplerSpec::new(Family::CuspDomain, 200, 6, 7)).unwrap();
    for (i, site) in s.interior().iter().enumerate() {
        let c = site.coords.as_ref().unwrap();
        assert!(c[0] > 0.0 && c[0] < 1.0 && c[1] > 0.0 && c[1] < c[0] * c[0]);
        let oracle = bnd
            .iter()
            .map(|b| (b[0] - c[0]).hypot(b[1] - c[1]))
            .fold(f64::INFINITY, f64::min);
        // The analytic value is exact; the oracle overestimates by at most
        // half the sample spacing along the arc.
        assert!(s.bdist()[i] <= oracle + 1e-12);
        assert!(oracle - s.bdist()[i] <= 3e-4, "{} vs {oracle}", s.bdist()[i]);
    }
}

#[test]
fn graded_sampling_reaches_the_boundary() {
    for f in [Family::HalfPlane, Family::PuncturedPlane, Family::ExteriorDisk, Family::SlitPlane] {
        let spec = SamplerSpec::new(f, 800, 4, 3).graded(0.2);
        let s = sample(&spec).unwrap();
        let min = s.bdist().iter().copied().fold(f64::INFINITY, f64::min);
        assert!(min <= spec.extent * 2f64.powi(-8), "{f:?}: {min}");
    }
}

#[test]
fn infeasible_specs_are_errors() {
    assert!(sample(&SamplerSpec::new(Family::HalfPlane, 3, 2, 0)).is_err());
    assert!(sample(&SamplerSpec::new(Family::HalfPlane, 10, 2, 0).with_extent(-1.0)).is_err());
    assert!(sample(&SamplerSpec::new(Family::ExteriorDisk, 10, 2, 0).with_extent(0.5)).is_err());
}

#[test]
fn space_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let s = sample(&SamplerSpec::new(Family::SlitPlane, 40, 6, 11)).unwrap();
    let json = dir.path().join("s.json");
    save_space(&s, &json).unwrap();
    assert_eq!(load_space(&json).unwrap(), s);
    let csv = dir.path().join("s.csv");
    save_space(&s, &csv).unwrap();
    assert_eq!(load_space(&csv).unwrap(), s);
}

#[test]
fn table_space_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let s = sample(&SamplerSpec::new(Family::HalfPlane, 8, 3, 1)).unwrap();
    let n = s.n_interior() + s.n_boundary();
    let table = s.d_matrix(&(0..n).collect::<Vec<_>>());
    let t = SampledSpace::from_table(&table, &s.boundary_labels(), true).unwrap();
    let path = dir.path().join("t.json");
    save_space(&t, &path).unwrap();
    assert_eq!(load_space(&path).unwrap(), t);
}

#[test]
fn matrix_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let s = sample(&SamplerSpec::new(Family::ExteriorDisk, 15, 3, 2)).unwrap();
    let m = h_metric(&s);
    for name in ["m.csv", "m.json"] {
        let p = dir.path().join(name);
        save_matrix(&m, &p).unwrap();
        let back = load_matrix(&p).unwrap();
        assert_eq!(back.values(), m.values());
        assert_eq!(back.labels(), m.labels());
    }
}

#[test]
fn csv_without_labels_or_boundary() {
    let text = "x1,x2,role\n0,1,interior\n1,2,interior\n";
    assert!(matches!(parse_space_csv(text), Err(Error::NoBoundary)));
    let text = "# domain=half_plane\nx1,x2,role\n0,1,interior\n1,2,interior\n";
    let s = parse_space_csv(text).unwrap();
    assert_eq!(s.bdist(), &[1.0, 2.0]);
    assert_eq!(s.interior_labels(), ["x0", "x1"]);
}

#[test]
fn touching_boundary_is_rejected() {
    let text = "# domain=half_plane\nx1,x2,role\n0,1,interior\n1,0,interior\n";
    assert!(matches!(parse_space_csv(text), Err(Error::TouchesBoundary(_))));
}
