use std::f64::consts::PI;
use std::path::Path;

use proptest::prelude::*;

use slepkit::sphgeom::{
    enclosing_cap, great_circle_distance, load_region, parse_region, pole_alignment, rotate_point, rotate_region,
};
use slepkit::{Cap, EulerZYZ, Region, SlepError, SphPoint};

fn data(name: &str) -> String {
    format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn vertices(r: &Region) -> Vec<SphPoint> {
    r.loops().iter().flat_map(|l| l.vertices().to_vec()).collect()
}

fn euler_strategy() -> impl Strategy<Value = EulerZYZ> {
    (0.0..2.0 * PI, 0.0..PI, 0.0..2.0 * PI).prop_map(|(a, b, c)| EulerZYZ::new(a, b, c))
}

/// A polygon that is star-shaped about the north pole, then moved.
fn star_polygon(radii: &[f64], e: &EulerZYZ) -> Region {
    let n = radii.len();
    let pts = radii
        .iter()
        .enumerate()
        .map(|(k, &r)| rotate_point(e, &SphPoint::new(r, 2.0 * PI * k as f64 / n as f64)))
        .collect();
    Region::from_loops(vec![pts]).unwrap()
}

#[test]
fn distance_examples() {
    assert!((great_circle_distance(&SphPoint::NORTH, &SphPoint::SOUTH) - PI).abs() < 1e-15);
    let a = SphPoint::new(PI / 2.0, 0.0);
    let b = SphPoint::new(PI / 2.0, PI / 2.0);
    assert!((great_circle_distance(&a, &b) - PI / 2.0).abs() < 1e-15);
    assert_eq!(great_circle_distance(&a, &a), 0.0);
}

#[test]
fn euler_examples() {
    let p = SphPoint::new(1.2, 0.4);
    let q = rotate_point(&EulerZYZ::IDENTITY, &p);
    assert!(great_circle_distance(&p, &q) < 1e-15);
    let q = rotate_point(&EulerZYZ::new(0.0, 0.8, 0.0), &SphPoint::NORTH);
    assert!((q.theta - 0.8).abs() < 1e-15 && q.phi.abs() < 1e-15);
}

#[test]
fn enclosing_cap_examples() {
    let circle: Vec<SphPoint> = (0..72)
        .map(|k| SphPoint::new(20f64.to_radians(), 2.0 * PI * k as f64 / 72.0))
        .collect();
    let cap = enclosing_cap(&Region::from_loops(vec![circle]).unwrap()).unwrap();
    assert!(great_circle_distance(&cap.center, &SphPoint::NORTH) < 1e-6);
    assert!((cap.radius_theta - 20f64.to_radians()).abs() < 1e-4);

    let sliver = vec![
        SphPoint::new(PI / 2.0, 0.0),
        SphPoint::new(PI / 2.0 - 0.01, PI / 4.0),
        SphPoint::new(PI / 2.0, PI / 2.0),
        SphPoint::new(PI / 2.0 + 0.01, PI / 4.0),
    ];
    let cap = enclosing_cap(&Region::from_loops(vec![sliver]).unwrap()).unwrap();
    assert!((cap.radius_theta - PI / 4.0).abs() < 1e-9);
    assert!(great_circle_distance(&cap.center, &SphPoint::new(PI / 2.0, PI / 4.0)) < 1e-9);

    let aus = load_region(data("australia.txt")).unwrap();
    let cap = enclosing_cap(&aus).unwrap();
    assert!((cap.fraction() - 0.025).abs() <= 0.005, "{}", cap.fraction());
}

#[test]
fn alignment_examples() {
    for center in [SphPoint::NORTH, SphPoint::new(0.9, 0.0), SphPoint::new(0.6, 2.1)] {
        let cap = Cap::new(center, 0.3).unwrap();
        let moved = rotate_point(&pole_alignment(&cap), &center);
        assert!(moved.theta <= 1e-10);
    }
    for name in ["australia.txt", "south_america.txt"] {
        let region = load_region(data(name)).unwrap();
        let cap = enclosing_cap(&region).unwrap();
        let rotated = rotate_region(&region, &pole_alignment(&cap));
        for v in vertices(&rotated) {
            assert!(v.theta <= cap.radius_theta + 1e-9);
        }
        assert!((rotated.area() - region.area()).abs() <= 1e-9 * region.area());
    }
}

#[test]
fn containment_examples() {
    let circle: Vec<SphPoint> = (0..72)
        .map(|k| SphPoint::new(20f64.to_radians(), 2.0 * PI * k as f64 / 72.0))
        .collect();
    let r = Region::from_loops(vec![circle.clone()]).unwrap();
    assert!(r.contains(&SphPoint::NORTH));
    assert!(!r.contains(&SphPoint::SOUTH));
    assert!(r.contains(&circle[5]));
}

#[test]
fn area_examples() {
    let r = Region::cap_polygon(&Cap::polar(PI / 3.0).unwrap(), 2000).unwrap();
    assert!((r.area() - PI).abs() < 1e-3 * PI);
    let octant = vec![SphPoint::new(0.0, 0.0), SphPoint::new(PI / 2.0, 0.0), SphPoint::new(PI / 2.0, PI / 2.0)];
    let r = Region::from_loops(vec![octant]).unwrap();
    assert!((r.area() - PI / 2.0).abs() < 1e-9);
    let aus = load_region(data("australia.txt")).unwrap();
    let frac = aus.area() / (4.0 * PI);
    assert!((frac - 0.0154).abs() <= 0.002, "{frac}");
}

#[test]
fn boundary_errors_name_the_line() {
    let bowtie = "0 0\n0 10\n10 0\n10 10\n";
    match parse_region(bowtie, Path::new("bow.txt")) {
        Err(e @ SlepError::Parse { .. }) => {
            let s = e.to_string();
            assert!(s.starts_with("bow.txt:"), "{s}");
            assert!(s.contains("non-simple"), "{s}");
        }
        other => panic!("{other:?}"),
    }
    let err = parse_region("0 0\n0 10\nx 5\n", Path::new("b.txt")).unwrap_err();
    assert!(err.to_string().starts_with("b.txt:3:"), "{err}");
    let err = parse_region("0 0\n0 10\n95 5\n", Path::new("b.txt")).unwrap_err();
    assert!(err.to_string().starts_with("b.txt:3:"), "{err}");
    assert!(load_region("/nonexistent/boundary.txt").is_err());
}

#[test]
fn degenerate_boundary_rejected() {
    let p = SphPoint::new(1.0, 1.0);
    assert!(Region::from_loops(vec![vec![p, p, p]]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rotation_preserves_distances(
        e in euler_strategy(),
        a in (0.0..PI, 0.0..2.0 * PI),
        b in (0.0..PI, 0.0..2.0 * PI),
    ) {
        let (p, q) = (SphPoint::new(a.0, a.1), SphPoint::new(b.0, b.1));
        let d = great_circle_distance(&p, &q);
        let d2 = great_circle_distance(&rotate_point(&e, &p), &rotate_point(&e, &q));
        prop_assert!((d - d2).abs() < 1e-12);
        let back = rotate_point(&e.inverse(), &rotate_point(&e, &p));
        prop_assert!(great_circle_distance(&p, &back) < 1e-12);
    }

    #[test]
    fn enclosing_cap_contains_every_vertex(
        radii in prop::collection::vec(0.05f64..0.7, 5..40),
        e in euler_strategy(),
    ) {
        let region = star_polygon(&radii, &e);
        let cap = enclosing_cap(&region).unwrap();
        let verts = vertices(&region);
        let mut far = 0.0f64;
        for (i, v) in verts.iter().enumerate() {
            prop_assert!(great_circle_distance(v, &cap.center) <= cap.radius_theta + 1e-9);
            for w in &verts[i + 1..] {
                far = far.max(great_circle_distance(v, w));
            }
        }
        // no cap can be smaller than half the diameter, and the cap around
        // the star center is an upper bound
        prop_assert!(cap.radius_theta >= far / 2.0 - 1e-9);
        let star = radii.iter().cloned().fold(0.0, f64::max);
        prop_assert!(cap.radius_theta <= star + 1e-9);

        let rotated = rotate_region(&region, &pole_alignment(&cap));
        for v in vertices(&rotated) {
            prop_assert!(v.theta <= cap.radius_theta + 1e-9);
        }
    }

    #[test]
    fn rotation_preserves_area_and_membership(
        radii in prop::collection::vec(0.05f64..0.7, 5..30),
        e in euler_strategy(),
        f in euler_strategy(),
    ) {
        let region = star_polygon(&radii, &e);
        let moved = rotate_region(&region, &f);
        prop_assert!((moved.area() - region.area()).abs() <= 1e-9 * region.area());
        let center = rotate_point(&e, &SphPoint::NORTH);
        prop_assert!(region.contains(&center));
        prop_assert!(moved.contains(&rotate_point(&f, &center)));
        let outside = center.antipode();
        prop_assert!(!moved.contains(&rotate_point(&f, &outside)));
    }
}
