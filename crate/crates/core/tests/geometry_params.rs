use thinfilm::geometry::{DomainMask, Point, Shape};
use thinfilm::params::{onset_asymptote, onset_threshold, ParameterSet};
use thinfilm::Error;

#[test]
fn parameters_derive_consistently() {
    let p = ParameterSet::derive(1e-3, 2.0).unwrap();
    assert!((p.log_eps - 1e3f64.ln()).abs() < 1e-12);
    assert!((p.omega * p.s_over_t - 1.0).abs() < 1e-12);
    assert!((p.d_over_s * p.s_over_t - p.d_over_t).abs() < 1e-12 * p.d_over_t);
    assert!(ParameterSet::derive(0.0, 2.0).is_err());
    assert!(ParameterSet::derive(1.0, 2.0).is_err());
    assert!(ParameterSet::derive(0.1, 1.0).is_err());
    assert!(p.below_guard(1e-2));
}

#[test]
fn onset_threshold_values() {
    let t = onset_threshold(1e-3).unwrap();
    assert!((t - onset_asymptote() * (1.0 - 2.0 / 1e3f64.ln())).abs() < 1e-14);
    assert!(onset_threshold(1e-2).unwrap() < t);
    assert!(onset_threshold(1e-12).unwrap() < onset_asymptote());
    assert!(matches!(
        onset_threshold(0.2),
        Err(Error::ThresholdNonpositive(_))
    ));
    assert!(onset_threshold(0.0).is_err());
}

#[test]
fn shapes_validate() {
    assert!(Shape::disk(Point::new(0.0, 0.0), 0.0).is_err());
    assert!(Shape::rectangle(Point::new(1.0, 0.0), Point::new(0.0, 1.0)).is_err());
    let bow = vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 1.0),
        Point::new(1.0, 0.0),
        Point::new(0.0, 1.0),
    ];
    assert!(Shape::convex_polygon(bow).is_err());
    let tri = Shape::convex_polygon(vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(0.0, 1.0),
    ])
    .unwrap();
    assert!((tri.area() - 0.5).abs() < 1e-14);
    assert!((tri.diameter() - 2f64.sqrt()).abs() < 1e-14);
}

#[test]
fn disk_mask_measures_converge() {
    let d = Shape::disk(Point::new(0.3, -0.2), 1.0).unwrap();
    let m = DomainMask::with_cells(d.clone(), 256).unwrap();
    assert!((m.area().unwrap() - std::f64::consts::PI).abs() < 0.02);
    assert!((d.perimeter() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    assert!((d.diameter() - 2.0).abs() < 1e-12);
    assert!(d.contains(Point::new(0.3, -0.2)));
    assert!((d.signed_distance(Point::new(0.3, -0.2)) - 1.0).abs() < 1e-12);
    for k in m.cells() {
        assert!(d.contains(m.center(k)));
    }
}

#[test]
fn degenerate_grids_rejected() {
    let sq = Shape::unit_square();
    assert!(DomainMask::with_cells(sq.clone(), 0).is_err());
    assert!(DomainMask::new(sq, -0.1).is_err());
}
