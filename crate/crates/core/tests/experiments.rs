use std::sync::Arc;

use thinfilm::experiments::*;
use thinfilm::field_energy::guard::LOWER_BOUND_CONSTANT;
use thinfilm::geometry::{DomainMask, Point, Shape};
use thinfilm::params::ParameterSet;
use thinfilm::Magnetization2D;

fn small_config() -> ExperimentConfig {
    ExperimentConfig::from_toml(
        r#"
seed = 3
[domain]
cells = 16
[solver]
max_iterations = 30
[starts]
random = 1
[onset]
epsilons = [1e-2]
cells = 16
[interpolation]
fields = 4
sharpness_epsilons = [0.1]
"#,
    )
    .unwrap()
}

#[test]
fn check_record_semantics() {
    let ok = CheckRecord::check("a", "ref", 1.0, 1.0, 0.0);
    assert_eq!(ok.verdict, Verdict::Pass);
    assert_eq!(ok.margin, 0.0);
    let tol = CheckRecord::check("a", "ref", 1.05, 1.0, 0.1);
    assert!(tol.passed());
    let bad = CheckRecord::check("a", "ref", 2.0, 1.0, 0.5);
    assert_eq!(bad.verdict, Verdict::Fail);
    let rep = CheckRecord::report("a", "ref", 2.0, 1.0);
    assert_eq!(rep.verdict, Verdict::ReportOnly);
    assert!(rep.passed());
}

#[test]
fn constant_field_has_zero_interpolation_terms() {
    let mask = Arc::new(
        DomainMask::with_cells(Shape::disk(Point::new(0.0, 0.0), 1.0).unwrap(), 24).unwrap(),
    );
    let f: Vec<f64> = mask
        .inside()
        .iter()
        .map(|&b| if b { 0.7 } else { 0.0 })
        .collect();
    let r = check_interpolation(mask, &f, 0.01, 1.0, 1e-3).unwrap();
    assert_eq!(r.lhs, 0.0);
    assert_eq!(r.rhs, 0.0);
    assert!(r.passed());
}

#[test]
fn interpolation_holds_on_random_fields() {
    let res = interpolation_suite(&small_config()).unwrap();
    let hard: Vec<_> = res
        .checks
        .iter()
        .filter(|c| c.verdict != Verdict::ReportOnly)
        .collect();
    assert_eq!(hard.len(), 4 * 3);
    assert!(res.all_passed());
    assert!(hard.iter().all(|c| c.lhs > 0.0 && c.lhs <= c.rhs));
}

#[test]
fn uniform_field_bv_bound() {
    let p = ParameterSet::derive(1e-3, 2.0).unwrap();
    let mask = Arc::new(DomainMask::with_cells(Shape::unit_square(), 16).unwrap());
    let m = Magnetization2D::uniform_up(mask);
    let recs = check_bv_bounds(&m, &p, &BvOptions::default()).unwrap();
    let r = &recs[0];
    assert_eq!(r.lhs, 0.0);
    assert!((r.rhs - LOWER_BOUND_CONSTANT).abs() < 1e-12);
    assert!(recs.iter().all(CheckRecord::passed));
    assert!(recs.iter().any(|c| c.verdict == Verdict::ReportOnly));
}

#[test]
fn sandwich_fit() {
    assert!(fit_sandwich(&[]).is_none());
    let s = fit_sandwich(&[(1e-2, 2.0), (1e-2, 3.0), (1e-3, 2.5), (1e-3, 5.0)]).unwrap();
    assert_eq!(s.c_alpha, 2.0);
    assert_eq!(s.big_c_alpha, 5.0);
    assert_eq!(s.per_epsilon[0], (1e-2, 2.0, 3.0));
    let (lo, hi) = s.variation();
    assert!((lo - 1.25).abs() < 1e-15 && (hi - 5.0 / 3.0).abs() < 1e-15);
}

#[test]
fn classification_thresholds() {
    assert_eq!(Classification::of(0.0, 0.0, 1.0), Classification::Uniform);
    assert_eq!(
        Classification::of(-0.1, 0.5, 1.0),
        Classification::Patterned
    );
    assert_eq!(
        Classification::of(-0.1, 0.0, 1.0),
        Classification::Indeterminate
    );
}

#[test]
fn onset_table_is_deterministic() {
    let cfg = small_config();
    let a = onset_scan(&cfg, &SnapshotSink::default()).unwrap();
    let b = onset_scan(&cfg, &SnapshotSink::default()).unwrap();
    assert_eq!(a.table.to_csv().unwrap(), b.table.to_csv().unwrap());
    assert_eq!(a.table.rows.len(), 1);
    assert!(a.all_passed(), "{:?}", a.failures().collect::<Vec<_>>());
}

#[test]
fn results_written_and_snapshots_attached() {
    let dir = tempfile::tempdir().unwrap();
    let mut res = ExperimentResult::new("demo", Provenance::new(1, None), Table::new(&["x", "y"]));
    res.table.push(vec![1.0, 0.5]);
    let p = ParameterSet::derive(1e-2, 2.0).unwrap();
    let m = Magnetization2D::uniform_up(Arc::new(
        DomainMask::with_cells(Shape::unit_square(), 4).unwrap(),
    ));
    let mut recs = vec![
        CheckRecord::check("bad", "ref", 1.0, 0.0, 0.0),
        CheckRecord::check("ok", "ref", 0.0, 1.0, 0.0),
    ];
    SnapshotSink::new(Some(dir.path().join("snaps")))
        .attach("demo", &m, &p, &mut recs)
        .unwrap();
    assert!(recs[0].snapshot.as_ref().unwrap().exists());
    assert!(recs[1].snapshot.is_none());
    res.checks = recs;
    res.write(dir.path()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("table.csv")).unwrap();
    assert_eq!(csv, "x,y\n1.000000000000e0,5.000000000000e-1\n");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("results.json")).unwrap())
            .unwrap();
    assert_eq!(json["checks"][0]["verdict"], "fail");
    assert_eq!(json["experiment"], "demo");
}

#[test]
fn config_rejects_bad_input() {
    assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
    assert!(ExperimentConfig::from_toml("epsilon = 2.0").is_err());
    assert!(ExperimentConfig::from_toml("[sweep]\nepsilons = [1e-3, 1e-2]").is_err());
    let c = ExperimentConfig::from_toml(
        "[domain.shape]\nkind = \"rectangle\"\nlo = [0, 0]\nhi = [2, 1]",
    )
    .unwrap();
    let s = c.domain.shape.with_diameter(1.0).unwrap();
    assert!((s.diameter() - 1.0).abs() < 1e-12);
    assert_eq!(
        ExperimentConfig::default(),
        ExperimentConfig::from_toml("").unwrap()
    );
}

#[test]
fn kernel_suite_passes() {
    let res = kernel_check().unwrap();
    assert!(res.all_passed());
    assert_eq!(res.table.rows.len(), 50);
}
