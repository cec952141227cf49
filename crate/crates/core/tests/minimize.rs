use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thinfilm::field_energy::{f_eps, Vec3};
use thinfilm::geometry::{DomainMask, Point, Shape};
use thinfilm::minimize::*;
use thinfilm::params::ParameterSet;
use thinfilm::{Error, Magnetization2D};

fn disk16() -> Arc<DomainMask> {
    Arc::new(DomainMask::with_cells(Shape::disk(Point::new(0.0, 0.0), 0.5).unwrap(), 16).unwrap())
}

fn dot(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x[0] * y[0] + x[1] * y[1] + x[2] * y[2])
        .sum()
}

#[test]
fn renormalize_cases() {
    let mask = disk16();
    let mut v = vec![[0.0; 3]; mask.len()];
    for k in mask.cells() {
        v[k] = [0.0, 3.0, 4.0];
    }
    let m = renormalize(mask.clone(), v.clone()).unwrap();
    let k0 = mask.cells()[0];
    assert!((m.values()[k0][2] - 0.8).abs() < 1e-15);
    v[k0] = [0.1, 0.1, 0.1];
    assert!(
        matches!(renormalize(mask.clone(), v.clone()), Err(Error::Retraction { cell, .. }) if cell == k0)
    );
    v[k0] = [f64::NAN, 0.0, 1.0];
    assert!(renormalize(mask, v).is_err());
}

#[test]
fn uniform_states_are_critical() {
    let p = ParameterSet::derive(1e-2, 2.0).unwrap();
    for m in [
        Magnetization2D::uniform_up(disk16()),
        Magnetization2D::uniform_down(disk16()),
    ] {
        let g = gradient_f(&m, &p).unwrap();
        assert!(dot(&g, &g).sqrt() < 1e-12);
    }
}

#[test]
fn gradient_matches_central_differences() {
    let p = ParameterSet::derive(1e-2, 2.0).unwrap();
    let mask = disk16();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let m = Magnetization2D::from_fn(mask.clone(), |x| {
        let z = (4.0 * x.x + 1.0).sin() * 0.8;
        let r = (1.0 - z * z).sqrt();
        [r * (3.0 * x.y).cos(), r * (3.0 * x.y).sin(), z]
    })
    .unwrap();
    let g = gradient_f(&m, &p).unwrap();
    let energy = |v: &[Vec3]| {
        f_eps(&renormalize(mask.clone(), v.to_vec()).unwrap(), &p)
            .unwrap()
            .f_eps
    };
    for _ in 0..20 {
        let mut dir = vec![[0.0; 3]; mask.len()];
        for k in mask.cells() {
            let r: Vec3 = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let mk = m.values()[k];
            let s = r[0] * mk[0] + r[1] * mk[1] + r[2] * mk[2];
            dir[k] = [r[0] - s * mk[0], r[1] - s * mk[1], r[2] - s * mk[2]];
        }
        let t = 1e-5;
        let shift = |sgn: f64| -> Vec<Vec3> {
            m.values()
                .iter()
                .zip(&dir)
                .map(|(a, d)| {
                    [
                        a[0] + sgn * t * d[0],
                        a[1] + sgn * t * d[1],
                        a[2] + sgn * t * d[2],
                    ]
                })
                .collect()
        };
        let fd = (energy(&shift(1.0)) - energy(&shift(-1.0))) / (2.0 * t);
        let an = dot(&g, &dir);
        assert!((fd - an).abs() <= 1e-5 * an.abs(), "fd {fd} analytic {an}");
    }
}

#[test]
fn descent_is_monotone_and_deterministic() {
    let p = ParameterSet::derive(1e-2, 2.0).unwrap();
    let cfg = MinimizeConfig {
        max_iterations: 60,
        seed: 4,
        ..MinimizeConfig::default()
    };
    let run = || {
        let m0 = initial_field(&disk16(), &p, &cfg).unwrap();
        minimize(m0, &p, &cfg).unwrap()
    };
    let a = run();
    assert!(a.is_monotone());
    assert!(a.final_row().f_eps < a.initial_row().f_eps);
    for w in a.rows.windows(2) {
        assert!(w[1].f_eps <= w[0].f_eps);
    }
    let b = run();
    assert_eq!(a.rows, b.rows);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    a.write_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("iteration,f_eps,l_eps,n,bv,gradnorm,step"));
    assert_eq!(text.lines().count(), a.rows.len() + 1);
}

#[test]
fn converged_uniform_start_stays_put() {
    let p = ParameterSet::derive(1e-2, 2.0).unwrap();
    let cfg = MinimizeConfig {
        init: InitKind::UniformUp,
        ..MinimizeConfig::default()
    };
    let m0 = initial_field(&disk16(), &p, &cfg).unwrap();
    let tr = minimize(m0, &p, &cfg).unwrap();
    assert_eq!(tr.termination, Termination::Converged);
    assert_eq!(tr.final_row().f_eps, 0.0);
    assert_eq!(tr.termination.to_string(), "converged");
}

#[test]
fn config_validation_and_parsing() {
    let bad = MinimizeConfig {
        backtrack_factor: 1.5,
        ..MinimizeConfig::default()
    };
    assert!(bad.validate().is_err());
    let bad = MinimizeConfig {
        grad_tol: 0.0,
        ..MinimizeConfig::default()
    };
    assert!(bad.validate().is_err());
    let cfg: MinimizeConfig =
        toml::from_str("max_iterations = 5\ninit = { kind = \"bubble\", radius = 0.2 }").unwrap();
    assert_eq!(cfg.init, InitKind::Bubble { radius: 0.2 });
    assert!(toml::from_str::<MinimizeConfig>("unknown = 1").is_err());
}

#[test]
fn snapshot_start_requires_matching_grid() {
    let p = ParameterSet::derive(1e-2, 2.0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.field");
    Magnetization2D::uniform_down(disk16())
        .write_snapshot(&path, &p)
        .unwrap();
    let cfg = MinimizeConfig {
        init: InitKind::FromSnapshot { path: path.clone() },
        ..MinimizeConfig::default()
    };
    let m = initial_field(&disk16(), &p, &cfg).unwrap();
    assert_eq!(m.m3()[disk16().cells()[0]], -1.0);
    let other = Arc::new(DomainMask::with_cells(Shape::unit_square(), 16).unwrap());
    assert!(matches!(
        initial_field(&other, &p, &cfg),
        Err(Error::Snapshot(_))
    ));
}
