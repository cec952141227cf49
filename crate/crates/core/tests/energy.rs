use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thinfilm::field_energy::guard::{lower_bound, LOWER_BOUND_CONSTANT};
use thinfilm::field_energy::*;
use thinfilm::geometry::{DomainMask, Point, Shape};
use thinfilm::params::ParameterSet;

fn disk(cells: usize) -> Arc<DomainMask> {
    Arc::new(
        DomainMask::with_cells(Shape::disk(Point::new(0.0, 0.0), 0.5).unwrap(), cells).unwrap(),
    )
}

fn smooth_random(mask: Arc<DomainMask>, rng: &mut ChaCha8Rng) -> Magnetization2D {
    let (kx, ky, ph) = (
        rng.gen_range(-8.0..8.0),
        rng.gen_range(-8.0..8.0),
        rng.gen_range(0.0..6.3),
    );
    let amp: f64 = rng.gen_range(0.0..1.0);
    Magnetization2D::from_fn(mask, |p| {
        let z = amp * (kx * p.x + ky * p.y + ph).sin();
        let r = (1.0 - z * z).sqrt();
        let a = 3.0 * p.x - 2.0 * p.y;
        [r * a.cos(), r * a.sin(), z]
    })
    .unwrap()
}

#[test]
fn uniform_states_have_zero_energy() {
    let p = ParameterSet::derive(1e-2, 2.0).unwrap();
    for m in [
        Magnetization2D::uniform_up(disk(24)),
        Magnetization2D::uniform_down(disk(24)),
    ] {
        let b = f_eps(&m, &p).unwrap();
        assert_eq!(b.l_eps, 0.0);
        assert!(b.n.abs() < 1e-12);
        assert!(b.f_eps.abs() < 1e-12);
        assert_eq!(b.bv_norm, 0.0);
    }
}

#[test]
fn local_and_nonlocal_parts_nonnegative() {
    let p = ParameterSet::derive(1e-3, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let m = Magnetization2D::random_unit(disk(20), &mut rng);
        let b = f_eps(&m, &p).unwrap();
        assert!(b.l_eps >= 0.0 && b.n >= 0.0 && b.mm_gap >= -1e-12);
        assert!((b.f_eps - (b.l_eps - b.n)).abs() <= 1e-12 * b.l_eps.max(1.0));
        assert!((b.l_eps - (b.exchange + b.anisotropy)).abs() <= 1e-12 * b.l_eps);
        let area = m.mask().area().unwrap();
        assert!(b.f_eps >= lower_bound(area));
    }
}

#[test]
fn finite_range_drops_only_nonnegative_terms() {
    let p = ParameterSet::derive(1e-2, 2.0).unwrap();
    let m = Magnetization2D::from_m3(disk(32), |x| (6.0 * x.x).tanh(), |x| (x.y, -x.x)).unwrap();
    let b = f_eps(&m, &p).unwrap();
    let mut prev = f64::INFINITY;
    for r in [0.05, 0.2, 0.5, 2.0] {
        let fr = f_eps_finite_range(&m, &p, r).unwrap();
        assert!(fr >= b.f_eps - 1e-10 * b.l_eps);
        assert!(fr <= prev + 1e-10 * b.l_eps);
        prev = fr;
    }
    assert!((prev - b.f_eps).abs() <= 1e-9 * b.l_eps);
    assert!(f_eps_finite_range(&m, &p, 0.0).is_err());
}

#[test]
fn g_eps_nonnegative_on_random_fields() {
    let p = ParameterSet::derive(1e-2, 2.0).unwrap();
    let mask = disk(16);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..100 {
        let m = if i % 2 == 0 {
            Magnetization2D::random_unit(mask.clone(), &mut rng)
        } else {
            smooth_random(mask.clone(), &mut rng)
        };
        let g = g_eps(&m, &p).unwrap();
        assert!(g.total() >= -1e-8, "field {i}: G = {}", g.total());
        assert!(g.gamma_deficit >= -1e-12 && g.exterior >= 0.0 && g.theta_divergence >= -1e-12);
    }
}

#[test]
fn e_eps_is_f_plus_g() {
    let p = ParameterSet::derive(1e-2, 2.0).unwrap();
    let m = smooth_random(disk(16), &mut ChaCha8Rng::seed_from_u64(3));
    let b = e_eps(&m, &p).unwrap();
    let g = b.g_eps.unwrap();
    assert!((b.e_eps.unwrap() - b.f_eps - g.total()).abs() < 1e-12 * b.l_eps.max(1.0));
    assert!(g.exterior_tail_bound >= 0.0);
    assert_eq!(
        g.exterior_radius,
        EXTERIOR_RADIUS_FACTOR * m.mask().diameter()
    );
}

#[test]
fn model_gradient_matches_breakdown() {
    let p = ParameterSet::derive(1e-2, 2.0).unwrap();
    let m = smooth_random(disk(16), &mut ChaCha8Rng::seed_from_u64(5));
    let model = EnergyModel::new(m.mask_arc().clone(), p).unwrap();
    let fv = model.f_eps(&m).unwrap();
    let (fv2, g) = model.f_eps_with_gradient(&m).unwrap();
    let b = f_eps(&m, &p).unwrap();
    assert!((fv.f - b.f_eps).abs() < 1e-12 * b.l_eps);
    assert_eq!(fv.f, fv2.f);
    assert_eq!(g.len(), m.mask().len());
}

#[test]
fn lower_bound_constant_value() {
    let c = std::f64::consts::PI.powi(2) * std::f64::consts::E / 4.0;
    assert!((LOWER_BOUND_CONSTANT - c).abs() < 1e-15);
    assert!((lower_bound(2.0) + 2.0 * (c + 0.01)).abs() < 1e-14);
}

#[test]
fn invalid_fields_rejected() {
    let mask = disk(8);
    let n = mask.len();
    assert!(Magnetization2D::from_values(mask.clone(), vec![[0.0, 0.0, 0.5]; n]).is_err());
    assert!(Magnetization2D::from_values(mask.clone(), vec![[0.0, 0.0, 1.0]; n - 1]).is_err());
    assert!(Magnetization2D::uniform(mask, [1.0, 1.0, 0.0]).is_err());
}

#[test]
fn snapshot_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.field");
    let p = ParameterSet::derive(1e-3, 3.0).unwrap();
    let m = smooth_random(disk(12), &mut ChaCha8Rng::seed_from_u64(11));
    m.write_snapshot(&path, &p).unwrap();
    assert!(thinfilm::field_energy::field::sidecar_path(&path).exists());
    let (m2, p2) = Magnetization2D::read_snapshot(&path).unwrap();
    assert_eq!(p2, p);
    assert_eq!(m2.values(), m.values());
    assert_eq!(m2.mask(), m.mask());
    std::fs::write(&path, b"garbage").unwrap();
    assert!(Magnetization2D::read_snapshot(&path).is_err());
}
