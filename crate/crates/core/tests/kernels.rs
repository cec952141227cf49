use thinfilm::experiments::kernel_checks::{log_space, multiplier_check};
use thinfilm::geometry::Point;
use thinfilm::kernels::*;

#[test]
fn closed_forms_match_oracles() {
    for a in log_space(1e-3, 1e3, 50) {
        let g = gamma(a).unwrap();
        let t = theta(a).unwrap();
        assert!(
            (g - gamma_quadrature_oracle(a).unwrap()).abs() <= 1e-6,
            "Gamma at {a}"
        );
        assert!(
            (t - theta_quadrature_oracle(a).unwrap()).abs() <= 1e-6,
            "Theta at {a}"
        );
    }
}

#[test]
fn kernel_limits_and_monotonicity() {
    assert_eq!(gamma(0.0).unwrap(), 0.0);
    assert_eq!(theta(0.0).unwrap(), 0.0);
    assert!((gamma(1e6).unwrap() - 1.0).abs() <= 1e-5);
    assert!((theta(1e6).unwrap() - 1.0).abs() <= 1e-5);
    assert_eq!(gamma(f64::INFINITY).unwrap(), 1.0);
    let xs = log_space(1e-6, 1e6, 400);
    for w in xs.windows(2) {
        assert!(gamma(w[1]).unwrap() >= gamma(w[0]).unwrap());
        assert!(theta(w[1]).unwrap() >= theta(w[0]).unwrap());
    }
    for &x in &xs {
        let (g, t) = (gamma(x).unwrap(), theta(x).unwrap());
        assert!((0.0..=1.0).contains(&g) && (0.0..=1.0).contains(&t));
    }
}

#[test]
fn negative_arguments_rejected() {
    assert!(gamma(-1e-12).is_err());
    assert!(theta(-1.0).is_err());
    assert!(gamma_quadrature_oracle(0.0).is_err());
}

#[test]
fn derivatives_match_finite_differences() {
    for a in [1e-2, 0.3, 1.0, 7.0, 50.0] {
        let d = 1e-6 * a;
        let fd_g = (gamma_unchecked(a + d) - gamma_unchecked(a - d)) / (2.0 * d);
        let fd_t = (theta_unchecked(a + d) - theta_unchecked(a - d)) / (2.0 * d);
        assert!((gamma_prime(a) - fd_g).abs() <= 1e-6 * (1.0 + fd_g.abs()));
        assert!((theta_prime(a) - fd_t).abs() <= 1e-6 * (1.0 + fd_t.abs()));
    }
}

#[test]
fn radial_integral_equals_thickness() {
    assert!((radial_gt_integral(1.0).unwrap() - 1.0).abs() <= 1e-8);
    assert!((radial_gt_integral(0.25).unwrap() - 0.25).abs() <= 1e-8);
}

#[test]
fn slab_kernel_forms_agree() {
    for r in [1e-3, 0.1, 1.0, 10.0] {
        for t in [0.01, 0.5] {
            let a = slab_kernel_gt(r, t).unwrap();
            let b = slab_kernel_gt_alt(r, t);
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300), "r {r} t {t}");
            assert!(a >= 0.0);
        }
    }
}

#[test]
fn newton_kernel_values() {
    let k = newton_kernel(Point::new(3.0, 4.0), 0.0).unwrap();
    assert!((k - 1.0 / (4.0 * std::f64::consts::PI * 5.0)).abs() <= 1e-15);
    assert!(newton_kernel(Point::new(0.0, 0.0), 0.0).is_err());
    let f = newton_kernel_fourier(2.0, 0.5).unwrap();
    assert!((f - (-1.0f64).exp() / (8.0 * std::f64::consts::PI)).abs() <= 1e-15);
}

#[test]
fn multiplier_taylor_bound_exact() {
    for r in multiplier_check(0.1).unwrap() {
        assert!(r.passed(), "{}: {} > {}", r.claim, r.lhs, r.rhs);
        assert!(r.lhs <= r.rhs);
    }
    assert!(thin_film_multiplier(Multiplier::Mu1, 1.0, 0.0, 0.1).is_err());
    assert!(Multiplier::from_index(4).is_err());
}

#[test]
fn kernel_table_interpolates() {
    let tab = KernelTable::new(1e-4, 1e4, 800);
    for a in log_space(2e-4, 5e3, 97) {
        assert!((tab.gamma(a) - gamma_unchecked(a)).abs() <= 1e-7);
        assert!((tab.theta(a) - theta_unchecked(a)).abs() <= 1e-7);
    }
}
