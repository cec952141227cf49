//! Closed-form kernels against their quadrature oracles, and the Taylor bound
//! on the thin-film multipliers.

use super::{CheckRecord, ExperimentResult, Provenance, Table};
use crate::error::Result;
use crate::kernels::{
    gamma, gamma_quadrature_oracle, radial_gt_integral, theta, theta_quadrature_oracle,
    thin_film_multiplier, Multiplier,
};

pub const KERNEL_TOL: f64 = 1e-6;
pub const LIMIT_TOL: f64 = 1e-5;
pub const RADIAL_TOL: f64 = 1e-8;

/// `n` log-spaced points in [lo, hi].
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp())
        .collect()
}

/// Γ, Θ vs oracle on 50 log-spaced α ∈ [1e-3, 1e3], the values at 0 and
/// at α = 1e6, and the radial integral at t = 1.
pub fn kernel_check() -> Result<ExperimentResult> {
    let mut table = Table::new(&["alpha", "gamma", "gamma_oracle", "theta", "theta_oracle"]);
    let mut res = ExperimentResult::new("kernels", Provenance::new(0, None), Table::default());
    for a in log_space(1e-3, 1e3, 50) {
        let (g, go) = (gamma(a)?, gamma_quadrature_oracle(a)?);
        let (t, to) = (theta(a)?, theta_quadrature_oracle(a)?);
        table.push(vec![a, g, go, t, to]);
        res.checks.push(CheckRecord::check(
            format!("|Gamma - oracle| at alpha={a:.6e}"),
            "Gamma closed form equals its defining integral",
            (g - go).abs(),
            KERNEL_TOL,
            0.0,
        ));
        res.checks.push(CheckRecord::check(
            format!("|Theta - oracle| at alpha={a:.6e}"),
            "Theta closed form equals its defining integral",
            (t - to).abs(),
            KERNEL_TOL,
            0.0,
        ));
    }
    for (name, v) in [("Gamma(0)", gamma(0.0)?), ("Theta(0)", theta(0.0)?)] {
        res.checks.push(CheckRecord::check(
            name,
            "kernels vanish at 0",
            v.abs(),
            0.0,
            0.0,
        ));
    }
    for (name, v) in [("Gamma(1e6)", gamma(1e6)?), ("Theta(1e6)", theta(1e6)?)] {
        res.checks.push(CheckRecord::check(
            format!("|{name} - 1|"),
            "kernels tend to 1",
            (v - 1.0).abs(),
            LIMIT_TOL,
            0.0,
        ));
    }
    let i = radial_gt_integral(1.0)?;
    res.checks.push(CheckRecord::check(
        "|int_0^inf (1 - rho/sqrt(1+rho^2)) drho - 1|",
        "radial slab-kernel integral equals t",
        (i - 1.0).abs(),
        RADIAL_TOL,
        0.0,
    ));
    res.checks.extend(multiplier_check(0.1)?);
    res.table = table;
    Ok(res)
}

/// |μᵢ(ξ, x₃) − δ_{i3}| ≤ |ξ|t on 20 |ξ| × 20 x₃ × 3 multipliers, no tolerance.
/// One record per multiplier holding the worst ratio.
pub fn multiplier_check(t: f64) -> Result<Vec<CheckRecord>> {
    let xis = log_space(1e-3, 1e3, 20);
    let x3s: Vec<f64> = (0..20).map(|j| t * (j as f64 + 0.5) / 20.0).collect();
    let mut out = Vec::new();
    for mu in Multiplier::ALL {
        let mut worst = (f64::NEG_INFINITY, 0.0, 0.0, 0.0);
        for &xi in &xis {
            for &x3 in &x3s {
                let dev = (thin_film_multiplier(mu, xi, x3, t)? - mu.delta3()).abs();
                let margin = xi * t - dev;
                if worst.0 == f64::NEG_INFINITY || margin < worst.3 {
                    worst = (dev, xi * t, xi, margin);
                }
            }
        }
        out.push(
            CheckRecord::check(
                format!("|{mu:?} - delta_i3| <= |xi| t (worst sample)"),
                "Taylor bound on the thin-film multipliers",
                worst.0,
                worst.1,
                0.0,
            )
            .with_note(format!("attained at |xi| = {:.6e}", worst.2)),
        );
    }
    Ok(out)
}
