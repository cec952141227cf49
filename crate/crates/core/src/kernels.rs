//! Stray-field kernels of a film of finite thickness.
//!
//! Γ and Θ are evaluated in cancellation-free forms:
//!
//! * Γ(α) = 2α²(1 − α/S) = 2α² / (S(S + α)),  S = √(1+α²)
//! * Θ(α) = 2(α·asinh(1/α) + α² − α S) = 2α(asinh(1/α) − 1/(α + S))
//!
//! Θ is the normalized [0,t]² average of the Newton kernel,
//! ∬_{[0,t]²} K(x, x₃ − x₃′) = (t²/4π|x|)·Θ(|x|/t).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::quadrature::{integrate, integrate_semi_infinite, QuadOptions};

fn check_alpha(name: &'static str, alpha: f64) -> Result<()> {
    if alpha >= 0.0 {
        Ok(())
    } else {
        Err(Error::KernelDomain {
            name,
            value: alpha,
            reason: "argument must be nonnegative",
        })
    }
}

pub fn gamma(alpha: f64) -> Result<f64> {
    check_alpha("gamma", alpha)?;
    Ok(gamma_unchecked(alpha))
}

pub fn theta(alpha: f64) -> Result<f64> {
    check_alpha("theta", alpha)?;
    Ok(theta_unchecked(alpha))
}

#[inline]
pub fn gamma_unchecked(alpha: f64) -> f64 {
    if alpha.is_infinite() {
        return 1.0;
    }
    let s = alpha.hypot(1.0);
    2.0 * alpha * alpha / (s * (s + alpha))
}

#[inline]
pub fn theta_unchecked(alpha: f64) -> f64 {
    if alpha == 0.0 {
        return 0.0;
    }
    if alpha.is_infinite() {
        return 1.0;
    }
    if alpha < 1e-8 {
        // α·asinh(1/α) ≈ α(ln 2 − ln α); 1/(α + S) ≈ 1
        return 2.0 * alpha * (std::f64::consts::LN_2 - alpha.ln() - 1.0);
    }
    let s = alpha.hypot(1.0);
    2.0 * alpha * ((1.0 / alpha).asinh() - 1.0 / (alpha + s))
}

pub fn gamma_prime(alpha: f64) -> f64 {
    let s = alpha.hypot(1.0);
    let g = 1.0 / (s * (s + alpha));
    4.0 * alpha * g - 2.0 * alpha * alpha / (s * s * s)
}

pub fn theta_prime(alpha: f64) -> f64 {
    if alpha == 0.0 {
        return f64::INFINITY;
    }
    let s = alpha.hypot(1.0);
    2.0 * ((1.0 / alpha).asinh() - 2.0 / (s + alpha))
}

/// K(x, x₃) = 1/(4π√(|x|² + x₃²)).
pub fn newton_kernel(x: Point, x3: f64) -> Result<f64> {
    let r = x.norm().hypot(x3);
    if r == 0.0 {
        return Err(Error::KernelDomain {
            name: "newton_kernel",
            value: 0.0,
            reason: "singular at the origin",
        });
    }
    Ok(1.0 / (4.0 * PI * r))
}

/// K̂(ξ, x₃) = e^{−|x₃||ξ|}/(4π|ξ|).
pub fn newton_kernel_fourier(xi_mag: f64, x3: f64) -> Result<f64> {
    if !(xi_mag > 0.0) {
        return Err(Error::KernelDomain {
            name: "newton_kernel_fourier",
            value: xi_mag,
            reason: "singular at zero frequency",
        });
    }
    Ok((-x3.abs() * xi_mag).exp() / (4.0 * PI * xi_mag))
}

/// G_t(r) = (t²/4πr³)·Γ(r/t).
pub fn slab_kernel_gt(r: f64, t: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::KernelDomain {
            name: "slab_kernel_gt",
            value: r,
            reason: "singular at r = 0",
        });
    }
    if !(t > 0.0) {
        return Err(Error::Parameter(format!(
            "thickness t = {t} must be positive"
        )));
    }
    Ok(t * t / (4.0 * PI * r * r * r) * gamma_unchecked(r / t))
}

/// The same kernel written as (1/2πr)(1 − 1/√(1 + (t/r)²)).
pub fn slab_kernel_gt_alt(r: f64, t: f64) -> f64 {
    (1.0 - 1.0 / (t / r).hypot(1.0)) / (2.0 * PI * r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Multiplier {
    Mu1,
    Mu2,
    Mu3,
}

impl Multiplier {
    pub const ALL: [Multiplier; 3] = [Multiplier::Mu1, Multiplier::Mu2, Multiplier::Mu3];

    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Multiplier::Mu1),
            2 => Ok(Multiplier::Mu2),
            3 => Ok(Multiplier::Mu3),
            _ => Err(Error::Parameter(format!(
                "multiplier index {i} not in 1..=3"
            ))),
        }
    }

    /// Kronecker δ_{i3}.
    pub fn delta3(self) -> f64 {
        if self == Multiplier::Mu3 {
            1.0
        } else {
            0.0
        }
    }
}

/// Fourier multipliers μ₁, μ₂, μ₃ of the thin-film stray field at height x₃.
pub fn thin_film_multiplier(i: Multiplier, xi_mag: f64, x3: f64, t: f64) -> Result<f64> {
    if !(x3 > 0.0 && x3 < t) {
        return Err(Error::Parameter(format!("x3 = {x3} not in (0, {t})")));
    }
    if !(xi_mag >= 0.0) {
        return Err(Error::Parameter(format!("|xi| = {xi_mag} negative")));
    }
    let ea = (-xi_mag * (t - x3)).exp_m1();
    let eb = (-xi_mag * x3).exp_m1();
    Ok(match i {
        Multiplier::Mu1 => 0.5 * (ea + eb),
        Multiplier::Mu2 => 0.5 * (ea - eb),
        Multiplier::Mu3 => 1.0 + 0.5 * (ea + eb),
    })
}

fn oracle_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-11,
        max_intervals: 4000,
    }
}

/// ∬_{[0,1]²} f(u − v) du dv by nested adaptive quadrature with the
/// diagonal u = v as a breakpoint of the inner integral.
fn square_diff_integral<F: Fn(f64) -> f64>(f: F, opts: &QuadOptions) -> Result<f64> {
    let inner = |u: f64| integrate(|v: f64| f(u - v), &[0.0, u, 1.0], opts).value;
    integrate(inner, &[0.0, 0.5, 1.0], opts).strict(opts)
}

/// Γ(α) from 4πα³·G₁(α) with G₁ = −∬_{[0,1]²} ∂²_{x₃}K(α, u − v).
pub fn gamma_quadrature_oracle(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::KernelDomain {
            name: "gamma_quadrature_oracle",
            value: alpha,
            reason: "requires alpha > 0",
        });
    }
    let a2 = alpha * alpha;
    let kzz = |z: f64| {
        let r2 = a2 + z * z;
        (2.0 * z * z - a2) / (4.0 * PI * r2 * r2 * r2.sqrt())
    };
    let opts = oracle_opts();
    let g = -square_diff_integral(kzz, &opts)?;
    Ok(4.0 * PI * alpha * a2 * g)
}

/// Θ(α) from 4πα·∬_{[0,1]²} K(α, u − v).
pub fn theta_quadrature_oracle(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::KernelDomain {
            name: "theta_quadrature_oracle",
            value: alpha,
            reason: "requires alpha > 0",
        });
    }
    let k = |z: f64| 1.0 / (4.0 * PI * alpha.hypot(z));
    let opts = oracle_opts();
    Ok(4.0 * PI * alpha * square_diff_integral(k, &opts)?)
}

/// ∫₀^∞ (1 − ρ/√(t² + ρ²)) dρ, which equals t.
pub fn radial_gt_integral(t: f64) -> Result<f64> {
    let opts = oracle_opts();
    integrate_semi_infinite(
        |rho: f64| {
            let s = t.hypot(rho);
            t * t / (s * (s + rho))
        },
        0.0,
        &opts,
    )
    .strict(&opts)
}

/// Cubic Hermite tables of Γ and Θ in ln α.
#[derive(Debug, Clone)]
pub struct KernelTable {
    ln_lo: f64,
    ln_hi: f64,
    step: f64,
    gamma: Vec<(f64, f64)>,
    theta: Vec<(f64, f64)>,
}

impl Default for KernelTable {
    fn default() -> Self {
        Self::new(1e-6, 1e6, 2000)
    }
}

impl KernelTable {
    pub fn new(alpha_lo: f64, alpha_hi: f64, nodes: usize) -> Self {
        let (ln_lo, ln_hi) = (alpha_lo.ln(), alpha_hi.ln());
        let step = (ln_hi - ln_lo) / (nodes - 1) as f64;
        let node = |k: usize| (ln_lo + step * k as f64).exp();
        let gamma = (0..nodes)
            .map(|k| {
                let a = node(k);
                (gamma_unchecked(a), a * gamma_prime(a))
            })
            .collect();
        let theta = (0..nodes)
            .map(|k| {
                let a = node(k);
                (theta_unchecked(a), a * theta_prime(a))
            })
            .collect();
        KernelTable {
            ln_lo,
            ln_hi,
            step,
            gamma,
            theta,
        }
    }

    fn interp(&self, table: &[(f64, f64)], alpha: f64) -> Option<f64> {
        if !(alpha > 0.0) {
            return None;
        }
        let x = alpha.ln();
        if x < self.ln_lo || x >= self.ln_hi {
            return None;
        }
        let s = (x - self.ln_lo) / self.step;
        let k = (s as usize).min(table.len() - 2);
        let u = s - k as f64;
        let (y0, d0) = table[k];
        let (y1, d1) = table[k + 1];
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        Some(h00 * y0 + h10 * self.step * d0 + h01 * y1 + h11 * self.step * d1)
    }

    pub fn gamma(&self, alpha: f64) -> f64 {
        self.interp(&self.gamma, alpha)
            .unwrap_or_else(|| gamma_unchecked(alpha))
    }

    pub fn theta(&self, alpha: f64) -> f64 {
        self.interp(&self.theta, alpha)
            .unwrap_or_else(|| theta_unchecked(alpha))
    }
}
