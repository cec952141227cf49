//! Explicit near-optimal constructions: the transition profile ξ_ε, the
//! single disk bubble, and packings of bubbles.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_energy::Magnetization2D;
use crate::geometry::{DomainMask, Point, Shape};
use crate::quadrature::{integrate, QuadOptions, QuadResult};

fn check_eps(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "epsilon = {epsilon} not in (0,1)"
        )))
    }
}

/// arcsin(tanh(ε^{−1/2})).
pub fn profile_constant(epsilon: f64) -> f64 {
    epsilon.sqrt().recip().tanh().asin()
}

/// ξ_ε(ρ) = sin((π/2)·arcsin(tanh(ρ/ε))/arcsin(tanh(ε^{−1/2}))) for
/// |ρ| < √ε, sign(ρ) otherwise.
pub fn xi_eps(epsilon: f64, rho: f64) -> f64 {
    xi_with(epsilon, profile_constant(epsilon), rho)
}

#[inline]
fn xi_with(epsilon: f64, a: f64, rho: f64) -> f64 {
    if rho.abs() >= epsilon.sqrt() {
        return rho.signum();
    }
    (FRAC_PI_2 * (rho / epsilon).tanh().asin() / a).sin()
}

/// ξ_ε′(ρ).
#[inline]
fn xi_prime_with(epsilon: f64, a: f64, rho: f64) -> f64 {
    if rho.abs() >= epsilon.sqrt() {
        return 0.0;
    }
    let y = rho / epsilon;
    let c = FRAC_PI_2 / a;
    (c * y.tanh().asin()).cos() * c / (y.cosh() * epsilon)
}

/// Sampled transition profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile1D {
    pub epsilon: f64,
    pub inner_constant: f64,
    pub rho: Vec<f64>,
    pub values: Vec<f64>,
}

impl Profile1D {
    /// `n` samples on [−√ε − margin, √ε + margin].
    pub fn new(epsilon: f64, margin: f64, n: usize) -> Result<Self> {
        check_eps(epsilon)?;
        if n < 2 || !(margin >= 0.0) {
            return Err(Error::Parameter(
                "profile needs n ≥ 2 and margin ≥ 0".into(),
            ));
        }
        let a = profile_constant(epsilon);
        let half = epsilon.sqrt() + margin;
        let rho: Vec<f64> = (0..n)
            .map(|k| -half + 2.0 * half * k as f64 / (n - 1) as f64)
            .collect();
        let values = rho.iter().map(|&r| xi_with(epsilon, a, r)).collect();
        Ok(Profile1D {
            epsilon,
            inner_constant: a,
            rho,
            values,
        })
    }

    pub fn eval(&self, rho: f64) -> f64 {
        xi_with(self.epsilon, self.inner_constant, rho)
    }

    pub fn derivative(&self, rho: f64) -> f64 {
        xi_prime_with(self.epsilon, self.inner_constant, rho)
    }

    /// Σ|Δξ| over the samples.
    pub fn sampled_total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }
}

fn tight() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        max_intervals: 4000,
    }
}

/// Geometric breakpoints c·2^k in (0, top).
fn geometric(c: f64, top: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut x = c;
    while x < top {
        v.push(x);
        x *= 2.0;
    }
    v
}

/// (1/2)∫ (ε|ξ′|²/(1 − ξ²) + (1 − ξ²)/ε) dρ over the transition layer,
/// evaluated in y = ρ/ε where the integrand is
/// (1/2)[(π/2A)² sech² y + cos²(π·arcsin(tanh y)/2A)].
pub fn profile_local_energy(epsilon: f64) -> Result<f64> {
    check_eps(epsilon)?;
    let a = profile_constant(epsilon);
    let c = FRAC_PI_2 / a;
    let top = epsilon.sqrt().recip();
    let f = |y: f64| {
        let s = c / y.cosh();
        let b = (c * y.tanh().asin()).cos();
        0.5 * (s * s + b * b)
    };
    let mut pts = vec![0.0, top];
    pts.extend(geometric(0.25, top));
    let o = tight();
    Ok(2.0 * integrate(f, &pts, &o).strict(&o)?)
}

/// (1/4)∬_{[−H,H]²} |ξ_ε(ρ) − ξ_ε(ρ′)|²/|ρ − ρ′|^p for p = 2, 1, 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileNonlocal {
    pub epsilon: f64,
    pub h: f64,
    pub power2: f64,
    pub power1: f64,
    pub power0: f64,
}

pub fn profile_nonlocal_energy(epsilon: f64, h: f64) -> Result<ProfileNonlocal> {
    check_eps(epsilon)?;
    if !(h >= 2.0 * epsilon) {
        return Err(Error::Parameter(format!(
            "H = {h} below 2ε = {}",
            2.0 * epsilon
        )));
    }
    let a = profile_constant(epsilon);
    let w = epsilon.sqrt().min(h);
    let xi = |r: f64| xi_with(epsilon, a, r);
    let o = QuadOptions {
        abs_tol: 1e-14,
        rel_tol: 1e-11,
        max_intervals: 4000,
    };

    // inner-layer breakpoints: the core of ξ has width ε
    let mut layer = vec![-w, 0.0, w];
    for m in geometric(epsilon, w) {
        layer.push(m);
        layer.push(-m);
    }
    let power = |p: i32| -> Result<f64> {
        let kern = move |u: f64| match p {
            2 => 1.0 / (u * u),
            1 => 1.0 / u.abs(),
            _ => 1.0,
        };
        let inner = |r: f64, lo: f64, hi: f64| -> f64 {
            let mut pts = vec![lo, hi, r];
            pts.extend(layer.iter().copied());
            for g in geometric(epsilon, 2.0 * h) {
                pts.push(r + g);
                pts.push(r - g);
            }
            let pts: Vec<f64> = pts.into_iter().filter(|x| *x >= lo && *x <= hi).collect();
            integrate(
                |rp: f64| {
                    let d = xi(r) - xi(rp);
                    if d == 0.0 {
                        0.0
                    } else {
                        d * d * kern(r - rp)
                    }
                },
                &pts,
                &o,
            )
            .value
        };
        // A = ∫_{−w}^{w} dρ ∫_{−H}^{H}, C = ∫∫ over the layer squared;
        // A is even under (ρ, ρ′) → (−ρ, −ρ′)
        let pos: Vec<f64> = layer.iter().copied().filter(|x| *x >= 0.0).collect();
        let big_a = 2.0 * integrate(|r| inner(r, -h, h), &pos, &o).strict(&o)?;
        let big_c = 2.0 * integrate(|r| inner(r, -w, w), &pos, &o).strict(&o)?;
        // opposite outer sides (ξ = ∓1): ∬_{[w,H]²} 4/(x+y)^p, both orders
        let opp = if w < h {
            let s = h + w;
            2.0 * 4.0
                * match p {
                    2 => (s * s / (4.0 * w * h)).ln(),
                    1 => 2.0 * h * (2.0 * h).ln() + 2.0 * w * (2.0 * w).ln() - 2.0 * s * s.ln(),
                    _ => (h - w) * (h - w),
                }
        } else {
            0.0
        };
        Ok(0.25 * (2.0 * big_a - big_c + opp))
    };
    Ok(ProfileNonlocal {
        epsilon,
        h,
        power2: power(2)?,
        power1: power(1)?,
        power0: power(0)?,
    })
}

/// ∫_{−ℓ}^{ℓ} ds/(s² + u²) = (2/u)·arctan(ℓ/u).
pub fn tangential_integral_rest(u: f64, ell: f64) -> f64 {
    let u = u.abs();
    2.0 / u * (ell / u).atan()
}

/// ∫_{−ℓ}^{ℓ} ds/(s² + u²)^{3/2} = (2/u²)(1 + u²/ℓ²)^{−1/2}.
pub fn tangential_integral_cubic(u: f64, ell: f64) -> f64 {
    let u2 = u * u;
    2.0 / u2 / (1.0 + u2 / (ell * ell)).sqrt()
}

/// m = ξ_ε(R − |x − c|) e₃ + √(1 − ξ²) (x − c)^⊥/|x − c|: +e₃ inside
/// B_{R−√ε}, −e₃ outside B_{R+√ε}.
pub fn bubble_value(center: Point, radius: f64, epsilon: f64, a: f64, p: Point) -> [f64; 3] {
    let z = p - center;
    let r = z.norm();
    let m3 = xi_with(epsilon, a, radius - r);
    if m3.abs() == 1.0 {
        return [0.0, 0.0, m3];
    }
    let s = (1.0 - m3 * m3).sqrt();
    [-s * z.y / r, s * z.x / r, m3]
}

pub fn disk_bubble(
    mask: Arc<DomainMask>,
    center: Point,
    radius: f64,
    epsilon: f64,
) -> Result<Magnetization2D> {
    check_eps(epsilon)?;
    let w = epsilon.sqrt();
    if !(radius > w) {
        return Err(Error::Parameter(format!(
            "bubble radius {radius} must exceed √ε = {w}"
        )));
    }
    if mask.shape().signed_distance(center) < radius + w {
        return Err(Error::Geometry(format!(
            "bubble B({radius} + √ε) at ({}, {}) not contained in the domain",
            center.x, center.y
        )));
    }
    let a = profile_constant(epsilon);
    Magnetization2D::from_fn(mask, |p| bubble_value(center, radius, epsilon, a, p))
}

pub const DEFAULT_BUBBLE_RADIUS: f64 = 200.0;
pub const DEFAULT_TUBE_HALF_LENGTH: f64 = 40.0;
pub const DEFAULT_TUBE_HALF_WIDTH: f64 = 8.0;

/// Coarea-reduced energies of the disk bubble in a tube of half-width H
/// and half-length ℓ around ∂B_R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleGap {
    pub epsilon: f64,
    pub radius: f64,
    pub h: f64,
    pub ell: f64,
    pub l_eps: f64,
    /// Exact tube integral (true curved geometry), a lower bound for N and N_R.
    pub n_lower: f64,
    /// Same integral with the flat-strip kernel (2/u²)(1 + u²/ℓ²)^{−1/2}.
    pub n_flat: f64,
    /// (N_flat − N_lower)/(2πR) in units of H/R, the fitted curvature constant.
    pub curvature_constant: f64,
    /// N_lower − L_ε.
    pub gap: f64,
}

fn check_ordering(h: f64, ell: f64, radius: f64) -> Result<()> {
    if !(h >= 2.0 && ell >= 4.0 * h && radius >= 4.0 * ell) {
        return Err(Error::Parameter(format!(
            "need H ≥ 2, ℓ ≥ 4H, R ≥ 4ℓ (got H = {h}, ℓ = {ell}, R = {radius})"
        )));
    }
    Ok(())
}

/// |ln ε|∫ ((ε/2)|∇m|² + (1/2ε)(1 − m₃²)) for the disk bubble, via the
/// coarea formula on circles r = R − ρ (including the tangential
/// (ε/2)(1 − ξ²)/r² contribution).
pub fn bubble_local_energy(radius: f64, epsilon: f64) -> Result<f64> {
    check_eps(epsilon)?;
    let a = profile_constant(epsilon);
    let c = FRAC_PI_2 / a;
    let top = epsilon.sqrt().recip();
    let f = |y: f64| {
        let s = c / y.cosh();
        let b = (c * y.tanh().asin()).cos();
        let r = radius - epsilon * y;
        let xi = (c * y.tanh().asin()).sin();
        let tang = 0.5 * epsilon * epsilon * (1.0 - xi * xi) / (r * r);
        (0.5 * (s * s + b * b) + tang) * 2.0 * PI * r
    };
    let mut pts = vec![-top, 0.0, top];
    for g in geometric(0.25, top) {
        pts.push(g);
        pts.push(-g);
    }
    let o = tight();
    Ok(-epsilon.ln() * integrate(f, &pts, &o).strict(&o)?)
}

pub fn bubble_energy_gap(
    host: &Shape,
    center: Point,
    radius: f64,
    epsilon: f64,
    h: f64,
    ell: f64,
) -> Result<BubbleGap> {
    check_eps(epsilon)?;
    check_ordering(h, ell, radius)?;
    if host.signed_distance(center) < radius + h {
        return Err(Error::Geometry(
            "tube around the bubble leaves the domain".into(),
        ));
    }
    let l_eps = bubble_local_energy(radius, epsilon)?;
    let a = profile_constant(epsilon);
    let w = epsilon.sqrt();
    let xi = |r: f64| xi_with(epsilon, a, r);
    let o = QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-10,
        max_intervals: 4000,
    };
    let mut layer = vec![-w, 0.0, w, -h, h];
    for g in geometric(epsilon, w) {
        layer.push(g);
        layer.push(-g);
    }
    // ρ is the outward distance from ∂B_R; m₃ = ξ(−ρ)
    let tube = |curved: bool| -> Result<f64> {
        let inner = |r: f64| -> f64 {
            let mut pts = layer.clone();
            pts.push(r);
            for g in geometric(epsilon, 2.0 * h) {
                pts.push(r + g);
                pts.push(r - g);
            }
            let pts: Vec<f64> = pts.into_iter().filter(|x| x.abs() <= h).collect();
            integrate(
                |rp: f64| {
                    let d = xi(-r) - xi(-rp);
                    if d == 0.0 {
                        return 0.0;
                    }
                    let u = r - rp;
                    let k = if curved {
                        let (p, q) = (radius + r, radius + rp);
                        let jac = q / radius;
                        let mut sp = vec![0.0, ell];
                        sp.extend(geometric(u.abs().max(1e-300), ell));
                        2.0 * integrate(
                            |s: f64| {
                                let sn = (s / (2.0 * radius)).sin();
                                let d2 = u * u + 4.0 * p * q * sn * sn;
                                jac / (d2 * d2.sqrt())
                            },
                            &sp,
                            &o,
                        )
                        .value
                            * p
                    } else {
                        tangential_integral_cubic(u, ell) * radius
                    };
                    d * d * k
                },
                &pts,
                &o,
            )
            .value
        };
        Ok(2.0 * PI / 8.0 * integrate(inner, &layer_sorted(&layer), &o).strict(&o)?)
    };
    let n_lower = tube(true)?;
    let n_flat = tube(false)?;
    Ok(BubbleGap {
        epsilon,
        radius,
        h,
        ell,
        l_eps,
        n_lower,
        n_flat,
        curvature_constant: (n_flat - n_lower) / (2.0 * PI * radius) * radius / h,
        gap: n_lower - l_eps,
    })
}

fn layer_sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s.dedup();
    s
}

/// Continuum F_{ε,R} of the disk bubble (bubble radius = interaction range
/// = R) on any domain containing B_{2R+√ε}: L_ε by coarea, N_R by the
/// radially reduced triple integral over (|x|, |z|, angle) with exact
/// annulus-crossing breakpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleFiniteRange {
    pub epsilon: f64,
    pub radius: f64,
    pub range: f64,
    pub l_eps: f64,
    pub n_range: f64,
    pub f_eps_range: f64,
    pub quadrature_error: f64,
}

pub fn bubble_finite_range_energy(
    radius: f64,
    range: f64,
    epsilon: f64,
) -> Result<BubbleFiniteRange> {
    check_eps(epsilon)?;
    let w = epsilon.sqrt();
    if !(radius > w) || !(range > 0.0) {
        return Err(Error::Parameter("need R > √ε and range > 0".into()));
    }
    let l_eps = bubble_local_energy(radius, epsilon)?;
    let a = profile_constant(epsilon);
    let m3 = move |r: f64| xi_with(epsilon, a, radius - r);
    let (r_in, r_out) = (radius - w, radius + w);
    let o = QuadOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-8,
        max_intervals: 4000,
    };

    // ∫₀^π (a(r₁) − a(r₂(θ)))² dθ, r₂² = r₁² + ρ² + 2r₁ρ cos θ
    let angular = |r1: f64, rho: f64| -> f64 {
        let a1 = m3(r1);
        let crossing = |rc: f64| -> Option<f64> {
            let c = (rc * rc - r1 * r1 - rho * rho) / (2.0 * r1 * rho);
            (c > -1.0 && c < 1.0).then(|| c.acos())
        };
        // r₂ decreases in θ: θ_out (r₂ = R+√ε) ≤ θ_in (r₂ = R−√ε)
        let mut cuts = vec![0.0, PI];
        cuts.extend(crossing(r_out));
        cuts.extend(crossing(r_in));
        cuts.extend(crossing(radius));
        cuts.sort_by(f64::total_cmp);
        let mut total = 0.0;
        for wdw in cuts.windows(2) {
            let (t0, t1) = (wdw[0], wdw[1]);
            if t1 <= t0 {
                continue;
            }
            let mid = 0.5 * (t0 + t1);
            let r2m = (r1 * r1 + rho * rho + 2.0 * r1 * rho * mid.cos())
                .max(0.0)
                .sqrt();
            if r2m <= r_in || r2m >= r_out {
                let d = a1 - if r2m <= r_in { 1.0 } else { -1.0 };
                total += d * d * (t1 - t0);
            } else {
                total += integrate(
                    |th: f64| {
                        let r2 = (r1 * r1 + rho * rho + 2.0 * r1 * rho * th.cos())
                            .max(0.0)
                            .sqrt();
                        let d = a1 - m3(r2);
                        d * d
                    },
                    &[t0, t1],
                    &o,
                )
                .value;
            }
        }
        2.0 * total
    };
    let radial = |r1: f64| -> f64 {
        let mut pts = vec![0.0, range];
        for rc in [r_in, radius, r_out] {
            for c in [(r1 - rc).abs(), r1 + rc] {
                if c > 0.0 && c < range {
                    pts.push(c);
                    for g in geometric(epsilon, range) {
                        for x in [c + g, c - g] {
                            if x > 0.0 && x < range {
                                pts.push(x);
                            }
                        }
                    }
                }
            }
        }
        let v = integrate(
            |rho: f64| {
                if rho == 0.0 {
                    return 0.0;
                }
                angular(r1, rho) / (rho * rho)
            },
            &pts,
            &o,
        );
        v.value * r1
    };
    let mut pts = vec![0.0, radius + range + w];
    for c in [r_in, radius, r_out] {
        pts.push(c);
        for g in geometric(epsilon, range) {
            for x in [c + g, c - g] {
                if x > 0.0 && x < radius + range + w {
                    pts.push(x);
                }
            }
        }
    }
    let res: QuadResult = integrate(radial, &pts, &o);
    let n_range = 2.0 * PI / 8.0 * res.strict(&o)?;
    Ok(BubbleFiniteRange {
        epsilon,
        radius,
        range,
        l_eps,
        n_range,
        f_eps_range: l_eps - n_range,
        quadrature_error: 2.0 * PI / 8.0 * res.error,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bubble {
    pub center: Point,
    pub radius: f64,
}

/// Disjoint bubbles placed on a hexagonal lattice inside a host mask.
#[derive(Debug, Clone, Serialize)]
pub struct BubbleLayout {
    pub bubbles: Vec<Bubble>,
    pub radius: f64,
    pub epsilon: f64,
    /// Smallest distance between the √ε-collared disks of two bubbles.
    pub min_separation: f64,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub mask: Arc<DomainMask>,
}

/// Greedy hexagonal packing: centers spaced so the collared disks
/// B_{R+√ε} are at least 2R apart, kept when the collared disk lies in Ω.
pub fn pack_bubbles(mask: Arc<DomainMask>, radius: f64, epsilon: f64) -> Result<BubbleLayout> {
    check_eps(epsilon)?;
    let w = epsilon.sqrt();
    if !(radius > w) {
        return Err(Error::Parameter(format!(
            "bubble radius {radius} must exceed √ε"
        )));
    }
    let shape = mask.shape().clone();
    let (lo, hi) = shape.bounding_box();
    let spacing = 2.0 * (radius + w) + 2.0 * radius;
    let row = spacing * 3f64.sqrt() / 2.0;
    let mut bubbles = Vec::new();
    let mut j = 0usize;
    loop {
        let y = lo.y + radius + w + j as f64 * row;
        if y > hi.y {
            break;
        }
        let shift = if j % 2 == 1 { 0.5 * spacing } else { 0.0 };
        let mut i = 0usize;
        loop {
            let x = lo.x + radius + w + shift + i as f64 * spacing;
            if x > hi.x {
                break;
            }
            let c = Point::new(x, y);
            if shape.signed_distance(c) >= radius + w {
                bubbles.push(Bubble { center: c, radius });
            }
            i += 1;
        }
        j += 1;
    }
    let mut min_sep = f64::INFINITY;
    for (k, b) in bubbles.iter().enumerate() {
        for b2 in &bubbles[k + 1..] {
            min_sep = min_sep.min(b.center.dist(b2.center) - 2.0 * (radius + w));
        }
    }
    let mut warnings = Vec::new();
    if bubbles.is_empty() {
        warnings.push(format!("no bubble of radius {radius} fits in the domain"));
    }
    Ok(BubbleLayout {
        bubbles,
        radius,
        epsilon,
        min_separation: min_sep,
        warnings,
        mask,
    })
}

/// Disk bubbles in a −e₃ background.
pub fn multi_bubble_field(layout: &BubbleLayout) -> Result<Magnetization2D> {
    let eps = layout.epsilon;
    let a = profile_constant(eps);
    let reach = layout.radius + eps.sqrt();
    Magnetization2D::from_fn(layout.mask.clone(), |p| {
        layout
            .bubbles
            .iter()
            .find(|b| p.dist(b.center) < reach)
            .map_or([0.0, 0.0, -1.0], |b| {
                bubble_value(b.center, b.radius, eps, a, p)
            })
    })
}
