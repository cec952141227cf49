//! Exact interaction integrals of piecewise-constant data on a square grid:
//! cell–cell weights (tent-weighted area integrals) and face–face weights
//! for line charges on cell edges. All offsets are in units of the grid
//! spacing h; kernels take physical distances.

use std::f64::consts::FRAC_PI_4;

use crate::quadrature::{gauss_legendre, integrate, QuadOptions};

fn opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-10,
        max_intervals: 400,
    }
}

/// Radial breakpoints (in units of h) where a kernel with physical scale
/// `scale` changes behavior.
fn radial_points(lo: f64, hi: f64, scale_h: Option<f64>) -> Vec<f64> {
    let mut p = vec![lo, hi];
    if let Some(s) = scale_h {
        for m in [0.1, 1.0, 10.0] {
            let r = s * m;
            if r > lo && r < hi {
                p.push(r);
            }
        }
    }
    p
}

/// ∬ over the unit square [a, a+1] × [b, b+1] (units of h) of
/// f(h|u|)·w(u) du, with `w` smooth. `f` may be singular at the origin
/// (at most like 1/r); the origin may only touch the square at a corner.
pub fn square_integral(
    f: &(dyn Fn(f64) -> f64 + Sync),
    w: &(dyn Fn(f64, f64) -> f64 + Sync),
    a: i64,
    b: i64,
    h: f64,
    scale: Option<f64>,
) -> f64 {
    let o = opts();
    let scale_h = scale.map(|s| s / h);
    let corner = (a == 0 || a == -1) && (b == 0 || b == -1);
    if corner {
        // polar coordinates around the origin; square reflected into [0,1]²
        let (sx, sy) = (
            if a == 0 { 1.0 } else { -1.0 },
            if b == 0 { 1.0 } else { -1.0 },
        );
        let tri = |th_lo: f64, th_hi: f64, lower: bool| {
            integrate(
                |th: f64| {
                    let (c, s) = (th.cos(), th.sin());
                    let rmax = if lower { 1.0 / c } else { 1.0 / s };
                    integrate(
                        |r: f64| r * f(h * r) * w(sx * r * c, sy * r * s),
                        &radial_points(0.0, rmax, scale_h),
                        &o,
                    )
                    .value
                },
                &[th_lo, th_hi],
                &o,
            )
            .value
        };
        return tri(0.0, FRAC_PI_4, true) + tri(FRAC_PI_4, 2.0 * FRAC_PI_4, false);
    }
    let (af, bf) = (a as f64, b as f64);
    let dx = if a > 0 { af } else { -(af + 1.0) };
    let dy = if b > 0 { bf } else { -(bf + 1.0) };
    let dmin = dx.max(0.0).hypot(dy.max(0.0));
    if dmin >= 3.0 {
        let (x, wt) = gauss_legendre(6);
        let mut acc = 0.0;
        for (xi, wi) in x.iter().zip(&wt) {
            let u = af + 0.5 * (xi + 1.0);
            for (yj, wj) in x.iter().zip(&wt) {
                let v = bf + 0.5 * (yj + 1.0);
                acc += wi * wj * f(h * u.hypot(v)) * w(u, v);
            }
        }
        return 0.25 * acc;
    }
    integrate(
        |v: f64| integrate(|u: f64| f(h * u.hypot(v)) * w(u, v), &[af, af + 1.0], &o).value,
        &[bf, bf + 1.0],
        &o,
    )
    .value
}

/// W(d) = ∫ k(|z|) A(z − h d) dz with A the tent (h − |z₁|)₊(h − |z₂|)₊,
/// i.e. ∬_{cell × cell'} k(|x − x′|) for cells offset by d.
pub fn cell_pair_weight(
    k: &(dyn Fn(f64) -> f64 + Sync),
    dx: i64,
    dy: i64,
    h: f64,
    scale: Option<f64>,
) -> f64 {
    let (fx, fy) = (dx as f64, dy as f64);
    let tent =
        move |u: f64, v: f64| (1.0 - (u - fx).abs()).max(0.0) * (1.0 - (v - fy).abs()).max(0.0);
    let mut acc = 0.0;
    for a in [dx - 1, dx] {
        for b in [dy - 1, dy] {
            acc += square_integral(k, &tent, a, b, h, scale);
        }
    }
    h.powi(4) * acc
}

/// ∫₀^h∫₀^h k(|(dx·h, dy·h + s − s′)|) ds ds′ for two parallel faces.
pub fn parallel_face_weight(
    k: &(dyn Fn(f64) -> f64 + Sync),
    dx: i64,
    dy: i64,
    h: f64,
    scale: Option<f64>,
) -> f64 {
    let (fx, fy) = (dx as f64, dy as f64);
    let mut pts = vec![-1.0, 1.0];
    if dx == 0 && dy.abs() <= 1 {
        pts.push(-fy);
    }
    if let Some(s) = scale {
        let s = s / h;
        if dx == 0 {
            for m in [0.1, 1.0] {
                pts.push(-fy + m * s);
                pts.push(-fy - m * s);
            }
        }
    }
    let pts: Vec<f64> = pts
        .into_iter()
        .filter(|p| (-1.0..=1.0).contains(p))
        .collect();
    let far = fx.hypot(fy.abs() - 1.0);
    let val = if far >= 4.0 {
        let (x, w) = gauss_legendre(8);
        let mut acc = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            for half in [-1.0, 1.0] {
                let u = half * 0.5 * (xi + 1.0);
                acc += 0.5 * wi * (1.0 - u.abs()) * k(h * fx.hypot(fy + u));
            }
        }
        acc
    } else {
        integrate(
            |u: f64| (1.0 - u.abs()) * k(h * fx.hypot(fy + u)),
            &pts,
            &opts(),
        )
        .value
    };
    h * h * val
}

/// Interaction of a vertical face at lattice point (i₁, j₁) with a
/// horizontal face at (i₂, j₂), a = i₁ − i₂, b = j₁ − j₂:
/// ∬_{[a−1, a] × [b, b+1]} k(h|u|) du · h².
pub fn cross_face_weight(
    k: &(dyn Fn(f64) -> f64 + Sync),
    a: i64,
    b: i64,
    h: f64,
    scale: Option<f64>,
) -> f64 {
    h * h * square_integral(k, &|_, _| 1.0, a - 1, b, h, scale)
}

/// c with ∬_{[0,s]² × [0,s]²} |x − y|⁻¹ dx dy = c·s³.
pub fn square_self_coulomb() -> f64 {
    let r2 = std::f64::consts::SQRT_2;
    4.0 * (1.0 + r2).ln() - 4.0 / 3.0 * (r2 - 1.0)
}
