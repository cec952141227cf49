//! Stray-field energies of the extruded film M̄ = m ⊗ χ_{[0,t]}.
//!
//! The field is piecewise constant on cells, so the reduced energies are
//! evaluated exactly up to quadrature: the vertical part through cell–cell
//! integrals of the slab kernel G_t, the tangential part through the line
//! charges [m′·n] sitting on cell faces (interior jumps and the lateral
//! boundary) interacting via (t²/4π)Θ(r/t)/r.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainMask;
use crate::kernels::{gamma_unchecked, theta_unchecked};
use crate::pairsum::{LatticeConvolution, LatticeWeights, PairMode, PairSum};
use crate::quadrature::KahanSum;

use super::cellpair::{cell_pair_weight, cross_face_weight, parallel_face_weight};
use super::field::Magnetization2D;

pub const ORACLE_CELL_LIMIT: usize = 64 * 64;

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "thickness t = {t} must be positive"
        )))
    }
}

/// G_t(r) written through Γ.
fn slab_kernel(t: f64) -> impl Fn(f64) -> f64 + Sync {
    move |r: f64| {
        if r == 0.0 {
            return f64::INFINITY;
        }
        t * t / (4.0 * PI * r * r * r) * gamma_unchecked(r / t)
    }
}

/// (t²/4π)Θ(r/t)/r.
fn theta_kernel(t: f64) -> impl Fn(f64) -> f64 + Sync {
    move |r: f64| {
        if r == 0.0 {
            return f64::INFINITY;
        }
        t * t / (4.0 * PI * r) * theta_unchecked(r / t)
    }
}

/// ∫|ℋ(m₃e₃ ⊗ χ_{[0,t]})|² = Σ_{i,j} a_i a_j ∬_{cellᵢ×cellⱼ} G_t.
pub fn stray_energy_vertical(m: &Magnetization2D, t: f64) -> Result<f64> {
    check_t(t)?;
    let mask = m.mask();
    let h = mask.h();
    let cells = mask.cells();
    let k = slab_kernel(t);
    let w = LatticeWeights::new(mask.nx(), mask.ny(), |dx, dy| {
        cell_pair_weight(&k, dx as i64, dy as i64, h, Some(t))
    });
    let ps = PairSum::new(w, PairMode::Auto, cells.len());
    let a = m.m3();
    Ok(ps.bilinear(&a, &a, &cells))
}

/// Line charges on the faces of the (nx+1) × (ny+1) face lattice.
#[derive(Debug, Clone)]
pub struct FaceCharges {
    pub nx: usize,
    pub ny: usize,
    /// Vertical face (i, j): x = i·h, y ∈ [j h, (j+1) h]; charge m₁(i,j) − m₁(i−1,j).
    pub vertical: Vec<f64>,
    /// Horizontal face (i, j): y = j·h, x ∈ [i h, (i+1) h]; charge m₂(i,j) − m₂(i,j−1).
    pub horizontal: Vec<f64>,
    /// Whether the face separates an inside cell from an outside one.
    pub v_boundary: Vec<bool>,
    pub h_boundary: Vec<bool>,
}

impl FaceCharges {
    pub fn new(m: &Magnetization2D) -> Self {
        let mask = m.mask();
        let (nx, ny) = (mask.nx(), mask.ny());
        let lx = nx + 1;
        let v = m.values();
        let cell = |i: isize, j: isize| -> Option<usize> {
            (i >= 0 && j >= 0 && (i as usize) < nx && (j as usize) < ny)
                .then(|| j as usize * nx + i as usize)
                .filter(|&k| mask.inside()[k])
        };
        let size = lx * (ny + 1);
        let mut fc = FaceCharges {
            nx,
            ny,
            vertical: vec![0.0; size],
            horizontal: vec![0.0; size],
            v_boundary: vec![false; size],
            h_boundary: vec![false; size],
        };
        for j in 0..=ny as isize {
            for i in 0..=nx as isize {
                let f = j as usize * lx + i as usize;
                if (j as usize) < ny {
                    let (l, r) = (cell(i - 1, j), cell(i, j));
                    fc.vertical[f] = r.map_or(0.0, |k| v[k][0]) - l.map_or(0.0, |k| v[k][0]);
                    fc.v_boundary[f] = l.is_some() != r.is_some();
                }
                if (i as usize) < nx {
                    let (d, u) = (cell(i, j - 1), cell(i, j));
                    fc.horizontal[f] = u.map_or(0.0, |k| v[k][1]) - d.map_or(0.0, |k| v[k][1]);
                    fc.h_boundary[f] = d.is_some() != u.is_some();
                }
            }
        }
        fc
    }

    /// Charges restricted to interior (`boundary = false`) or boundary faces.
    pub fn restricted(&self, boundary: bool) -> FaceCharges {
        let pick = |q: &[f64], b: &[bool]| -> Vec<f64> {
            q.iter()
                .zip(b)
                .map(|(&x, &bb)| if bb == boundary { x } else { 0.0 })
                .collect()
        };
        FaceCharges {
            vertical: pick(&self.vertical, &self.v_boundary),
            horizontal: pick(&self.horizontal, &self.h_boundary),
            ..self.clone()
        }
    }

    fn support(q: &[f64]) -> Vec<usize> {
        (0..q.len()).filter(|&k| q[k] != 0.0).collect()
    }
}

/// Face–face interaction operators for one kernel on one grid.
pub struct FaceInteraction {
    vv: LatticeConvolution,
    hh: LatticeConvolution,
    vh: LatticeConvolution,
}

impl FaceInteraction {
    pub fn new(
        mask: &DomainMask,
        kernel: &(dyn Fn(f64) -> f64 + Sync),
        scale: Option<f64>,
        mode: PairMode,
    ) -> Self {
        let (lx, ly) = (mask.nx() + 1, mask.ny() + 1);
        let h = mask.h();
        let active = 2 * lx * ly;
        let vv = LatticeConvolution::new(
            lx,
            ly,
            |dx, dy| parallel_face_weight(kernel, dx.abs() as i64, dy.abs() as i64, h, scale),
            mode,
            active,
        );
        let hh = LatticeConvolution::new(
            lx,
            ly,
            |dx, dy| parallel_face_weight(kernel, dy.abs() as i64, dx.abs() as i64, h, scale),
            mode,
            active,
        );
        let vh = LatticeConvolution::new(
            lx,
            ly,
            |a, b| cross_face_weight(kernel, a as i64, b as i64, h, scale),
            mode,
            active,
        );
        FaceInteraction { vv, hh, vh }
    }

    /// Σ λλ′ ∬ k over all face pairs.
    pub fn energy(&self, q: &FaceCharges) -> f64 {
        let sv = FaceCharges::support(&q.vertical);
        let sh = FaceCharges::support(&q.horizontal);
        let vv = self.vv.bilinear(&q.vertical, &sv, &q.vertical, &sv);
        let hh = self.hh.bilinear(&q.horizontal, &sh, &q.horizontal, &sh);
        let vh = self.vh.bilinear(&q.vertical, &sv, &q.horizontal, &sh);
        vv + hh + 2.0 * vh
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentialParts {
    /// Interior-face (volume) charges alone.
    pub volume: f64,
    /// Lateral boundary charges alone.
    pub boundary: f64,
    pub total: f64,
}

/// (t²/4π)∬ Θ(|x−x′|/t) div m′(x) div m′(x′)/|x−x′| with the distributional
/// divergence of the piecewise-constant field.
pub fn stray_energy_tangential_parts(m: &Magnetization2D, t: f64) -> Result<TangentialParts> {
    check_t(t)?;
    let k = theta_kernel(t);
    let op = FaceInteraction::new(m.mask(), &k, Some(t), PairMode::Auto);
    let q = FaceCharges::new(m);
    Ok(TangentialParts {
        volume: op.energy(&q.restricted(false)),
        boundary: op.energy(&q.restricted(true)),
        total: op.energy(&q),
    })
}

pub fn stray_energy_tangential(m: &Magnetization2D, t: f64) -> Result<f64> {
    Ok(stray_energy_tangential_parts(m, t)?.total)
}

/// ∬_{[0,t]²} K(r, u − v) du dv = (1/2π)(t·asinh(t/r) + r − √(r² + t²)).
fn slab_pair_newton(r: f64, t: f64) -> f64 {
    (t * (t / r).asinh() + r - r.hypot(t)) / (2.0 * PI)
}

/// 2(K(r,0) − K(r,t)).
fn top_bottom_newton(r: f64, t: f64) -> f64 {
    (1.0 / r - 1.0 / r.hypot(t)) / (2.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleParts {
    /// Top/bottom surface charges ±m₃.
    pub vertical: f64,
    /// Lateral and interior line charges of m′ spread over the height.
    pub tangential: f64,
    /// Interaction between the two charge families (vanishes by symmetry).
    pub cross: f64,
    pub total: f64,
}

/// One charged element of the oracle: sub-cell sheet or face segment, with
/// integer position on the sub-lattice of spacing s.
#[derive(Debug, Clone, Copy)]
struct Element {
    x: f64,
    y: f64,
    charge: f64,
    kind: u8,
    i: i64,
    j: i64,
}

const SHEET: u8 = 0;
const VSEG: u8 = 1;
const HSEG: u8 = 2;
/// Sub-lattice offsets (per axis) handled by exact element integrals.
const NEAR: i64 = 3;

/// Brute-force ∫|ℋ(M̄)|² from the real-space Newton kernel: each cell is
/// split into q × q sub-cells carrying the surface charges ±m₃ on top and
/// bottom, each face into q segments carrying m′·n. Height integrals are in
/// closed form, in-plane ones by point sampling except for nearby element
/// pairs, which are integrated adaptively.
pub fn stray_energy_direct_oracle(
    m: &Magnetization2D,
    t: f64,
    quadrature_depth: usize,
) -> Result<OracleParts> {
    check_t(t)?;
    let mask = m.mask();
    if mask.len() > ORACLE_CELL_LIMIT {
        return Err(Error::GridTooLarge {
            cells: mask.len(),
            limit: ORACLE_CELL_LIMIT,
        });
    }
    let q = quadrature_depth.max(1);
    let qi = q as i64;
    let h = mask.h();
    let s = h / q as f64;
    let o = mask.origin();

    let mut sheets = Vec::new();
    for k in mask.cells() {
        let a = m.values()[k][2];
        if a == 0.0 {
            continue;
        }
        let (ci, cj) = ((k % mask.nx()) as i64, (k / mask.nx()) as i64);
        for sj in 0..qi {
            for si in 0..qi {
                let (i, j) = (ci * qi + si, cj * qi + sj);
                sheets.push(Element {
                    x: o.x + (i as f64 + 0.5) * s,
                    y: o.y + (j as f64 + 0.5) * s,
                    charge: a,
                    kind: SHEET,
                    i,
                    j,
                });
            }
        }
    }
    let g = move |r: f64| top_bottom_newton(r, t);
    let near_g = NearTable::new(|dx, dy| cell_pair_weight(&g, dx, dy, s, Some(t)));
    let s4 = s.powi(4);
    let vertical = pair_sum_elements(&sheets, |p, e| {
        let (dx, dy) = (p.i - e.i, p.j - e.j);
        near_g
            .get(dx, dy)
            .unwrap_or_else(|| s4 * g((p.x - e.x).hypot(p.y - e.y)))
    });

    let fc = FaceCharges::new(m);
    let lx = fc.nx + 1;
    let mut segs = Vec::new();
    for f in 0..fc.vertical.len() {
        let (fi, fj) = ((f % lx) as i64, (f / lx) as i64);
        let lv = fc.vertical[f];
        if lv != 0.0 {
            for p in 0..qi {
                let (i, j) = (fi * qi, fj * qi + p);
                segs.push(Element {
                    x: o.x + i as f64 * s,
                    y: o.y + (j as f64 + 0.5) * s,
                    charge: lv,
                    kind: VSEG,
                    i,
                    j,
                });
            }
        }
        let lh = fc.horizontal[f];
        if lh != 0.0 {
            for p in 0..qi {
                let (i, j) = (fi * qi + p, fj * qi);
                segs.push(Element {
                    x: o.x + (i as f64 + 0.5) * s,
                    y: o.y + j as f64 * s,
                    charge: lh,
                    kind: HSEG,
                    i,
                    j,
                });
            }
        }
    }
    let kt = move |r: f64| slab_pair_newton(r, t);
    let near_par =
        NearTable::new(|dx, dy| parallel_face_weight(&kt, dx.abs(), dy.abs(), s, Some(t)));
    let near_cross = NearTable::new(|a, b| cross_face_weight(&kt, a, b, s, Some(t)));
    let s2 = s * s;
    let tangential = pair_sum_elements(&segs, |p, e| {
        let (dx, dy) = (p.i - e.i, p.j - e.j);
        let exact = match (p.kind, e.kind) {
            (VSEG, VSEG) => near_par.get(dx, dy),
            (HSEG, HSEG) => near_par.get(dy, dx),
            (VSEG, HSEG) => near_cross.get(dx, dy),
            _ => near_cross.get(-dx, -dy),
        };
        exact.unwrap_or_else(|| s2 * kt((p.x - e.x).hypot(p.y - e.y)))
    });

    // bottom sheet (x₃ = 0) carries +m₃, top sheet (x₃ = t) carries −m₃;
    // each meets a face sheet spanning [0, t] through ∫₀ᵗ K(r, z − z₀) dz
    let cross = {
        let sheet = |r: f64, z0: f64| ((t - z0) / r).asinh() - ((0.0 - z0) / r).asinh();
        let mut acc = KahanSum::default();
        for p in &sheets {
            for e in &segs {
                let r = (p.x - e.x).hypot(p.y - e.y);
                acc.add(p.charge * e.charge * s2 * s * (sheet(r, 0.0) - sheet(r, t)) / (4.0 * PI));
            }
        }
        2.0 * acc.sum()
    };
    Ok(OracleParts {
        vertical,
        tangential,
        cross,
        total: vertical + tangential + cross,
    })
}

/// Exact element-pair integrals for offsets within `NEAR` per axis.
struct NearTable {
    w: Vec<f64>,
}

impl NearTable {
    fn new(f: impl Fn(i64, i64) -> f64) -> Self {
        let n = 2 * NEAR + 1;
        let w = (0..n * n).map(|k| f(k % n - NEAR, k / n - NEAR)).collect();
        NearTable { w }
    }

    fn get(&self, dx: i64, dy: i64) -> Option<f64> {
        (dx.abs() <= NEAR && dy.abs() <= NEAR).then(|| {
            let n = 2 * NEAR + 1;
            self.w[((dy + NEAR) * n + dx + NEAR) as usize]
        })
    }
}

/// Σ_{p,p′} c_p c_p′ w(p, p′) including p = p′.
fn pair_sum_elements(els: &[Element], w: impl Fn(&Element, &Element) -> f64 + Sync) -> f64 {
    use rayon::prelude::*;
    let rows: Vec<f64> = els
        .par_iter()
        .map(|p| {
            let mut acc = KahanSum::default();
            for e in els {
                acc.add(p.charge * e.charge * w(p, e));
            }
            acc.sum()
        })
        .collect();
    rows.into_iter().collect::<KahanSum>().sum()
}
