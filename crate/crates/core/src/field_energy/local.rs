//! Local terms: exchange + anisotropy, total variation of m₃ and the
//! Modica–Mortola gap.
//!
//! Gradients are forward differences across the edges between neighboring
//! inside cells, so ∫|∇m|² ≈ Σ_edges |mᵢ − mⱼ|² and
//! ∫|∇m₃| ≈ Σ_cells h·√(Δₓm₃² + Δᵧm₃²).

use crate::geometry::DomainMask;
use crate::params::ParameterSet;
use crate::quadrature::KahanSum;

use super::field::{Magnetization2D, Vec3};

/// Neighbor structure of the inside cells.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub cells: Vec<usize>,
    /// (k, k + 1) and (k, k + nx) pairs with both cells inside.
    pub edges: Vec<(usize, usize)>,
    /// Per inside cell (in `cells` order): right and upper neighbor if inside.
    pub forward: Vec<(Option<usize>, Option<usize>)>,
}

impl Stencil {
    pub fn new(mask: &DomainMask) -> Self {
        let nx = mask.nx();
        let cells = mask.cells();
        let mut edges = Vec::with_capacity(2 * cells.len());
        let mut forward = Vec::with_capacity(cells.len());
        for &k in &cells {
            let (i, j) = (k % nx, k / nx);
            let right = mask.is_inside(i + 1, j).then_some(k + 1);
            let up = mask.is_inside(i, j + 1).then_some(k + nx);
            if let Some(r) = right {
                edges.push((k, r));
            }
            if let Some(u) = up {
                edges.push((k, u));
            }
            forward.push((right, up));
        }
        Stencil {
            cells,
            edges,
            forward,
        }
    }
}

fn dist2(a: &Vec3, b: &Vec3) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
}

/// Σ_edges |mᵢ − mⱼ|², the discrete ∫|∇m|².
pub fn dirichlet(m: &Magnetization2D, st: &Stencil) -> f64 {
    let v = m.values();
    st.edges
        .iter()
        .map(|&(a, b)| dist2(&v[a], &v[b]))
        .collect::<KahanSum>()
        .sum()
}

/// ∫(1 − m₃²).
pub fn anisotropy_integral(m: &Magnetization2D, st: &Stencil) -> f64 {
    let h2 = m.mask().h().powi(2);
    let v = m.values();
    h2 * st
        .cells
        .iter()
        .map(|&k| 1.0 - v[k][2] * v[k][2])
        .collect::<KahanSum>()
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalParts {
    /// |ln ε|(ε/2)∫|∇m|²
    pub exchange: f64,
    /// |ln ε|(1/2ε)∫(1 − m₃²)
    pub anisotropy: f64,
}

impl LocalParts {
    pub fn total(&self) -> f64 {
        self.exchange + self.anisotropy
    }
}

pub fn local_parts(m: &Magnetization2D, p: &ParameterSet, st: &Stencil) -> LocalParts {
    LocalParts {
        exchange: p.log_eps * 0.5 * p.epsilon * dirichlet(m, st),
        anisotropy: p.log_eps * 0.5 / p.epsilon * anisotropy_integral(m, st),
    }
}

pub fn bv_norm_with(m: &Magnetization2D, st: &Stencil) -> f64 {
    scalar_total_variation(&m.m3(), st, m.mask().h())
}

/// Σ_edges |fᵢ − fⱼ|² for a scalar cell field.
pub fn scalar_dirichlet(f: &[f64], st: &Stencil) -> f64 {
    st.edges
        .iter()
        .map(|&(a, b)| (f[a] - f[b]).powi(2))
        .collect::<KahanSum>()
        .sum()
}

/// Isotropic forward-difference total variation Σ h·|∇f|.
pub fn scalar_total_variation(f: &[f64], st: &Stencil, h: f64) -> f64 {
    h * st
        .cells
        .iter()
        .zip(&st.forward)
        .map(|(&k, &(r, u))| {
            let dx = r.map_or(0.0, |r| f[r] - f[k]);
            let dy = u.map_or(0.0, |u| f[u] - f[k]);
            dx.hypot(dy)
        })
        .collect::<KahanSum>()
        .sum()
}

/// ((ε/2)∫|∇m|² + (1/2ε)∫(1 − m₃²)) − ∫|∇m₃|.
pub fn modica_mortola_gap_with(m: &Magnetization2D, p: &ParameterSet, st: &Stencil) -> f64 {
    0.5 * p.epsilon * dirichlet(m, st) + 0.5 / p.epsilon * anisotropy_integral(m, st)
        - bv_norm_with(m, st)
}

/// Gradient of L_ε with respect to the cell values (Euclidean, unprojected),
/// accumulated into `g`.
pub fn add_local_gradient(m: &Magnetization2D, p: &ParameterSet, st: &Stencil, g: &mut [Vec3]) {
    let v = m.values();
    let cx = p.log_eps * p.epsilon;
    for &(a, b) in &st.edges {
        for c in 0..3 {
            let d = cx * (v[a][c] - v[b][c]);
            g[a][c] += d;
            g[b][c] -= d;
        }
    }
    let ca = p.log_eps * m.mask().h().powi(2) / p.epsilon;
    for &k in &st.cells {
        g[k][2] -= ca * v[k][2];
    }
}
