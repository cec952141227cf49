//! Magnetization fields on a masked grid and the energies acting on them.
//!
//! Discretization: cells carry constant values; the local terms use forward
//! differences between inside neighbors, the nonlocal term N the point-
//! sampled pair sum (1/8)Σ_{i≠j} |a_i − a_j|² h⁴/|x_i − x_j|³.

pub mod cellpair;
pub mod field;
pub mod guard;
pub mod local;
pub mod stray;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainMask;
use crate::kernels::gamma_unchecked;
use crate::pairsum::{LatticeWeights, PairMode, PairSum};
use crate::params::ParameterSet;
use crate::quadrature::KahanSum;

pub use field::{Magnetization2D, Vec3, UNIT_TOL};
pub use local::Stencil;
pub use stray::{
    stray_energy_direct_oracle, stray_energy_tangential, stray_energy_tangential_parts,
    stray_energy_vertical, OracleParts, TangentialParts,
};

/// Point-sampled |x|⁻³ weights h⁴/(h|d|)³ with an optional range cutoff.
pub fn nonlocal_weights(mask: &DomainMask, range: Option<f64>) -> LatticeWeights {
    let h = mask.h();
    LatticeWeights::new(mask.nx(), mask.ny(), move |dx, dy| {
        if dx == 0 && dy == 0 {
            return 0.0;
        }
        let d2 = (dx * dx + dy * dy) as f64;
        let d = d2.sqrt();
        match range {
            Some(r) if d * h > r => 0.0,
            _ => h / (d2 * d),
        }
    })
}

/// Components of G_ε under the extrusion ansatz M = m ⊗ χ_{[0,1]}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GEpsParts {
    /// ε|ln ε|∫(|∇′M|² − |∇′M̄|²); zero for extruded fields.
    pub excess_exchange: f64,
    /// Penalty on ∂₃M; zero for extruded fields.
    pub vertical_variation: f64,
    pub gamma_deficit: f64,
    pub exterior: f64,
    /// Upper bound of the exterior term beyond the truncation radius.
    pub exterior_tail_bound: f64,
    pub exterior_radius: f64,
    pub theta_divergence: f64,
    /// Magnitude (ε/|ln ε|)∫|∇m|² of the unquantified remainder.
    pub error_term: f64,
}

impl GEpsParts {
    pub fn total(&self) -> f64 {
        self.excess_exchange
            + self.vertical_variation
            + self.gamma_deficit
            + self.exterior
            + self.theta_divergence
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub l_eps: f64,
    pub exchange: f64,
    pub anisotropy: f64,
    pub n: f64,
    pub f_eps: f64,
    pub f_eps_r: Option<f64>,
    pub range: Option<f64>,
    pub g_eps: Option<GEpsParts>,
    pub e_eps: Option<f64>,
    pub bv_norm: f64,
    pub mm_gap: f64,
}

/// L_ε, N and F_ε of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FValue {
    pub l: f64,
    pub n: f64,
    pub f: f64,
}

/// Precomputed operators for repeated evaluation of F_ε on one mask.
#[derive(Debug)]
pub struct EnergyModel {
    mask: Arc<DomainMask>,
    params: ParameterSet,
    stencil: Stencil,
    nonlocal: PairSum,
    area: f64,
}

impl EnergyModel {
    pub fn new(mask: Arc<DomainMask>, params: ParameterSet) -> Result<Self> {
        Self::with_mode(mask, params, PairMode::Auto)
    }

    pub fn with_mode(mask: Arc<DomainMask>, params: ParameterSet, mode: PairMode) -> Result<Self> {
        let area = mask.area()?;
        let stencil = Stencil::new(&mask);
        let nonlocal = PairSum::new(nonlocal_weights(&mask, None), mode, stencil.cells.len());
        Ok(EnergyModel {
            mask,
            params,
            stencil,
            nonlocal,
            area,
        })
    }

    pub fn mask(&self) -> &Arc<DomainMask> {
        &self.mask
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn stencil(&self) -> &Stencil {
        &self.stencil
    }

    fn check(&self, m: &Magnetization2D) -> Result<()> {
        if m.mask() != &*self.mask {
            return Err(Error::InvalidField(
                "field lives on a different mask".into(),
            ));
        }
        Ok(())
    }

    pub fn local(&self, m: &Magnetization2D) -> local::LocalParts {
        local::local_parts(m, &self.params, &self.stencil)
    }

    pub fn nonlocal(&self, m: &Magnetization2D) -> f64 {
        self.nonlocal
            .difference_form(&m.m3(), &self.stencil.cells)
            .0
            / 8.0
    }

    /// F_ε = L_ε − N; every call is reported to the lower-bound monitor.
    pub fn f_eps(&self, m: &Magnetization2D) -> Result<FValue> {
        self.check(m)?;
        let l = self.local(m).total();
        let n = self.nonlocal(m);
        let f = l - n;
        guard::observe(f, self.area);
        Ok(FValue { l, n, f })
    }

    /// F_ε and its Euclidean gradient with respect to the cell values.
    pub fn f_eps_with_gradient(&self, m: &Magnetization2D) -> Result<(FValue, Vec<Vec3>)> {
        self.check(m)?;
        let l = self.local(m).total();
        let (d, lap) = self.nonlocal.difference_form(&m.m3(), &self.stencil.cells);
        let n = d / 8.0;
        let f = l - n;
        guard::observe(f, self.area);
        let mut g = vec![[0.0; 3]; m.values().len()];
        local::add_local_gradient(m, &self.params, &self.stencil, &mut g);
        for &k in &self.stencil.cells {
            g[k][2] -= 0.5 * lap[k];
        }
        Ok((FValue { l, n, f }, g))
    }

    pub fn bv_norm(&self, m: &Magnetization2D) -> f64 {
        local::bv_norm_with(m, &self.stencil)
    }

    pub fn breakdown(&self, m: &Magnetization2D) -> Result<EnergyBreakdown> {
        let lp = self.local(m);
        let fv = self.f_eps(m)?;
        Ok(EnergyBreakdown {
            l_eps: fv.l,
            exchange: lp.exchange,
            anisotropy: lp.anisotropy,
            n: fv.n,
            f_eps: fv.f,
            f_eps_r: None,
            range: None,
            g_eps: None,
            e_eps: None,
            bv_norm: self.bv_norm(m),
            mm_gap: local::modica_mortola_gap_with(m, &self.params, &self.stencil),
        })
    }
}

pub fn local_energy_l(m: &Magnetization2D, p: &ParameterSet) -> f64 {
    local::local_parts(m, p, &Stencil::new(m.mask())).total()
}

pub fn nonlocal_energy_n(m: &Magnetization2D) -> f64 {
    nonlocal_energy_range(m, None)
}

fn nonlocal_energy_range(m: &Magnetization2D, range: Option<f64>) -> f64 {
    let cells = m.mask().cells();
    let ps = PairSum::new(
        nonlocal_weights(m.mask(), range),
        PairMode::Auto,
        cells.len(),
    );
    ps.difference_form(&m.m3(), &cells).0 / 8.0
}

pub fn f_eps(m: &Magnetization2D, p: &ParameterSet) -> Result<EnergyBreakdown> {
    EnergyModel::new(m.mask_arc().clone(), *p)?.breakdown(m)
}

/// F_{ε,R}: the N pair sum restricted to |x_i − x_j| ≤ R.
pub fn f_eps_finite_range(m: &Magnetization2D, p: &ParameterSet, range: f64) -> Result<f64> {
    if !(range > 0.0) {
        return Err(Error::Parameter(format!(
            "interaction range R = {range} must be positive"
        )));
    }
    Ok(local_energy_l(m, p) - nonlocal_energy_range(m, Some(range)))
}

pub fn bv_norm(m: &Magnetization2D) -> f64 {
    local::bv_norm_with(m, &Stencil::new(m.mask()))
}

pub fn modica_mortola_gap(m: &Magnetization2D, p: &ParameterSet) -> f64 {
    local::modica_mortola_gap_with(m, p, &Stencil::new(m.mask()))
}

/// Truncation radius of the exterior Γ integral, in multiples of diam Ω.
pub const EXTERIOR_RADIUS_FACTOR: f64 = 10.0;

/// G_ε components for an extruded field.
pub fn g_eps(m: &Magnetization2D, p: &ParameterSet) -> Result<GEpsParts> {
    let mask = m.mask();
    let h = mask.h();
    let omega = p.omega;
    let cells = mask.cells();
    let a = m.m3();

    let gamma_w = move |dx: usize, dy: usize| -> f64 {
        let d2 = (dx * dx + dy * dy) as f64;
        let d = d2.sqrt();
        gamma_unchecked(h * d / omega) / (h * d2 * d)
    };
    let deficit_w = LatticeWeights::new(mask.nx(), mask.ny(), |dx, dy| {
        if dx == 0 && dy == 0 {
            return 0.0;
        }
        let d2 = (dx * dx + dy * dy) as f64;
        let d = d2.sqrt();
        h / (d2 * d) * (1.0 - gamma_unchecked(h * d / omega))
    });
    let gamma_deficit = PairSum::new(deficit_w, PairMode::Auto, cells.len())
        .difference_form(&a, &cells)
        .0
        / 8.0;

    // exterior: Σ_i (1 − a_i²) h² Σ_{j ∉ Ω} Γ h⁴/|x_i − x_j|³ / h²
    let r_ext = EXTERIOR_RADIUS_FACTOR * mask.diameter().max(h);
    let n_ext = (r_ext / h).floor() as usize;
    let lattice_total: f64 = {
        let mut acc = KahanSum::default();
        for dx in 1..=n_ext {
            for dy in 0..=n_ext {
                if ((dx * dx + dy * dy) as f64).sqrt() * h <= r_ext {
                    acc.add(gamma_w(dx, dy));
                }
            }
        }
        4.0 * acc.sum()
    };
    let inside_w = LatticeWeights::new(mask.nx(), mask.ny(), |dx, dy| {
        if dx == 0 && dy == 0 {
            0.0
        } else {
            gamma_w(dx, dy)
        }
    });
    let ones: Vec<f64> = mask
        .inside()
        .iter()
        .map(|&b| if b { 1.0 } else { 0.0 })
        .collect();
    let inside_sum =
        PairSum::new(inside_w, PairMode::Auto, cells.len()).convolve(&ones, &cells, &cells);
    let mut ext = KahanSum::default();
    let mut defect = KahanSum::default();
    for &k in &cells {
        let w = (1.0 - a[k] * a[k]).max(0.0) * h * h;
        defect.add(w);
        ext.add(w * (lattice_total - inside_sum[k]).max(0.0));
    }
    let exterior = 0.25 * ext.sum();
    let exterior_tail_bound = std::f64::consts::PI / (2.0 * r_ext) * defect.sum();

    // Θ term: (1/4)∬ Θ(r/ω) div m′ div m′ / r = (π/ω²)·(ω²/4π)∬ Θ(r/ω) … / r
    let theta_divergence =
        std::f64::consts::PI / (omega * omega) * stray_energy_tangential(m, omega)?;

    let st = Stencil::new(mask);
    let error_term = p.epsilon / p.log_eps * local::dirichlet(m, &st);
    Ok(GEpsParts {
        excess_exchange: 0.0,
        vertical_variation: 0.0,
        gamma_deficit,
        exterior,
        exterior_tail_bound,
        exterior_radius: r_ext,
        theta_divergence,
        error_term,
    })
}

/// E_ε = F_ε + G_ε with all components.
pub fn e_eps(m: &Magnetization2D, p: &ParameterSet) -> Result<EnergyBreakdown> {
    let mut b = f_eps(m, p)?;
    let g = g_eps(m, p)?;
    b.e_eps = Some(b.f_eps + g.total());
    b.g_eps = Some(g);
    Ok(b)
}
