//! Sphere-constrained projected descent on F_ε with Barzilai–Borwein steps
//! and a monotone Armijo line search.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_energy::{EnergyModel, FValue, Magnetization2D, Vec3};
use crate::geometry::DomainMask;
use crate::params::ParameterSet;
use crate::profiles::{multi_bubble_field, pack_bubbles};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitKind {
    UniformUp,
    UniformDown,
    RandomUnit,
    /// Hexagonal packing of disk bubbles of the given radius.
    Bubble {
        radius: f64,
    },
    FromSnapshot {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinimizeConfig {
    pub max_iterations: usize,
    /// Stop when the L² norm of the projected gradient density drops below this.
    pub grad_tol: f64,
    /// Largest per-cell displacement of the first trial step.
    pub initial_step: f64,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    pub init: InitKind,
    pub seed: u64,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        MinimizeConfig {
            max_iterations: 2000,
            grad_tol: 1e-6,
            initial_step: 0.1,
            backtrack_factor: 0.5,
            max_backtracks: 40,
            armijo: 1e-4,
            init: InitKind::RandomUnit,
            seed: 0,
        }
    }
}

impl MinimizeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0
            && self.initial_step > 0.0
            && self.armijo > 0.0
            && self.armijo < 1.0)
        {
            return Err(Error::Config(
                "tolerances and step sizes must be positive".into(),
            ));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::Config("backtrack factor must lie in (0,1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    Stalled,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max_iterations",
            Termination::Stalled => "stalled",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub f_eps: f64,
    pub l_eps: f64,
    pub n: f64,
    pub bv: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct MinimizeTrace {
    pub rows: Vec<TraceRow>,
    pub field: Magnetization2D,
    pub termination: Termination,
}

impl MinimizeTrace {
    pub fn final_row(&self) -> &TraceRow {
        self.rows.last().expect("trace has the initial row")
    }

    pub fn initial_row(&self) -> &TraceRow {
        &self.rows[0]
    }

    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].f_eps <= w[0].f_eps)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["iteration", "f_eps", "l_eps", "n", "bv", "gradnorm", "step"])?;
        for r in &self.rows {
            w.write_record([
                r.iteration.to_string(),
                format!("{:.12e}", r.f_eps),
                format!("{:.12e}", r.l_eps),
                format!("{:.12e}", r.n),
                format!("{:.12e}", r.bv),
                format!("{:.6e}", r.grad_norm),
                format!("{:.6e}", r.step),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

pub fn initial_field(
    mask: &Arc<DomainMask>,
    p: &ParameterSet,
    cfg: &MinimizeConfig,
) -> Result<Magnetization2D> {
    match &cfg.init {
        InitKind::UniformUp => Ok(Magnetization2D::uniform_up(mask.clone())),
        InitKind::UniformDown => Ok(Magnetization2D::uniform_down(mask.clone())),
        InitKind::RandomUnit => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            Ok(Magnetization2D::random_unit(mask.clone(), &mut rng))
        }
        InitKind::Bubble { radius } => {
            multi_bubble_field(&pack_bubbles(mask.clone(), *radius, p.epsilon)?)
        }
        InitKind::FromSnapshot { path } => {
            let (m, _) = Magnetization2D::read_snapshot(path)?;
            if m.mask() != &**mask {
                return Err(Error::Snapshot(
                    "snapshot grid differs from the configured mask".into(),
                ));
            }
            Ok(m)
        }
    }
}

fn project(g: &mut [Vec3], m: &[Vec3]) {
    for (gk, mk) in g.iter_mut().zip(m) {
        let s = gk[0] * mk[0] + gk[1] * mk[1] + gk[2] * mk[2];
        for c in 0..3 {
            gk[c] -= s * mk[c];
        }
    }
}

fn dot(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x[0] * y[0] + x[1] * y[1] + x[2] * y[2])
        .sum()
}

/// Euclidean gradient of the discrete F_ε projected onto the tangent
/// spaces: g − (g·m)m per cell.
pub fn gradient_f(m: &Magnetization2D, p: &ParameterSet) -> Result<Vec<Vec3>> {
    let model = EnergyModel::new(m.mask_arc().clone(), *p)?;
    projected_gradient(&model, m).map(|(_, g)| g)
}

pub fn projected_gradient(model: &EnergyModel, m: &Magnetization2D) -> Result<(FValue, Vec<Vec3>)> {
    let (fv, mut g) = model.f_eps_with_gradient(m)?;
    project(&mut g, m.values());
    Ok((fv, g))
}

/// Per-cell division by |m|; cells outside the mask must be zero.
pub fn renormalize(mask: Arc<DomainMask>, mut values: Vec<Vec3>) -> Result<Magnetization2D> {
    for (k, v) in values.iter_mut().enumerate() {
        if !mask.inside()[k] {
            continue;
        }
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(n >= 0.5) {
            return Err(Error::Retraction { cell: k, norm: n });
        }
        for c in v.iter_mut() {
            *c /= n;
        }
    }
    Magnetization2D::from_values(mask, values)
}

/// ‖δF/δm‖ in L²: the cell gradient carries a factor h².
fn grad_density_norm(g: &[Vec3], h: f64) -> f64 {
    dot(g, g).sqrt() / h
}

pub fn minimize(
    m0: Magnetization2D,
    p: &ParameterSet,
    cfg: &MinimizeConfig,
) -> Result<MinimizeTrace> {
    cfg.validate()?;
    m0.validate()?;
    let model = EnergyModel::new(m0.mask_arc().clone(), *p)?;
    minimize_with(&model, m0, cfg)
}

pub fn minimize_with(
    model: &EnergyModel,
    m0: Magnetization2D,
    cfg: &MinimizeConfig,
) -> Result<MinimizeTrace> {
    cfg.validate()?;
    let h = model.mask().h();
    let mut m = m0;
    let (mut fv, mut g) = projected_gradient(model, &m)?;
    let mut gn = grad_density_norm(&g, h);
    let mut rows = vec![TraceRow {
        iteration: 0,
        f_eps: fv.f,
        l_eps: fv.l,
        n: fv.n,
        bv: model.bv_norm(&m),
        grad_norm: gn,
        step: 0.0,
    }];
    let mut step = f64::NAN;
    let mut termination = Termination::MaxIterations;
    for it in 1..=cfg.max_iterations {
        if gn <= cfg.grad_tol {
            termination = Termination::Converged;
            break;
        }
        let g2 = dot(&g, &g);
        let gmax = g
            .iter()
            .map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
            .fold(0.0, f64::max);
        let cap = 0.5 / gmax;
        let mut tau = if step.is_finite() {
            step.min(cap)
        } else {
            cfg.initial_step / gmax
        };
        let mut accepted = None;
        for _ in 0..=cfg.max_backtracks {
            let trial: Vec<Vec3> = m
                .values()
                .iter()
                .zip(&g)
                .map(|(v, d)| [v[0] - tau * d[0], v[1] - tau * d[1], v[2] - tau * d[2]])
                .collect();
            match renormalize(model.mask().clone(), trial) {
                Ok(cand) => {
                    let (cf, cg) = projected_gradient(model, &cand)?;
                    if cf.f <= fv.f - cfg.armijo * tau * g2 {
                        accepted = Some((cand, cf, cg));
                        break;
                    }
                }
                Err(Error::Retraction { .. }) => {}
                Err(e) => return Err(e),
            }
            tau *= cfg.backtrack_factor;
        }
        let Some((next, nfv, ng)) = accepted else {
            termination = Termination::Stalled;
            break;
        };
        // Barzilai–Borwein step from the accepted displacement
        let s: Vec<Vec3> = next
            .values()
            .iter()
            .zip(m.values())
            .map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2]])
            .collect();
        let y: Vec<Vec3> = ng
            .iter()
            .zip(&g)
            .map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2]])
            .collect();
        let (ss, sy) = (dot(&s, &s), dot(&s, &y));
        step = if sy > 0.0 && ss > 0.0 {
            ss / sy
        } else {
            2.0 * tau
        };
        m = next;
        fv = nfv;
        g = ng;
        gn = grad_density_norm(&g, h);
        rows.push(TraceRow {
            iteration: it,
            f_eps: fv.f,
            l_eps: fv.l,
            n: fv.n,
            bv: model.bv_norm(&m),
            grad_norm: gn,
            step: tau,
        });
    }
    if termination == Termination::MaxIterations && gn <= cfg.grad_tol {
        termination = Termination::Converged;
    }
    Ok(MinimizeTrace {
        rows,
        field: m,
        termination,
    })
}
