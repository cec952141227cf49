//! BV bounds for low-energy states, the compactness diagnostic and the
//! scaling sweep.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::onset::multi_start;
use super::{
    resolution_note, CheckRecord, DomainDescriptor, ExperimentResult, Provenance, SnapshotSink,
    Table,
};
use crate::error::Result;
use crate::field_energy::guard::{LOWER_BOUND_CONSTANT, LOWER_BOUND_TOL};
use crate::field_energy::{EnergyModel, Magnetization2D};
use crate::minimize::{initial_field, minimize_with};
use crate::params::{ParameterSet, DEFAULT_EPS0};

const LOG_BV: &str = "log-weighted BV bound |ln(4X/(pi^2 e^2 |Omega|))| X <= F + (pi^2 e/4)|Omega|";
const SANDWICH: &str =
    "BV sandwich c_alpha |Omega| <= X <= C_alpha |Omega| for F <= -alpha |Omega|";

/// Empirical constants c_α, C_α of the BV sandwich, fitted per ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    /// (ε, min X/|Ω|, max X/|Ω|).
    pub per_epsilon: Vec<(f64, f64, f64)>,
    pub c_alpha: f64,
    pub big_c_alpha: f64,
}

impl Sandwich {
    /// Largest ratio between the per-ε lower constants and between the
    /// per-ε upper constants.
    pub fn variation(&self) -> (f64, f64) {
        let spread = |sel: fn(&(f64, f64, f64)) -> f64| {
            let (lo, hi) = self
                .per_epsilon
                .iter()
                .map(sel)
                .fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(v), b.max(v)));
            hi / lo
        };
        (spread(|t| t.1), spread(|t| t.2))
    }
}

/// Fits the sandwich from (ε, ‖∇m₃‖/|Ω|) samples of low-energy states.
pub fn fit_sandwich(samples: &[(f64, f64)]) -> Option<Sandwich> {
    if samples.is_empty() {
        return None;
    }
    let mut eps: Vec<f64> = samples.iter().map(|s| s.0).collect();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    let per_epsilon: Vec<(f64, f64, f64)> = eps
        .iter()
        .map(|&e| {
            let (lo, hi) = samples
                .iter()
                .filter(|s| s.0 == e)
                .fold((f64::INFINITY, 0.0f64), |(a, b), s| {
                    (a.min(s.1), b.max(s.1))
                });
            (e, lo, hi)
        })
        .collect();
    Some(Sandwich {
        c_alpha: per_epsilon
            .iter()
            .map(|t| t.1)
            .fold(f64::INFINITY, f64::min),
        big_c_alpha: per_epsilon.iter().map(|t| t.2).fold(0.0, f64::max),
        per_epsilon,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BvOptions {
    pub alpha: f64,
    /// Discretization tolerance as a multiple of |Ω|.
    pub tol: f64,
    pub sandwich: Option<Sandwich>,
    pub eps0: f64,
}

impl Default for BvOptions {
    fn default() -> Self {
        BvOptions {
            alpha: 0.1,
            tol: LOWER_BOUND_TOL,
            sandwich: None,
            eps0: DEFAULT_EPS0,
        }
    }
}

/// The log-weighted BV bound (always) and, for F_ε ≤ −α|Ω|, the BV
/// sandwich, the Modica–Mortola gap and the L_ε, N ∼ |Ω||ln ε| scalings.
pub fn check_bv_bounds(
    m: &Magnetization2D,
    p: &ParameterSet,
    opts: &BvOptions,
) -> Result<Vec<CheckRecord>> {
    let model = EnergyModel::new(m.mask_arc().clone(), *p)?;
    let b = model.breakdown(m)?;
    let area = model.area();
    let x = b.bv_norm;
    let lhs = if x > 0.0 {
        (4.0 * x / (std::f64::consts::PI.powi(2) * std::f64::consts::E.powi(2) * area))
            .ln()
            .abs()
            * x
    } else {
        0.0
    };
    let warn = (p.epsilon > opts.eps0)
        .then(|| format!("epsilon = {} above the guard {}", p.epsilon, opts.eps0));
    let mut out = vec![CheckRecord::check(
        "log-weighted BV bound",
        LOG_BV,
        lhs,
        b.f_eps + LOWER_BOUND_CONSTANT * area,
        opts.tol * area,
    )];
    if b.f_eps <= -opts.alpha * area {
        match &opts.sandwich {
            Some(s) => {
                out.push(CheckRecord::check(
                    "BV sandwich lower",
                    SANDWICH,
                    s.c_alpha * area,
                    x,
                    opts.tol * area,
                ));
                out.push(CheckRecord::check(
                    "BV sandwich upper",
                    SANDWICH,
                    x,
                    s.big_c_alpha * area,
                    opts.tol * area,
                ));
            }
            None => out.push(CheckRecord::report(
                "BV per area (sandwich sample)",
                SANDWICH,
                x / area,
                x / area,
            )),
        }
        let scaled_gap = b.mm_gap * p.log_eps / area;
        out.push(CheckRecord::report(
            "Modica-Mortola gap times |ln eps|/|Omega|",
            "gap bound 0 <= MM energy - BV <= C_alpha |Omega|/|ln eps|",
            scaled_gap,
            scaled_gap,
        ));
        let norm = area * p.log_eps;
        out.push(CheckRecord::report(
            "L_eps/(|Omega||ln eps|)",
            "L_eps, N in [c_alpha, C_alpha] |Omega||ln eps|",
            b.l_eps / norm,
            b.l_eps / norm,
        ));
        out.push(CheckRecord::report(
            "N/(|Omega||ln eps|)",
            "L_eps, N in [c_alpha, C_alpha] |Omega||ln eps|",
            b.n / norm,
            b.n / norm,
        ));
    } else {
        out.push(
            CheckRecord::report(
                "F/|Omega| (above the low-energy level)",
                SANDWICH,
                b.f_eps / area,
                -opts.alpha,
            )
            .with_note("sandwich and gap statements apply only when F <= -alpha |Omega|"),
        );
    }
    if let Some(w) = warn {
        for r in &mut out {
            r.note.get_or_insert_with(|| w.clone());
        }
    }
    Ok(out)
}

/// Multi-start minimization per ε on the configured domain; every output with
/// F_ε ≤ −α|Ω| feeds the log-weighted bound and the fitted BV sandwich.
pub fn bv_suite(cfg: &ExperimentConfig, sink: &SnapshotSink) -> Result<ExperimentResult> {
    let mask = cfg.domain.mask()?;
    let mut table = Table::new(&[
        "epsilon",
        "run",
        "f_over_area",
        "bv_over_area",
        "low_energy",
    ]);
    let mut res = ExperimentResult::new(
        "bv_bounds",
        Provenance::new(cfg.seed, Some(mask.h())),
        Table::default(),
    );
    res.domain = Some(DomainDescriptor::of(&mask));
    let mut samples = Vec::new();
    let mut missing = 0usize;
    let mut low_fields = Vec::new();
    for &eps in &cfg.sweep.epsilons {
        let p = ParameterSet::derive(eps, cfg.q)?;
        res.notes.extend(resolution_note(mask.h(), eps));
        let ms = multi_start(&mask, &p, &cfg.solver, &cfg.starts, cfg.seed)?;
        let mut found = false;
        for (i, (r, m)) in ms.runs.iter().zip(&ms.fields).enumerate() {
            let low = r.f_eps <= -cfg.alpha * ms.area;
            table.push(vec![
                eps,
                i as f64,
                r.f_eps / ms.area,
                r.bv / ms.area,
                f64::from(u8::from(low)),
            ]);
            if low {
                found = true;
                samples.push((eps, r.bv / ms.area));
                low_fields.push((eps, i, m.clone(), p));
            }
        }
        if !found {
            missing += 1;
            res.notes.push(format!(
                "eps = {eps:e}: no start reached F <= -{} |Omega| (best F/|Omega| = {:.6e})",
                cfg.alpha,
                ms.best_run().f_eps / ms.area
            ));
        }
    }
    res.checks.push(CheckRecord::check(
        "epsilon values without a low-energy minimizer output",
        SANDWICH,
        missing as f64,
        0.0,
        0.0,
    ));
    let sandwich = fit_sandwich(&samples);
    let opts = BvOptions {
        alpha: cfg.alpha,
        sandwich: sandwich.clone(),
        eps0: cfg.eps0,
        ..BvOptions::default()
    };
    for (eps, i, m, p) in &low_fields {
        let mut recs = check_bv_bounds(m, p, &opts)?;
        for r in &mut recs {
            r.claim = format!("{} [eps={eps:e}, run {i}]", r.claim);
        }
        sink.attach(&format!("bv_eps{eps:e}_run{i}"), m, p, &mut recs)?;
        res.checks.extend(recs);
    }
    if let Some(s) = &sandwich {
        let (lo, hi) = s.variation();
        res.checks.push(
            CheckRecord::check(
                "sandwich constant variation across eps",
                SANDWICH,
                lo.max(hi),
                2.0,
                0.0,
            )
            .with_note(format!(
                "c_alpha = {:.6e}, C_alpha = {:.6e}",
                s.c_alpha, s.big_c_alpha
            )),
        );
    }
    res.table = table;
    Ok(res)
}

/// Minimizes from the same seeded start for each ε (decreasing) on one grid.
pub fn compactness_diagnostic(
    cfg: &ExperimentConfig,
    sink: &SnapshotSink,
) -> Result<ExperimentResult> {
    let mask = cfg.domain.mask()?;
    let h2 = mask.h() * mask.h();
    let cells = mask.cells();
    let mut table = Table::new(&[
        "epsilon",
        "f_eps",
        "in_plane_mass",
        "in_plane_over_eps_log",
        "bv",
        "bv_over_area",
        "soft_measure",
        "l1_to_previous",
    ]);
    let mut res = ExperimentResult::new(
        "compactness",
        Provenance::new(cfg.seed, Some(mask.h())),
        Table::default(),
    );
    res.domain = Some(DomainDescriptor::of(&mask));
    let mut prev: Option<Vec<f64>> = None;
    let mut ratios = Vec::new();
    let mut bvs = Vec::new();
    for &eps in &cfg.sweep.epsilons {
        let p = ParameterSet::derive(eps, cfg.q)?;
        res.notes.extend(resolution_note(mask.h(), eps));
        let model = EnergyModel::new(mask.clone(), p)?;
        let m0 = initial_field(&mask, &p, &cfg.solver)?;
        let tr = minimize_with(&model, m0, &cfg.solver)?;
        let m = &tr.field;
        let a = m.m3();
        let mass = h2 * cells.iter().map(|&k| 1.0 - a[k] * a[k]).sum::<f64>();
        let soft = h2 * cells.iter().filter(|&&k| a[k].abs() < 0.9).count() as f64;
        let fr = tr.final_row();
        let l1 = prev.as_ref().map_or(f64::NAN, |q| {
            h2 * cells.iter().map(|&k| (a[k] - q[k]).abs()).sum::<f64>()
        });
        let ratio = mass / (eps * p.log_eps);
        ratios.push(ratio);
        bvs.push(fr.bv);
        table.push(vec![
            eps,
            fr.f_eps,
            mass,
            ratio,
            fr.bv,
            fr.bv / model.area(),
            soft,
            l1,
        ]);
        let bound = 2.0 * eps * fr.l_eps / p.log_eps;
        let mut recs = vec![CheckRecord::check(
            format!("in-plane mass <= 2 eps L_eps/|ln eps| [eps={eps:e}]"),
            "compactness: in-plane mass controlled by eps L_eps",
            mass,
            bound,
            1e-12 * bound.abs(),
        )];
        sink.attach(&format!("compactness_eps{eps:e}"), m, &p, &mut recs)?;
        res.checks.extend(recs);
        prev = Some(a);
    }
    let c_fit = ratios.iter().copied().fold(0.0, f64::max);
    res.checks.push(CheckRecord::report(
        "fitted C in in-plane mass <= C eps |ln eps|",
        "compactness: in-plane mass <= C eps |ln eps| -> 0",
        c_fit,
        c_fit,
    ));
    let (lo, hi) = bvs
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    res.checks.push(CheckRecord::report(
        "largest BV norm across the sweep",
        "compactness: BV norms bounded uniformly in eps",
        hi,
        hi,
    ));
    if lo.is_finite() {
        res.notes
            .push(format!("BV range across the sweep: [{lo:.6e}, {hi:.6e}]"));
    }
    res.table = table;
    Ok(res)
}

/// Best-of-starts F_ε/|Ω| and ‖∇m₃‖/|Ω| across ε on one large shape.
pub fn scaling_sweep(cfg: &ExperimentConfig, sink: &SnapshotSink) -> Result<ExperimentResult> {
    let mask = cfg.domain.mask()?;
    let mut table = Table::new(&[
        "epsilon",
        "best_f_over_area",
        "bv_over_area",
        "omega",
        "s_over_t",
        "d_over_t",
        "d_over_s",
    ]);
    let mut res = ExperimentResult::new(
        "scaling_sweep",
        Provenance::new(cfg.seed, Some(mask.h())),
        Table::default(),
    );
    res.domain = Some(DomainDescriptor::of(&mask));
    for &eps in &cfg.sweep.epsilons {
        let p = ParameterSet::derive(eps, cfg.q)?;
        res.notes.extend(resolution_note(mask.h(), eps));
        let ms = multi_start(&mask, &p, &cfg.solver, &cfg.starts, cfg.seed)?;
        let b = ms.best_run();
        let (f, x) = (b.f_eps / ms.area, b.bv / ms.area);
        table.push(vec![eps, f, x, p.omega, p.s_over_t, p.d_over_t, p.d_over_s]);
        let mut recs = vec![
            CheckRecord::check(
                format!("|F|/|Omega| >= 0.01 [eps={eps:e}]"),
                "ground-state energy of order |Omega|",
                0.01,
                f.abs(),
                0.0,
            ),
            CheckRecord::check(
                format!("|F|/|Omega| <= pi^2 e/4 [eps={eps:e}]"),
                "ground-state energy of order |Omega|",
                f.abs(),
                LOWER_BOUND_CONSTANT,
                0.0,
            ),
            CheckRecord::report(
                format!("BV/|Omega| [eps={eps:e}]"),
                "domain width of order one",
                x,
                x,
            ),
        ];
        sink.attach(&format!("sweep_eps{eps:e}"), &ms.best_field, &p, &mut recs)?;
        res.checks.extend(recs);
    }
    res.table = table;
    Ok(res)
}
