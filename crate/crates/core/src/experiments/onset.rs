//! Multi-start minimization and the onset phase diagram.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{mask_for, ExperimentConfig};
use super::{CheckRecord, DomainDescriptor, ExperimentResult, Provenance, SnapshotSink, Table};
use crate::error::Result;
use crate::field_energy::guard::{LOWER_BOUND_CONSTANT, LOWER_BOUND_TOL};
use crate::field_energy::{EnergyModel, Magnetization2D};
use crate::geometry::DomainMask;
use crate::minimize::{initial_field, minimize_with, MinimizeConfig, Termination};
use crate::params::{onset_threshold, ParameterSet};

/// F_ε < −`PATTERN_ENERGY_TOL`·|Ω| and ‖∇m₃‖ > `PATTERN_BV_TOL`·|Ω| mark a
/// patterned state.
pub const PATTERN_ENERGY_TOL: f64 = 1e-3;
pub const PATTERN_BV_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Uniform,
    Patterned,
    Indeterminate,
}

impl Classification {
    pub fn of(f: f64, bv: f64, area: f64) -> Self {
        let low = f < -PATTERN_ENERGY_TOL * area;
        let rough = bv > PATTERN_BV_TOL * area;
        match (low, rough) {
            (true, true) => Classification::Patterned,
            (false, false) => Classification::Uniform,
            _ => Classification::Indeterminate,
        }
    }

    pub fn code(self) -> f64 {
        match self {
            Classification::Uniform => 0.0,
            Classification::Patterned => 1.0,
            Classification::Indeterminate => 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub label: String,
    pub f_eps: f64,
    pub l_eps: f64,
    pub n: f64,
    pub bv: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub monotone: bool,
}

#[derive(Debug, Clone)]
pub struct MultiStart {
    pub runs: Vec<RunSummary>,
    pub best: usize,
    pub best_field: Magnetization2D,
    /// Final field of every run, aligned with `runs`.
    pub fields: Vec<Magnetization2D>,
    pub area: f64,
}

impl MultiStart {
    pub fn best_run(&self) -> &RunSummary {
        &self.runs[self.best]
    }

    pub fn classification(&self) -> Classification {
        let b = self.best_run();
        Classification::of(b.f_eps, b.bv, self.area)
    }
}

/// Minimizes from every configured start (in parallel) and keeps the lowest
/// final energy; ties go to the earlier start.
pub fn multi_start(
    mask: &Arc<DomainMask>,
    p: &ParameterSet,
    solver: &MinimizeConfig,
    starts: &super::StartsConfig,
    seed: u64,
) -> Result<MultiStart> {
    let model = EnergyModel::new(mask.clone(), *p)?;
    let inits = starts.inits(seed);
    let outcomes: Vec<Option<(RunSummary, Magnetization2D)>> = inits
        .par_iter()
        .map(
            |(label, kind, s)| -> Result<Option<(RunSummary, Magnetization2D)>> {
                let cfg = MinimizeConfig {
                    init: kind.clone(),
                    seed: *s,
                    ..solver.clone()
                };
                let m0 = match initial_field(mask, p, &cfg) {
                    Ok(m) => m,
                    Err(crate::Error::Geometry(_)) | Err(crate::Error::Parameter(_)) => {
                        return Ok(None)
                    }
                    Err(e) => return Err(e),
                };
                let tr = minimize_with(&model, m0, &cfg)?;
                let r = tr.final_row();
                Ok(Some((
                    RunSummary {
                        label: label.clone(),
                        f_eps: r.f_eps,
                        l_eps: r.l_eps,
                        n: r.n,
                        bv: r.bv,
                        iterations: r.iteration,
                        termination: tr.termination,
                        monotone: tr.is_monotone(),
                    },
                    tr.field,
                )))
            },
        )
        .collect::<Result<_>>()?;
    let (runs, fields): (Vec<RunSummary>, Vec<Magnetization2D>) =
        outcomes.into_iter().flatten().unzip();
    let mut best: Option<usize> = None;
    for (i, r) in runs.iter().enumerate() {
        if best.is_none_or(|b| r.f_eps < runs[b].f_eps) {
            best = Some(i);
        }
    }
    let best = best.ok_or_else(|| crate::Error::Config("no usable start".into()))?;
    Ok(MultiStart {
        best_field: fields[best].clone(),
        runs,
        best,
        fields,
        area: model.area(),
    })
}

/// Phase table over (ε, diam) for the configured shape family.
pub fn onset_scan(cfg: &ExperimentConfig, sink: &SnapshotSink) -> Result<ExperimentResult> {
    let mut table = Table::new(&[
        "epsilon",
        "diam",
        "threshold",
        "diam_over_threshold",
        "h",
        "area",
        "best_f",
        "best_f_over_area",
        "bv_over_area",
        "class",
        "boundary_constant",
    ]);
    let mut res = ExperimentResult::new(
        "onset_scan",
        Provenance::new(cfg.seed, None),
        Table::default(),
    );
    for &eps in &cfg.onset.epsilons {
        let p = ParameterSet::derive(eps, cfg.q)?;
        let thr = onset_threshold(eps)?;
        let mut diams: Vec<f64> = cfg.onset.diam_factors.iter().map(|f| f * thr).collect();
        diams.extend(cfg.onset.diams.iter().copied());
        if eps > cfg.eps0 {
            res.notes.push(format!(
                "epsilon = {eps} above the guard {}: asymptotic statements may not apply",
                cfg.eps0
            ));
        }
        for d in diams {
            let mask = mask_for(cfg.domain.shape.with_diameter(d)?, cfg.onset.cells, None)?;
            if let Some(n) = super::resolution_note(mask.h(), eps) {
                res.notes.push(format!("diam = {d}: {n}"));
            }
            let ms = multi_start(&mask, &p, &cfg.solver, &cfg.starts, cfg.seed)?;
            let best = ms.best_run().clone();
            let area = ms.area;
            let class = ms.classification();
            let boundary_constant = if best.f_eps < 0.0 {
                -best.f_eps / mask.perimeter()
            } else {
                0.0
            };
            table.push(vec![
                eps,
                d,
                thr,
                d / thr,
                mask.h(),
                area,
                best.f_eps,
                best.f_eps / area,
                best.bv / area,
                class.code(),
                boundary_constant,
            ]);
            let tag = format!("eps={eps:e}, diam={d:.6}");
            let mut recs = vec![CheckRecord::check(
                format!("lower bound F >= -(pi^2 e/4)|Omega| [{tag}]"),
                "universal lower bound on F_eps for convex domains",
                -LOWER_BOUND_CONSTANT * area,
                best.f_eps,
                LOWER_BOUND_TOL * area,
            )];
            if d < thr {
                recs.push(
                    CheckRecord::check(
                        format!("no negative state below onset [{tag}]"),
                        "onset of domain formation: uniform minimizers below the critical diameter",
                        -best.f_eps,
                        PATTERN_ENERGY_TOL * area,
                        0.0,
                    )
                    .with_note("evidence only: a numerical search cannot prove uniqueness"),
                );
                recs.push(CheckRecord::check(
                    format!("best state uniform, BV <= 1e-2 |Omega| [{tag}]"),
                    "onset of domain formation: uniform minimizers below the critical diameter",
                    best.bv,
                    PATTERN_BV_TOL * area,
                    0.0,
                ));
                recs.push(CheckRecord::report(
                    format!("small-domain boundary constant c_fit [{tag}]"),
                    "small-domain lower bound -c|boundary|",
                    boundary_constant,
                    boundary_constant,
                ));
            } else {
                recs.push(CheckRecord::report(
                    format!(
                        "classification code (0 uniform, 1 patterned, 2 indeterminate) [{tag}]"
                    ),
                    "large domains carry negative energy",
                    class.code(),
                    1.0,
                ));
            }
            sink.attach(
                &format!("onset_eps{eps:e}_diam{d:.6}"),
                &ms.best_field,
                &p,
                &mut recs,
            )?;
            res.checks.extend(recs);
            res.domain
                .get_or_insert_with(|| DomainDescriptor::of(&mask));
        }
    }
    res.table = table;
    Ok(res)
}
