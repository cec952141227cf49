//! The H^{1/2}–BV interpolation inequality
//! ∬|f(x) − f(y)|²/|x − y|³ ≤ πr∫|∇f|² + 8 ln(R/r)‖f‖∞∫|∇f|
//!   + (4πα₀/R)‖f‖∞ min{diam Ω ∫|∇f|, 2|Ω|‖f‖∞}.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::{CheckRecord, DomainDescriptor, ExperimentResult, Provenance, Table};
use crate::error::{Error, Result};
use crate::field_energy::local::{scalar_dirichlet, scalar_total_variation};
use crate::field_energy::{nonlocal_weights, Stencil};
use crate::geometry::{DomainMask, Shape};
use crate::pairsum::{PairMode, PairSum};
use crate::profiles::xi_eps;

const REFERENCE: &str = "H^1/2-BV interpolation inequality with leading constant 8";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationTerms {
    pub lhs: f64,
    pub small: f64,
    pub medium: f64,
    pub large: f64,
    pub sup: f64,
    pub dirichlet: f64,
    pub total_variation: f64,
}

impl InterpolationTerms {
    pub fn rhs(&self) -> f64 {
        self.small + self.medium + self.large
    }
}

/// Evaluates both sides for repeated fields on one mask.
pub struct InterpolationEvaluator {
    mask: Arc<DomainMask>,
    stencil: Stencil,
    pairs: PairSum,
    area: f64,
    diameter: f64,
}

impl InterpolationEvaluator {
    pub fn new(mask: Arc<DomainMask>) -> Result<Self> {
        let stencil = Stencil::new(&mask);
        let pairs = PairSum::new(
            nonlocal_weights(&mask, None),
            PairMode::Auto,
            stencil.cells.len(),
        );
        Ok(InterpolationEvaluator {
            area: mask.area()?,
            diameter: mask.diameter(),
            mask,
            stencil,
            pairs,
        })
    }

    pub fn mask(&self) -> &Arc<DomainMask> {
        &self.mask
    }

    pub fn terms(&self, f: &[f64], r: f64, big_r: f64) -> Result<InterpolationTerms> {
        if !(r > 0.0 && r <= big_r) {
            return Err(Error::Parameter(format!(
                "need 0 < r <= R (r = {r}, R = {big_r})"
            )));
        }
        if f.len() != self.mask.len() {
            return Err(Error::InvalidField(
                "scalar field length differs from the grid".into(),
            ));
        }
        let lhs = self.pairs.difference_form(f, &self.stencil.cells).0;
        let sup = self
            .stencil
            .cells
            .iter()
            .map(|&k| f[k].abs())
            .fold(0.0, f64::max);
        let dirichlet = scalar_dirichlet(f, &self.stencil);
        let tv = scalar_total_variation(f, &self.stencil, self.mask.h());
        let alpha0 = if big_r < self.diameter { 1.0 } else { 0.0 };
        Ok(InterpolationTerms {
            lhs,
            small: PI * r * dirichlet,
            medium: 8.0 * (big_r / r).ln() * sup * tv,
            large: 4.0 * PI * alpha0 / big_r
                * sup
                * (self.diameter * tv).min(2.0 * self.area * sup),
            sup,
            dirichlet,
            total_variation: tv,
        })
    }
}

/// Record for one field; passes when lhs ≤ rhs·(1 + rel_tol).
pub fn check_interpolation(
    mask: Arc<DomainMask>,
    f: &[f64],
    r: f64,
    big_r: f64,
    rel_tol: f64,
) -> Result<CheckRecord> {
    let t = InterpolationEvaluator::new(mask)?.terms(f, r, big_r)?;
    Ok(record(&t, r, big_r, rel_tol, ""))
}

fn record(t: &InterpolationTerms, r: f64, big_r: f64, rel_tol: f64, tag: &str) -> CheckRecord {
    CheckRecord::check(
        format!("interpolation inequality r={r}, R={big_r}{tag}"),
        REFERENCE,
        t.lhs,
        t.rhs(),
        rel_tol * t.rhs(),
    )
}

/// Random low-order trigonometric polynomial on the mask, scaled to a random
/// sup norm in [0.5, 2] and clipped to [−1, 1].
pub fn random_smooth_field(mask: &DomainMask, rng: &mut impl Rng) -> Vec<f64> {
    let (lo, _) = mask.shape().bounding_box();
    let scale = 2.0 * PI / mask.diameter().max(mask.h());
    let terms: Vec<(f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.gen_range(-3i32..=3) as f64 * scale,
                rng.gen_range(-3i32..=3) as f64 * scale,
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..2.0 * PI),
            )
        })
        .collect();
    let target: f64 = rng.gen_range(0.5..2.0);
    let raw: Vec<f64> = (0..mask.len())
        .map(|k| {
            if !mask.inside()[k] {
                return 0.0;
            }
            let p = mask.center(k) - lo;
            terms
                .iter()
                .map(|&(kx, ky, a, ph)| a * (kx * p.x + ky * p.y + ph).cos())
                .sum()
        })
        .collect();
    let sup = raw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if sup == 0.0 {
        return raw;
    }
    raw.iter()
        .map(|v| (v * target / sup).clamp(-1.0, 1.0))
        .collect()
}

/// `fields` random fields × the configured (r, R) pairs on the configured domain.
pub fn interpolation_suite(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let mask = cfg.domain.mask()?;
    let eval = InterpolationEvaluator::new(mask.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ic = &cfg.interpolation;
    let mut table = Table::new(&[
        "field",
        "r",
        "R",
        "lhs",
        "rhs",
        "lhs_over_rhs",
        "sup",
        "total_variation",
    ]);
    let mut res = ExperimentResult::new(
        "interpolation",
        Provenance::new(cfg.seed, Some(mask.h())),
        Table::default(),
    );
    res.domain = Some(DomainDescriptor::of(&mask));
    for i in 0..ic.fields {
        let f = random_smooth_field(&mask, &mut rng);
        for &[r, big_r] in &ic.pairs {
            let t = eval.terms(&f, r, big_r)?;
            table.push(vec![
                i as f64,
                r,
                big_r,
                t.lhs,
                t.rhs(),
                t.lhs / t.rhs(),
                t.sup,
                t.total_variation,
            ]);
            res.checks
                .push(record(&t, r, big_r, ic.rel_tol, &format!(" [field {i}]")));
        }
    }
    for (eps, ratio) in sharpness_probe(&ic.sharpness_epsilons)? {
        res.checks.push(
            CheckRecord::report(
                format!("sharpness ratio of the constant 8 at eps={eps}"),
                REFERENCE,
                ratio,
                1.0,
            )
            .with_note("ratio LHS/(8 ln(R/r) sup|f| TV f) for an extruded transition profile, r = eps, R = diam"),
        );
    }
    res.table = table;
    Ok(res)
}

/// LHS/(8 ln(R/r)‖f‖∞∫|∇f|) for f = ξ_ε(x₁ − 1/2) on the unit square,
/// r = ε, R = diam, grid h = ε/4.
pub fn sharpness_probe(epsilons: &[f64]) -> Result<Vec<(f64, f64)>> {
    epsilons
        .iter()
        .map(|&eps| {
            let n = (4.0 / eps).ceil() as usize;
            let mask = Arc::new(DomainMask::with_cells(Shape::unit_square(), n)?);
            let f: Vec<f64> = (0..mask.len())
                .map(|k| {
                    if mask.inside()[k] {
                        xi_eps(eps, mask.center(k).x - 0.5)
                    } else {
                        0.0
                    }
                })
                .collect();
            let eval = InterpolationEvaluator::new(mask.clone())?;
            let big_r = mask.diameter();
            let t = eval.terms(&f, eps, big_r)?;
            Ok((eps, t.lhs / t.medium))
        })
        .collect()
}
