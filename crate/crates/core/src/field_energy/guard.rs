//! Process-wide monitor of the universal lower bound
//! F_ε ≥ −(π²e/4)|Ω| − tol·|Ω|, applied to every F_ε evaluation.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

pub const LOWER_BOUND_CONSTANT: f64 =
    std::f64::consts::PI * std::f64::consts::PI * std::f64::consts::E / 4.0;
pub const LOWER_BOUND_TOL: f64 = 0.01;

static EVALUATIONS: AtomicU64 = AtomicU64::new(0);
static VIOLATIONS: AtomicU64 = AtomicU64::new(0);
// bit pattern of the smallest F/|Ω| seen; starts at +∞
static MIN_RATIO: AtomicU64 = AtomicU64::new(0x7ff0_0000_0000_0000);
static PANIC_ON_VIOLATION: AtomicBool = AtomicBool::new(false);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuardStats {
    pub evaluations: u64,
    pub violations: u64,
    /// Smallest observed F_ε/|Ω|.
    pub min_ratio: f64,
}

pub fn lower_bound(area: f64) -> f64 {
    -(LOWER_BOUND_CONSTANT + LOWER_BOUND_TOL) * area
}

pub fn set_panic_on_violation(on: bool) {
    PANIC_ON_VIOLATION.store(on, Ordering::SeqCst);
}

pub fn observe(f_eps: f64, area: f64) {
    EVALUATIONS.fetch_add(1, Ordering::Relaxed);
    let ratio = f_eps / area;
    let mut cur = MIN_RATIO.load(Ordering::Relaxed);
    while ratio < f64::from_bits(cur) {
        match MIN_RATIO.compare_exchange_weak(
            cur,
            ratio.to_bits(),
            Ordering::Relaxed,
            Ordering::Relaxed,
        ) {
            Ok(_) => break,
            Err(c) => cur = c,
        }
    }
    if !(f_eps >= lower_bound(area)) {
        VIOLATIONS.fetch_add(1, Ordering::Relaxed);
        if PANIC_ON_VIOLATION.load(Ordering::SeqCst) {
            panic!("lower bound violated: F = {f_eps}, |Ω| = {area}");
        }
    }
}

pub fn stats() -> GuardStats {
    GuardStats {
        evaluations: EVALUATIONS.load(Ordering::SeqCst),
        violations: VIOLATIONS.load(Ordering::SeqCst),
        min_ratio: f64::from_bits(MIN_RATIO.load(Ordering::SeqCst)),
    }
}
