//! Dimensionless material/geometry parameters (ε, Q) and derived ratios.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default guard ε₀: theorem checkers run silently for ε ≤ ε₀ and warn above.
pub const DEFAULT_EPS0: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub epsilon: f64,
    pub q: f64,
    pub log_eps: f64,
    /// Aspect ratio t/s.
    pub omega: f64,
    pub d_over_s: f64,
    pub s_over_t: f64,
    pub d_over_t: f64,
}

impl ParameterSet {
    pub fn derive(epsilon: f64, q: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Parameter(format!(
                "epsilon = {epsilon} not in (0,1)"
            )));
        }
        if !(q > 1.0) || !q.is_finite() {
            return Err(Error::Parameter(format!("Q = {q} must exceed 1")));
        }
        let log_eps = -epsilon.ln();
        let qm1 = q - 1.0;
        Ok(ParameterSet {
            epsilon,
            q,
            log_eps,
            omega: 2.0 * PI * qm1 * epsilon / log_eps,
            d_over_s: epsilon * qm1.sqrt(),
            s_over_t: log_eps / (2.0 * PI * qm1 * epsilon),
            d_over_t: log_eps / (2.0 * PI * qm1.sqrt()),
        })
    }

    /// Whether ε is small enough for the asymptotic theorem checks.
    pub fn below_guard(&self, eps0: f64) -> bool {
        self.epsilon <= eps0
    }
}

/// Diameter below which the uniform states are the only minimizers:
/// (π/2e)(1 − 2/|ln ε|).
pub fn onset_threshold(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!(
            "epsilon = {epsilon} not in (0,1)"
        )));
    }
    let factor = 1.0 - 2.0 / (-epsilon.ln());
    // e⁻² itself may round to either side of zero
    if factor <= 1e-12 {
        return Err(Error::ThresholdNonpositive(epsilon));
    }
    Ok(onset_asymptote() * factor)
}

pub fn onset_asymptote() -> f64 {
    PI / (2.0 * E)
}
