//! Theorem-checker harness: every check is stored as an inequality
//! `lhs ≤ rhs` together with a human-readable reference, and each experiment
//! produces a deterministic numeric table.

pub mod bounds;
pub mod config;
pub mod construction;
pub mod interpolation;
pub mod kernel_checks;
pub mod onset;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field_energy::Magnetization2D;
use crate::geometry::{DomainMask, Shape};
use crate::params::ParameterSet;

pub use bounds::{
    bv_suite, check_bv_bounds, compactness_diagnostic, fit_sandwich, scaling_sweep, BvOptions,
    Sandwich,
};
pub use config::{DomainConfig, ExperimentConfig, ShapeConfig, StartsConfig};
pub use construction::{bubble_construction_check, ConstructionOptions};
pub use interpolation::{
    check_interpolation, interpolation_suite, random_smooth_field, sharpness_probe,
};
pub use kernel_checks::{kernel_check, multiplier_check};
pub use onset::{multi_start, onset_scan, Classification, MultiStart, RunSummary};

/// Note for grids too coarse to resolve the transition layer (h > ε/2),
/// where single-cell walls undercut the continuum wall energy.
pub fn resolution_note(h: f64, epsilon: f64) -> Option<String> {
    (h > 0.5 * epsilon).then(|| {
        format!("epsilon = {epsilon}: h = {h:.3e} exceeds epsilon/2, transition layers are under-resolved")
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    ReportOnly,
}

/// One inequality `lhs ≤ rhs` (up to `tol`), margin = rhs − lhs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub claim: String,
    pub reference: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tol: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    pub fn check(
        claim: impl Into<String>,
        reference: impl Into<String>,
        lhs: f64,
        rhs: f64,
        tol: f64,
    ) -> Self {
        let margin = rhs - lhs;
        CheckRecord {
            claim: claim.into(),
            reference: reference.into(),
            lhs,
            rhs,
            margin,
            tol,
            verdict: if margin >= -tol {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            snapshot: None,
            note: None,
        }
    }

    pub fn report(
        claim: impl Into<String>,
        reference: impl Into<String>,
        lhs: f64,
        rhs: f64,
    ) -> Self {
        CheckRecord {
            verdict: Verdict::ReportOnly,
            ..Self::check(claim, reference, lhs, rhs, 0.0)
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainDescriptor {
    pub shape: Shape,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub cells: usize,
    pub area: f64,
    pub diameter: f64,
}

impl DomainDescriptor {
    pub fn of(mask: &DomainMask) -> Self {
        DomainDescriptor {
            shape: mask.shape().clone(),
            h: mask.h(),
            nx: mask.nx(),
            ny: mask.ny(),
            cells: mask.count(),
            area: mask.area().unwrap_or(0.0),
            diameter: mask.diameter(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub h: Option<f64>,
    pub code_version: String,
    pub threads: usize,
}

impl Provenance {
    pub fn new(seed: u64, h: Option<f64>) -> Self {
        Provenance {
            seed,
            h,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            threads: rayon::current_num_threads(),
        }
    }
}

/// Flat numeric table written as CSV with fixed formatting.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| format!("{v:.12e}")))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Csv(e.into_error().into()))?;
        String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub params: Option<ParameterSet>,
    pub domain: Option<DomainDescriptor>,
    pub checks: Vec<CheckRecord>,
    pub table: Table,
    pub provenance: Provenance,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl ExperimentResult {
    pub fn new(experiment: &str, provenance: Provenance, table: Table) -> Self {
        ExperimentResult {
            experiment: experiment.to_string(),
            params: None,
            domain: None,
            checks: Vec::new(),
            table,
            provenance,
            notes: Vec::new(),
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn all_passed(&self) -> bool {
        self.failures().next().is_none()
    }

    /// Writes `results.json` and `table.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let json = serde_json::to_string_pretty(self)?;
        let p = dir.join("results.json");
        fs::write(&p, json).map_err(|e| Error::io(&p, e))?;
        let p = dir.join("table.csv");
        fs::write(&p, self.table.to_csv()?).map_err(|e| Error::io(&p, e))
    }
}

/// Where failing records drop their field snapshots.
#[derive(Debug, Clone, Default)]
pub struct SnapshotSink {
    pub dir: Option<PathBuf>,
}

impl SnapshotSink {
    pub fn new(dir: Option<PathBuf>) -> Self {
        SnapshotSink { dir }
    }

    /// Attaches a snapshot of `m` to every failing record in `records`.
    pub fn attach(
        &self,
        name: &str,
        m: &Magnetization2D,
        p: &ParameterSet,
        records: &mut [CheckRecord],
    ) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        if records.iter().all(CheckRecord::passed) {
            return Ok(());
        }
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(format!("{name}.field"));
        m.write_snapshot(&path, p)?;
        for r in records.iter_mut().filter(|r| !r.passed()) {
            r.snapshot = Some(path.clone());
        }
        Ok(())
    }
}
