//! Reduced thin-film micromagnetic energy: stray-field kernels, discrete
//! energies, explicit domain constructions, a sphere-constrained minimizer
//! and checkers for the quantitative bounds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod field_energy;
pub mod geometry;
pub mod kernels;
pub mod minimize;
pub mod pairsum;
pub mod params;
pub mod profiles;
pub mod quadrature;

pub use error::{Error, Result};
pub use field_energy::{EnergyBreakdown, EnergyModel, Magnetization2D};
pub use geometry::{DomainMask, Point, Shape};
pub use params::ParameterSet;
