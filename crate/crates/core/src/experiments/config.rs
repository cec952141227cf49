//! TOML experiment configuration.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DomainMask, Point, Shape};
use crate::minimize::{InitKind, MinimizeConfig};
use crate::params::{ParameterSet, DEFAULT_EPS0};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum ShapeConfig {
    Disk { center: [f64; 2], radius: f64 },
    Rectangle { lo: [f64; 2], hi: [f64; 2] },
    Polygon { vertices: Vec<[f64; 2]> },
}

impl Default for ShapeConfig {
    fn default() -> Self {
        ShapeConfig::Disk {
            center: [0.0, 0.0],
            radius: 0.5,
        }
    }
}

fn pt(p: [f64; 2]) -> Point {
    Point::new(p[0], p[1])
}

impl ShapeConfig {
    pub fn to_shape(&self) -> Result<Shape> {
        match self {
            ShapeConfig::Disk { center, radius } => Shape::disk(pt(*center), *radius),
            ShapeConfig::Rectangle { lo, hi } => Shape::rectangle(pt(*lo), pt(*hi)),
            ShapeConfig::Polygon { vertices } => {
                Shape::convex_polygon(vertices.iter().map(|&v| pt(v)).collect())
            }
        }
    }

    /// The same shape scaled about its first reference point to diameter `d`.
    pub fn with_diameter(&self, d: f64) -> Result<Shape> {
        let s = d / self.to_shape()?.diameter();
        match self {
            ShapeConfig::Disk { center, radius } => Shape::disk(pt(*center), radius * s),
            ShapeConfig::Rectangle { lo, hi } => {
                let (a, b) = (pt(*lo), pt(*hi));
                Shape::rectangle(a, a + (b - a) * s)
            }
            ShapeConfig::Polygon { vertices } => {
                let o = pt(vertices[0]);
                Shape::convex_polygon(vertices.iter().map(|&v| o + (pt(v) - o) * s).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    pub shape: ShapeConfig,
    /// Cells across the longer bounding-box side; ignored when `h` is set.
    pub cells: usize,
    pub h: Option<f64>,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            shape: ShapeConfig::default(),
            cells: 64,
            h: None,
        }
    }
}

impl DomainConfig {
    pub fn mask(&self) -> Result<Arc<DomainMask>> {
        mask_for(self.shape.to_shape()?, self.cells, self.h)
    }
}

pub fn mask_for(shape: Shape, cells: usize, h: Option<f64>) -> Result<Arc<DomainMask>> {
    Ok(Arc::new(match h {
        Some(h) => DomainMask::new(shape, h)?,
        None => DomainMask::with_cells(shape, cells)?,
    }))
}

/// Starting fields of a multi-start run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StartsConfig {
    /// Include the two uniform states ±e₃.
    pub uniform: bool,
    /// Number of independent random starts (seeds seed, seed+1, …).
    pub random: usize,
    pub bubble_radii: Vec<f64>,
}

impl Default for StartsConfig {
    fn default() -> Self {
        StartsConfig {
            uniform: true,
            random: 2,
            bubble_radii: Vec::new(),
        }
    }
}

impl StartsConfig {
    pub fn inits(&self, seed: u64) -> Vec<(String, InitKind, u64)> {
        let mut v = Vec::new();
        if self.uniform {
            v.push(("uniform_up".to_string(), InitKind::UniformUp, seed));
            v.push(("uniform_down".to_string(), InitKind::UniformDown, seed));
        }
        for k in 0..self.random {
            let s = seed.wrapping_add(k as u64);
            v.push((format!("random_{s}"), InitKind::RandomUnit, s));
        }
        for &r in &self.bubble_radii {
            v.push((format!("bubble_{r}"), InitKind::Bubble { radius: r }, seed));
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OnsetConfig {
    pub epsilons: Vec<f64>,
    /// Diameters as multiples of the onset threshold.
    pub diam_factors: Vec<f64>,
    /// Absolute diameters.
    pub diams: Vec<f64>,
    pub cells: usize,
}

impl Default for OnsetConfig {
    fn default() -> Self {
        OnsetConfig {
            epsilons: vec![1e-2, 1e-3],
            diam_factors: vec![0.5],
            diams: Vec::new(),
            cells: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterpolationConfig {
    pub fields: usize,
    /// (r, R) pairs.
    pub pairs: Vec<[f64; 2]>,
    /// Relative tolerance on the right-hand side.
    pub rel_tol: f64,
    pub sharpness_epsilons: Vec<f64>,
}

impl Default for InterpolationConfig {
    fn default() -> Self {
        InterpolationConfig {
            fields: 200,
            pairs: vec![[0.01, 0.1], [0.01, 1.0], [0.1, 10.0]],
            rel_tol: 1e-3,
            sharpness_epsilons: vec![0.05, 0.02, 0.01],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Decreasing ε values.
    pub epsilons: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            epsilons: vec![1e-2, 1e-3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default)]
    pub seed: u64,
    /// Guard above which asymptotic checks carry a warning.
    #[serde(default = "default_eps0")]
    pub eps0: f64,
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default)]
    pub solver: MinimizeConfig,
    #[serde(default)]
    pub starts: StartsConfig,
    #[serde(default)]
    pub onset: OnsetConfig,
    #[serde(default)]
    pub interpolation: InterpolationConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    /// Energy level −α|Ω| defining low-energy states.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_epsilon() -> f64 {
    1e-2
}
fn default_q() -> f64 {
    2.0
}
fn default_eps0() -> f64 {
    DEFAULT_EPS0
}
fn default_alpha() -> f64 {
    0.1
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        ParameterSet::derive(self.epsilon, self.q)?;
        self.solver.validate()?;
        if !(self.alpha > 0.0) {
            return Err(Error::Config("alpha must be positive".into()));
        }
        if self.sweep.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("sweep epsilons must be decreasing".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ParameterSet> {
        ParameterSet::derive(self.epsilon, self.q)
    }
}
