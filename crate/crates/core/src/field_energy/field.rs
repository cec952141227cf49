//! Unit-length magnetization fields on a [`DomainMask`] and their snapshots.
//!
//! Snapshot layout (little endian):
//!
//! ```text
//! magic    8 bytes  "THINFILM"
//! version  u32
//! nx, ny   u32, u32
//! h        f64
//! origin   f64, f64
//! shape    u32 length + UTF-8 JSON descriptor
//! epsilon  f64
//! q        f64
//! data     nx·ny triples (m1, m2, m3) as f64, row-major, zero outside Ω
//! ```
//!
//! A JSON sidecar (`<path>.json`) repeats the header in readable form.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DomainMask, Point, Shape};
use crate::params::ParameterSet;

pub const UNIT_TOL: f64 = 1e-10;
const MAGIC: &[u8; 8] = b"THINFILM";
const VERSION: u32 = 1;

pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct Magnetization2D {
    mask: Arc<DomainMask>,
    m: Vec<Vec3>,
}

impl Magnetization2D {
    pub fn uniform(mask: Arc<DomainMask>, dir: Vec3) -> Result<Self> {
        Self::from_fn(mask, |_| dir)
    }

    pub fn uniform_up(mask: Arc<DomainMask>) -> Self {
        Self::uniform(mask, [0.0, 0.0, 1.0]).expect("unit vector")
    }

    pub fn uniform_down(mask: Arc<DomainMask>) -> Self {
        Self::uniform(mask, [0.0, 0.0, -1.0]).expect("unit vector")
    }

    /// Field from a function of the cell center; validated to be unit length.
    pub fn from_fn(mask: Arc<DomainMask>, f: impl Fn(Point) -> Vec3) -> Result<Self> {
        let m = (0..mask.len())
            .map(|k| {
                if mask.inside()[k] {
                    f(mask.center(k))
                } else {
                    [0.0; 3]
                }
            })
            .collect();
        Self::from_values(mask, m)
    }

    pub fn from_values(mask: Arc<DomainMask>, m: Vec<Vec3>) -> Result<Self> {
        let field = Magnetization2D { mask, m };
        field.validate()?;
        Ok(field)
    }

    /// Independent uniformly distributed unit vectors per cell.
    pub fn random_unit(mask: Arc<DomainMask>, rng: &mut impl Rng) -> Self {
        let m = (0..mask.len())
            .map(|k| {
                if !mask.inside()[k] {
                    return [0.0; 3];
                }
                let z: f64 = rng.gen_range(-1.0..1.0);
                let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let r = (1.0 - z * z).sqrt();
                [r * phi.cos(), r * phi.sin(), z]
            })
            .collect();
        Magnetization2D { mask, m }
    }

    /// Unit field with m₃ = f and the in-plane part along `dir(x)`.
    pub fn from_m3(
        mask: Arc<DomainMask>,
        m3: impl Fn(Point) -> f64,
        dir: impl Fn(Point) -> (f64, f64),
    ) -> Result<Self> {
        Self::from_fn(mask, |p| {
            let z = m3(p).clamp(-1.0, 1.0);
            let r = (1.0 - z * z).max(0.0).sqrt();
            let (dx, dy) = dir(p);
            let n = dx.hypot(dy);
            if n == 0.0 {
                [r, 0.0, z]
            } else {
                [r * dx / n, r * dy / n, z]
            }
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.m.len() != self.mask.len() {
            return Err(Error::InvalidField(format!(
                "{} values for {} cells",
                self.m.len(),
                self.mask.len()
            )));
        }
        for (k, v) in self.m.iter().enumerate() {
            if self.mask.inside()[k] {
                let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                if !((n2 - 1.0).abs() <= UNIT_TOL) {
                    return Err(Error::InvalidField(format!("|m|² = {n2} at cell {k}")));
                }
            } else if v.iter().any(|&c| c != 0.0) {
                return Err(Error::InvalidField(format!(
                    "nonzero value outside at cell {k}"
                )));
            }
        }
        Ok(())
    }

    pub fn mask(&self) -> &DomainMask {
        &self.mask
    }

    pub fn mask_arc(&self) -> &Arc<DomainMask> {
        &self.mask
    }

    pub fn values(&self) -> &[Vec3] {
        &self.m
    }

    pub fn m3(&self) -> Vec<f64> {
        self.m.iter().map(|v| v[2]).collect()
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        self.m.iter().map(|v| v[c]).collect()
    }

    pub fn into_values(self) -> Vec<Vec3> {
        self.m
    }

    pub fn write_snapshot(&self, path: &Path, p: &ParameterSet) -> Result<()> {
        let mask = &self.mask;
        let shape = serde_json::to_string(mask.shape())?;
        let mut buf = Vec::with_capacity(64 + shape.len() + 24 * self.m.len());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&(mask.nx() as u32).to_le_bytes());
        buf.extend_from_slice(&(mask.ny() as u32).to_le_bytes());
        buf.extend_from_slice(&mask.h().to_le_bytes());
        buf.extend_from_slice(&mask.origin().x.to_le_bytes());
        buf.extend_from_slice(&mask.origin().y.to_le_bytes());
        buf.extend_from_slice(&(shape.len() as u32).to_le_bytes());
        buf.extend_from_slice(shape.as_bytes());
        buf.extend_from_slice(&p.epsilon.to_le_bytes());
        buf.extend_from_slice(&p.q.to_le_bytes());
        for v in &self.m {
            for c in v {
                buf.extend_from_slice(&c.to_le_bytes());
            }
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&buf).map_err(|e| Error::io(path, e))?;

        let meta = SnapshotMeta {
            format: "thinfilm-snapshot".into(),
            version: VERSION,
            nx: mask.nx(),
            ny: mask.ny(),
            h: mask.h(),
            origin: mask.origin(),
            shape: mask.shape().clone(),
            epsilon: p.epsilon,
            q: p.q,
            inside_cells: mask.count(),
        };
        let side = sidecar_path(path);
        std::fs::write(&side, serde_json::to_string_pretty(&meta)?)
            .map_err(|e| Error::io(&side, e))?;
        Ok(())
    }

    pub fn read_snapshot(path: &Path) -> Result<(Self, ParameterSet)> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        let mut r = ByteReader { b: &bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Snapshot("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Snapshot(format!("unsupported version {version}")));
        }
        let nx = r.u32()? as usize;
        let ny = r.u32()? as usize;
        let h = r.f64()?;
        let origin = Point::new(r.f64()?, r.f64()?);
        let slen = r.u32()? as usize;
        let shape: Shape = serde_json::from_slice(r.take(slen)?)?;
        let epsilon = r.f64()?;
        let q = r.f64()?;
        let mut m = Vec::with_capacity(nx * ny);
        for _ in 0..nx * ny {
            m.push([r.f64()?, r.f64()?, r.f64()?]);
        }
        if r.pos != bytes.len() {
            return Err(Error::Snapshot("trailing bytes".into()));
        }
        let mask = DomainMask::with_grid(shape, h, origin, nx, ny)?;
        let field = Magnetization2D::from_values(Arc::new(mask), m)?;
        Ok((field, ParameterSet::derive(epsilon, q)?))
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub format: String,
    pub version: u32,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub origin: Point,
    pub shape: Shape,
    pub epsilon: f64,
    pub q: f64,
    pub inside_cells: usize,
}

struct ByteReader<'a> {
    b: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.b.len() {
            return Err(Error::Snapshot("truncated file".into()));
        }
        let s = &self.b[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
}
