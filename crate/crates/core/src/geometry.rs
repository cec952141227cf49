//! Planar sample domains on a uniform cell grid.
//!
//! A [`DomainMask`] pairs a continuous convex [`Shape`] with a grid of square
//! cells; a cell is inside when its center lies strictly inside the shape.
//! Perimeter and diameter are always those of the continuous shape. Masks
//! derived by [`DomainMask::erode`] or [`DomainMask::boundary_collar`] keep
//! the host shape, so for them these two accessors still describe the host.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Continuous convex shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Disk {
        center: Point,
        radius: f64,
    },
    Rectangle {
        lo: Point,
        hi: Point,
    },
    /// Vertices in counter-clockwise order (normalized on construction).
    ConvexPolygon {
        vertices: Vec<Point>,
    },
}

impl Shape {
    pub fn disk(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::DegenerateDomain(format!("disk radius {radius}")));
        }
        Ok(Shape::Disk { center, radius })
    }

    pub fn rectangle(lo: Point, hi: Point) -> Result<Self> {
        if !(hi.x > lo.x && hi.y > lo.y) {
            return Err(Error::DegenerateDomain(
                "rectangle with empty extent".into(),
            ));
        }
        Ok(Shape::Rectangle { lo, hi })
    }

    pub fn unit_square() -> Self {
        Shape::Rectangle {
            lo: Point::new(0.0, 0.0),
            hi: Point::new(1.0, 1.0),
        }
    }

    /// Validates convexity and reorders to counter-clockwise.
    pub fn convex_polygon(mut vertices: Vec<Point>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::DegenerateDomain(format!(
                "polygon with {n} vertices"
            )));
        }
        let area2: f64 = (0..n)
            .map(|i| vertices[i].cross(vertices[(i + 1) % n]))
            .sum();
        if area2.abs() <= 1e-14 {
            return Err(Error::DegenerateDomain("polygon with zero area".into()));
        }
        if area2 < 0.0 {
            vertices.reverse();
        }
        if !is_convex_ccw(&vertices) {
            return Err(Error::NotConvex);
        }
        Ok(Shape::ConvexPolygon { vertices })
    }

    /// Distance to the boundary, positive inside and nonpositive outside.
    /// Exact inside the shape; outside only the sign is meaningful for
    /// rectangles and polygons.
    pub fn signed_distance(&self, p: Point) -> f64 {
        match self {
            Shape::Disk { center, radius } => radius - p.dist(*center),
            Shape::Rectangle { lo, hi } => {
                (p.x - lo.x).min(hi.x - p.x).min(p.y - lo.y).min(hi.y - p.y)
            }
            Shape::ConvexPolygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| {
                        let a = vertices[i];
                        let b = vertices[(i + 1) % n];
                        let e = b - a;
                        e.cross(p - a) / e.norm()
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.signed_distance(p) > 0.0
    }

    pub fn perimeter(&self) -> f64 {
        match self {
            Shape::Disk { radius, .. } => 2.0 * std::f64::consts::PI * radius,
            Shape::Rectangle { lo, hi } => 2.0 * ((hi.x - lo.x) + (hi.y - lo.y)),
            Shape::ConvexPolygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| vertices[i].dist(vertices[(i + 1) % n]))
                    .sum()
            }
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Shape::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
            Shape::Rectangle { lo, hi } => (hi.x - lo.x) * (hi.y - lo.y),
            Shape::ConvexPolygon { vertices } => {
                let n = vertices.len();
                0.5 * (0..n)
                    .map(|i| vertices[i].cross(vertices[(i + 1) % n]))
                    .sum::<f64>()
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Shape::Disk { radius, .. } => 2.0 * radius,
            Shape::Rectangle { lo, hi } => hi.dist(*lo),
            Shape::ConvexPolygon { vertices } => calipers_diameter(vertices),
        }
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        match self {
            Shape::Disk { center, radius } => (
                Point::new(center.x - radius, center.y - radius),
                Point::new(center.x + radius, center.y + radius),
            ),
            Shape::Rectangle { lo, hi } => (*lo, *hi),
            Shape::ConvexPolygon { vertices } => {
                let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
                let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for v in vertices {
                    lo.x = lo.x.min(v.x);
                    lo.y = lo.y.min(v.y);
                    hi.x = hi.x.max(v.x);
                    hi.y = hi.y.max(v.y);
                }
                (lo, hi)
            }
        }
    }
}

fn is_convex_ccw(v: &[Point]) -> bool {
    let n = v.len();
    let mut turning = 0.0;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        let c = v[(i + 2) % n];
        let (e1, e2) = (b - a, c - b);
        if e1.cross(e2) <= 0.0 {
            return false;
        }
        turning += e1.cross(e2).atan2(e1.dot(e2));
    }
    // a star polygon also has only left turns but winds more than once
    (turning - 2.0 * std::f64::consts::PI).abs() < 1e-9
}

/// Diameter of a convex CCW polygon by rotating calipers.
pub fn calipers_diameter(v: &[Point]) -> f64 {
    let n = v.len();
    if n == 1 {
        return 0.0;
    }
    if n == 2 {
        return v[0].dist(v[1]);
    }
    let tri = |a: Point, b: Point, c: Point| (b - a).cross(c - a).abs();
    let mut best: f64 = 0.0;
    let mut j = 1;
    for i in 0..n {
        let ni = (i + 1) % n;
        while tri(v[i], v[ni], v[(j + 1) % n]) > tri(v[i], v[ni], v[j]) {
            j = (j + 1) % n;
        }
        best = best.max(v[i].dist(v[j])).max(v[ni].dist(v[j]));
    }
    best
}

/// Counter-clockwise convex hull (monotone chain), collinear points dropped.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut p: Vec<Point> = points.to_vec();
    p.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(p.iter())
        } else {
            Box::new(p.iter().rev())
        };
        for &q in iter {
            while hull.len() >= start + 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                if (b - a).cross(q - b) <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

/// Uniform grid of square cells with cell-center membership.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainMask {
    shape: Shape,
    h: f64,
    origin: Point,
    nx: usize,
    ny: usize,
    inside: Vec<bool>,
}

impl DomainMask {
    /// Grid covering the shape's bounding box with spacing close to `h`
    /// (rounded so the box is tiled exactly).
    pub fn new(shape: Shape, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::DegenerateDomain(format!("grid spacing {h}")));
        }
        let (lo, hi) = shape.bounding_box();
        let w = (hi.x - lo.x).max(hi.y - lo.y);
        let n = (w / h).round().max(1.0) as usize;
        let h = w / n as f64;
        let nx = ((hi.x - lo.x) / h).round().max(1.0) as usize;
        let ny = ((hi.y - lo.y) / h).round().max(1.0) as usize;
        Self::with_grid(shape, h, lo, nx, ny)
    }

    /// Grid with `n` cells across the longer bounding-box side.
    pub fn with_cells(shape: Shape, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::DegenerateDomain("zero cells".into()));
        }
        let (lo, hi) = shape.bounding_box();
        let w = (hi.x - lo.x).max(hi.y - lo.y);
        Self::new(shape, w / n as f64)
    }

    pub fn with_grid(shape: Shape, h: f64, origin: Point, nx: usize, ny: usize) -> Result<Self> {
        if !(h > 0.0) || nx == 0 || ny == 0 {
            return Err(Error::DegenerateDomain("empty grid".into()));
        }
        let mut inside = vec![false; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let p = Point::new(
                    origin.x + (i as f64 + 0.5) * h,
                    origin.y + (j as f64 + 0.5) * h,
                );
                inside[j * nx + i] = shape.contains(p);
            }
        }
        Ok(DomainMask {
            shape,
            h,
            origin,
            nx,
            ny,
            inside,
        })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        !self.inside.iter().any(|&b| b)
    }

    pub fn inside(&self) -> &[bool] {
        &self.inside
    }

    pub fn is_inside(&self, i: usize, j: usize) -> bool {
        i < self.nx && j < self.ny && self.inside[j * self.nx + i]
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    /// Flat indices of inside cells in row-major order.
    pub fn cells(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.inside[k]).collect()
    }

    pub fn center(&self, k: usize) -> Point {
        let (i, j) = (k % self.nx, k / self.nx);
        Point::new(
            self.origin.x + (i as f64 + 0.5) * self.h,
            self.origin.y + (j as f64 + 0.5) * self.h,
        )
    }

    pub fn area(&self) -> Result<f64> {
        let c = self.count();
        if c == 0 {
            return Err(Error::DegenerateDomain("mask has no inside cells".into()));
        }
        Ok(c as f64 * self.h * self.h)
    }

    pub fn perimeter(&self) -> f64 {
        self.shape.perimeter()
    }

    pub fn diameter(&self) -> f64 {
        self.shape.diameter()
    }

    pub fn distance_to_boundary(&self, k: usize) -> f64 {
        self.shape.signed_distance(self.center(k))
    }

    fn filtered(&self, keep: impl Fn(f64) -> bool) -> DomainMask {
        let inside = (0..self.len())
            .map(|k| self.inside[k] && keep(self.distance_to_boundary(k)))
            .collect();
        DomainMask {
            inside,
            ..self.clone()
        }
    }

    /// Inside cells at distance ≥ `r` from the boundary.
    pub fn erode(&self, r: f64) -> Result<DomainMask> {
        if !(r >= 0.0) {
            return Err(Error::Geometry(format!("erosion radius {r} < 0")));
        }
        Ok(self.filtered(|d| d >= r))
    }

    /// Inside cells at distance < `delta` from the boundary.
    pub fn boundary_collar(&self, delta: f64) -> Result<DomainMask> {
        if !(delta >= 0.0) {
            return Err(Error::Geometry(format!("collar width {delta} < 0")));
        }
        Ok(self.filtered(|d| d < delta))
    }

    pub fn is_subset_of(&self, other: &DomainMask) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self
                .inside
                .iter()
                .zip(&other.inside)
                .all(|(&a, &b)| !a || b)
    }
}
