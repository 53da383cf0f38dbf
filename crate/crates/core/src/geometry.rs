use serde::{Deserialize, Serialize};

/// A point in the deployment plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        let (dx, dy) = (self.x - other.x, self.y - other.y);
        (dx * dx + dy * dy).sqrt()
    }
}

impl From<[f64; 2]> for Point {
    fn from(a: [f64; 2]) -> Self {
        Self { x: a[0], y: a[1] }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Axis-aligned box used for search bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds<const D: usize> {
    pub lo: [f64; D],
    pub hi: [f64; D],
}

impl<const D: usize> Bounds<D> {
    pub fn new(lo: [f64; D], hi: [f64; D]) -> Self {
        Self { lo, hi }
    }

    pub fn clamp(&self, mut x: [f64; D]) -> [f64; D] {
        for (d, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lo[d], self.hi[d]);
        }
        x
    }

    pub fn contains(&self, x: &[f64; D]) -> bool {
        x.iter()
            .enumerate()
            .all(|(d, v)| (self.lo[d]..=self.hi[d]).contains(v))
    }
}

impl Bounds<2> {
    /// The rectangle `[0, width] x [0, height]`.
    pub fn rect(width: f64, height: f64) -> Self {
        Self::new([0.0, 0.0], [width, height])
    }
}
