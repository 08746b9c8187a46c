//! Planar points and the flattening conventions that turn a trajectory
//! segment into a column vector.

use nalgebra::DVector;
use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeTuple;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::ops::{Add, Mul, Sub};

/// A 2D position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ZERO: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Counter-clockwise rotation by `angle` radians about the origin.
    pub fn rotate(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

// Serialized as a bare `[x, y]` pair to keep trajectory files compact.
impl Serialize for Point2 {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut tup = serializer.serialize_tuple(2)?;
        tup.serialize_element(&self.x)?;
        tup.serialize_element(&self.y)?;
        tup.end()
    }
}

impl<'de> Deserialize<'de> for Point2 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct PointVisitor;
        impl<'de> Visitor<'de> for PointVisitor {
            type Value = Point2;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a [x, y] pair")
            }
            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Point2, A::Error> {
                let x = seq
                    .next_element()?
                    .ok_or_else(|| serde::de::Error::invalid_length(0, &self))?;
                let y = seq
                    .next_element()?
                    .ok_or_else(|| serde::de::Error::invalid_length(1, &self))?;
                Ok(Point2::new(x, y))
            }
        }
        deserializer.deserialize_tuple(2, PointVisitor)
    }
}

/// How a T-point segment maps onto a length-2T column vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// `(x1, y1, x2, y2, ..., xT, yT)` — each basis vector reads as a 2D path.
    Interleaved,
    /// `(x1, ..., xT, y1, ..., yT)`.
    Planar,
}

impl Default for Layout {
    fn default() -> Self {
        Layout::Interleaved
    }
}

impl std::fmt::Display for Layout {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        match self {
            Layout::Interleaved => f.write_str("interleaved"),
            Layout::Planar => f.write_str("planar"),
        }
    }
}

/// Flatten a segment of T points into a length-2T vector.
pub fn flatten(points: &[Point2], layout: Layout) -> DVector<f64> {
    let t = points.len();
    let mut v = DVector::zeros(2 * t);
    match layout {
        Layout::Interleaved => {
            for (i, p) in points.iter().enumerate() {
                v[2 * i] = p.x;
                v[2 * i + 1] = p.y;
            }
        }
        Layout::Planar => {
            for (i, p) in points.iter().enumerate() {
                v[i] = p.x;
                v[t + i] = p.y;
            }
        }
    }
    v
}

/// Inverse of [`flatten`]. The vector length must be even.
pub fn unflatten(v: &[f64], layout: Layout) -> Vec<Point2> {
    assert!(v.len() % 2 == 0, "flattened segment length must be even");
    let t = v.len() / 2;
    match layout {
        Layout::Interleaved => (0..t).map(|i| Point2::new(v[2 * i], v[2 * i + 1])).collect(),
        Layout::Planar => (0..t).map(|i| Point2::new(v[i], v[t + i])).collect(),
    }
}
