//! Exact 2D primitives: vectors, discs, tangent construction, and
//! segment/arc paths with length, clearance, and self-intersection queries.

mod path;
mod tangent;

pub use path::{path_disc_clearance, path_length, self_intersects, ArcDirection, GeometricPath, PathElement};
pub use tangent::{circle_intersections, point_tangents, tangent_lines, TangentSegment};

use crate::scalar::Scalar;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Absolute tolerance for all geometric comparisons, in meters.
pub const GEOM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("discs are coincident; tangents are undefined")]
    CoincidentDiscs,
    #[error("point lies inside or on the disc; no tangents from a forbidden region")]
    PointInsideDisc,
    #[error("segment endpoints coincide")]
    DegenerateSegment,
    #[error("arc sweep is empty or exceeds a full turn")]
    DegenerateArc,
    #[error("path elements {0} and {1} do not share an endpoint")]
    DisconnectedPath(usize, usize),
}

/// 2D position or displacement.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Vec2<S> {
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero())
    }

    /// Unit vector at the given angle from the +x axis.
    pub fn unit(angle: S) -> Self {
        Self::new(angle.cos(), angle.sin())
    }

    pub fn dot(self, other: Self) -> S {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product; positive when `other` is
    /// counterclockwise from `self`.
    pub fn cross(self, other: Self) -> S {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> S {
        self.dot(self)
    }

    pub fn norm(self) -> S {
        self.norm_sq().sqrt()
    }

    pub fn dist(self, other: Self) -> S {
        (self - other).norm()
    }

    /// Angle from the +x axis in (-pi, pi].
    pub fn angle(self) -> S {
        self.y.atan2(self.x)
    }

    /// Counterclockwise perpendicular.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn scale(self, factor: S) -> Self {
        Self::new(self.x * factor, self.y * factor)
    }

    /// Returns `None` for vectors shorter than the geometric tolerance.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > S::lit(GEOM_TOL)).then(|| self.scale(S::one() / n))
    }

    pub fn rotated(self, angle: S) -> Self {
        let (sin, cos) = angle.sin_cos();
        Self::new(self.x * cos - self.y * sin, self.x * sin + self.y * cos)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl<S: Scalar> std::ops::Add for Vec2<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<S: Scalar> std::ops::Sub for Vec2<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<S: Scalar> std::ops::Neg for Vec2<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

// Serialized as a two-element array so scenario files read `start = [1.5, 1.5]`.
impl<S: Serialize> Serialize for Vec2<S> {
    fn serialize<T: Serializer>(&self, serializer: T) -> Result<T::Ok, T::Error> {
        (&self.x, &self.y).serialize(serializer)
    }
}

impl<'de, S: Deserialize<'de>> Deserialize<'de> for Vec2<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (x, y) = <(S, S)>::deserialize(deserializer)?;
        Ok(Self { x, y })
    }
}

/// Circle with a strictly positive radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc<S> {
    pub center: Vec2<S>,
    pub radius: S,
}

impl<S: Scalar> Disc<S> {
    pub fn new(center: Vec2<S>, radius: S) -> Self {
        debug_assert!(radius > S::zero(), "disc radius must be positive");
        Self { center, radius }
    }

    /// Point on the circle at the given angle.
    pub fn point_at(self, angle: S) -> Vec2<S> {
        self.center + Vec2::unit(angle).scale(self.radius)
    }

    /// Signed distance from the circle boundary; negative inside.
    pub fn signed_distance(self, p: Vec2<S>) -> S {
        p.dist(self.center) - self.radius
    }

    pub fn contains(self, p: Vec2<S>) -> bool {
        self.signed_distance(p) <= S::zero()
    }

    pub fn grown(self, margin: S) -> Self {
        Self::new(self.center, self.radius + margin)
    }
}

/// Normalizes an angle to (-pi, pi].
pub fn normalize_angle<S: Scalar>(a: S) -> S {
    let pi = S::lit(std::f64::consts::PI);
    let two_pi = pi + pi;
    let mut r = a % two_pi;
    if r > pi {
        r = r - two_pi;
    } else if r <= -pi {
        r = r + two_pi;
    }
    r
}

/// Normalizes an angle to [0, 2*pi).
pub fn positive_angle<S: Scalar>(a: S) -> S {
    let two_pi = S::lit(std::f64::consts::TAU);
    let mut r = a % two_pi;
    if r < S::zero() {
        r = r + two_pi;
    }
    // `%` can return exactly two_pi after the correction when a is a tiny
    // negative number; fold it back to zero.
    if r >= two_pi {
        r = r - two_pi;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn vector_algebra_basics() {
        let a = Vec2::new(3.0, 4.0);
        assert_eq!(a.norm(), 5.0);
        assert_eq!(a.perp(), Vec2::new(-4.0, 3.0));
        assert_relative_eq!(a.rotated(FRAC_PI_2).x, -4.0, max_relative = 1e-12);
        assert_relative_eq!(a.rotated(FRAC_PI_2).y, 3.0, max_relative = 1e-12);
        assert_eq!(Vec2::new(1.0, 0.0).cross(Vec2::new(0.0, 1.0)), 1.0);
    }

    #[test]
    fn angle_normalization_ranges() {
        assert_relative_eq!(normalize_angle(3.0 * PI), PI, max_relative = 1e-12);
        assert_relative_eq!(normalize_angle(-3.0 * PI), PI, max_relative = 1e-12);
        assert!(normalize_angle(-PI) > 0.0);
        for k in -8..8 {
            let a = 0.7 + (k as f64) * std::f64::consts::TAU;
            assert_relative_eq!(normalize_angle(a), 0.7, max_relative = 1e-9);
            assert_relative_eq!(positive_angle(a), 0.7, max_relative = 1e-9);
        }
        assert!(positive_angle(-1e-18) < std::f64::consts::TAU);
    }

    #[test]
    fn disc_queries() {
        let d = Disc::new(Vec2::new(1.0, 0.0), 2.0);
        assert_relative_eq!(d.signed_distance(Vec2::new(4.0, 0.0)), 1.0);
        assert!(d.contains(Vec2::new(0.0, 0.0)));
        assert_eq!(d.point_at(0.0), Vec2::new(3.0, 0.0));
    }

    #[test]
    fn vec2_serde_round_trip_is_an_array() {
        let v = Vec2::new(1.5, -2.25);
        let s = toml::to_string(&std::collections::BTreeMap::from([("p", v)])).unwrap();
        assert!(s.contains("[1.5, -2.25]"), "serialized as array: {s}");
        let back: std::collections::BTreeMap<String, Vec2<f64>> = toml::from_str(&s).unwrap();
        assert_eq!(back["p"], v);
    }
}
