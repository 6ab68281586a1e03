//! Planar geometry primitives shared across the navigation stack.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

/// A 2D point or vector in the world frame, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

/// Alias used where a value is a direction/offset rather than a location.
pub type Vec2 = Point2;

impl Point2 {
    pub const ZERO: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at the given angle from +x.
    pub fn from_angle(angle_rad: f64) -> Self {
        Self::new(angle_rad.cos(), angle_rad.sin())
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// 2D cross product (z component of the 3D cross).
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Counter-clockwise rotation by `angle_rad`.
    pub fn rotated(self, angle_rad: f64) -> Self {
        let (s, c) = angle_rad.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Left-hand perpendicular (+90 degrees).
    pub fn perp_left(self) -> Self {
        Self::new(-self.y, self.x)
    }

    /// Right-hand perpendicular (-90 degrees).
    pub fn perp_right(self) -> Self {
        Self::new(self.y, -self.x)
    }

    /// Angle of this vector from +x, in (-pi, pi].
    pub fn angle(self) -> f64 {
        wrap_angle(self.y.atan2(self.x))
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

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Wrap an angle to (-pi, pi].
pub fn wrap_angle(angle_rad: f64) -> f64 {
    let mut a = angle_rad % TAU;
    if a <= -PI {
        a += TAU;
    } else if a > PI {
        a -= TAU;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(-0.5), -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_angle(TAU + 0.25), 0.25, epsilon = 1e-12);
        for k in -20..20 {
            let a = 0.37 + k as f64 * 1.1;
            let w = wrap_angle(a);
            assert!(w > -PI && w <= PI, "wrap({a}) = {w} out of range");
        }
    }

    #[test]
    fn rotation_and_perp() {
        let v = Point2::new(1.0, 0.0);
        let r = v.rotated(PI / 2.0);
        assert_abs_diff_eq!(r.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.y, 1.0, epsilon = 1e-15);
        assert_eq!(v.perp_left(), Point2::new(0.0, 1.0));
        assert_eq!(v.perp_right(), Point2::new(0.0, -1.0));
        assert_abs_diff_eq!(Point2::new(3.0, 4.0).norm(), 5.0, epsilon = 1e-15);
    }

    #[test]
    fn cross_sign() {
        let ahead = Point2::new(1.0, 0.0);
        assert!(ahead.cross(Point2::new(1.0, 1.0)) > 0.0); // left
        assert!(ahead.cross(Point2::new(1.0, -1.0)) < 0.0); // right
        assert_eq!(ahead.cross(Point2::new(2.0, 0.0)), 0.0);
    }
}
