//! Minimal fixed-size vector and matrix types over [`Scalar`].

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec3<S>(pub [S; 3]);

impl<S: Scalar> Vec3<S> {
    #[inline]
    pub fn new(x: S, y: S, z: S) -> Self {
        Vec3([x, y, z])
    }

    #[inline]
    pub fn zero() -> Self {
        Vec3([S::zero(); 3])
    }

    #[inline]
    pub fn x(&self) -> S {
        self.0[0]
    }
    #[inline]
    pub fn y(&self) -> S {
        self.0[1]
    }
    #[inline]
    pub fn z(&self) -> S {
        self.0[2]
    }

    #[inline]
    pub fn dot(&self, o: &Self) -> S {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    #[inline]
    pub fn cross(&self, o: &Self) -> Self {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = o.0;
        Vec3([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])
    }

    #[inline]
    pub fn norm(&self) -> S {
        self.dot(self).sqrt()
    }

    /// Unit vector in the same direction, or `None` for a zero or non-finite vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n > S::zero() && n.is_finite() {
            Some(*self * (S::one() / n))
        } else {
            None
        }
    }

    #[inline]
    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Vec3([f(self.0[0]), f(self.0[1]), f(self.0[2])])
    }

    pub fn cast<T: Scalar>(&self) -> Vec3<T> {
        Vec3(self.0.map(|v| T::lit(v.as_f64())))
    }
}

impl<S: Scalar> Add for Vec3<S> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl<S: Scalar> AddAssign for Vec3<S> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<S: Scalar> Sub for Vec3<S> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl<S: Scalar> Mul<S> for Vec3<S> {
    type Output = Self;
    #[inline]
    fn mul(self, s: S) -> Self {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl<S: Scalar> Neg for Vec3<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl<S> Index<usize> for Vec3<S> {
    type Output = S;
    #[inline]
    fn index(&self, i: usize) -> &S {
        &self.0[i]
    }
}

/// Row-major 3×3 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat3<S>(pub [[S; 3]; 3]);

impl<S: Scalar> Mat3<S> {
    pub fn identity() -> Self {
        let (o, z) = (S::one(), S::zero());
        Mat3([[o, z, z], [z, o, z], [z, z, o]])
    }

    pub fn from_rows(r0: Vec3<S>, r1: Vec3<S>, r2: Vec3<S>) -> Self {
        Mat3([r0.0, r1.0, r2.0])
    }

    #[inline]
    pub fn row(&self, i: usize) -> Vec3<S> {
        Vec3(self.0[i])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn det(&self) -> S {
        self.row(0).dot(&self.row(1).cross(&self.row(2)))
    }

    pub fn scaled(&self, s: S) -> Self {
        Mat3(self.0.map(|r| r.map(|v| v * s)))
    }

    /// Rotation about a unit axis by `angle` radians (Rodrigues).
    pub fn from_axis_angle(axis: Vec3<S>, angle: S) -> Self {
        let (s, c) = angle.sin_cos();
        let t = S::one() - c;
        let [x, y, z] = axis.0;
        Mat3([
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ])
    }

    /// Rotation matrix of a unit quaternion `(w, x, y, z)`.
    pub fn from_quaternion(w: S, x: S, y: S, z: S) -> Self {
        let two = S::lit(2.0);
        let one = S::one();
        Mat3([
            [
                one - two * (y * y + z * z),
                two * (x * y - w * z),
                two * (x * z + w * y),
            ],
            [
                two * (x * y + w * z),
                one - two * (x * x + z * z),
                two * (y * z - w * x),
            ],
            [
                two * (x * z - w * y),
                two * (y * z + w * x),
                one - two * (x * x + y * y),
            ],
        ])
    }

    /// Largest absolute entry of `M·Mᵀ − I`.
    pub fn orthonormality_error(&self) -> S {
        let p = *self * self.transpose();
        let id = Self::identity();
        let mut err = S::zero();
        for i in 0..3 {
            for j in 0..3 {
                err = err.max((p.0[i][j] - id.0[i][j]).abs());
            }
        }
        err
    }

    pub fn cast<T: Scalar>(&self) -> Mat3<T> {
        Mat3(self.0.map(|r| r.map(|v| T::lit(v.as_f64()))))
    }
}

impl<S: Scalar> Mul<Vec3<S>> for Mat3<S> {
    type Output = Vec3<S>;
    #[inline]
    fn mul(self, v: Vec3<S>) -> Vec3<S> {
        Vec3([
            self.row(0).dot(&v),
            self.row(1).dot(&v),
            self.row(2).dot(&v),
        ])
    }
}

impl<S: Scalar> Mul for Mat3<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = [[S::zero(); 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        Mat3(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quaternion_rotation_is_orthonormal() {
        let n = (0.1f64 * 0.1 + 0.2 * 0.2 + 0.3 * 0.3 + 0.9 * 0.9).sqrt();
        let m = Mat3::from_quaternion(0.9 / n, 0.1 / n, 0.2 / n, 0.3 / n);
        assert!(m.orthonormality_error() < 1e-12);
        assert!((m.det() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn axis_angle_quarter_turn() {
        let m = Mat3::from_axis_angle(Vec3::new(0.0, 0.0, 1.0), std::f64::consts::FRAC_PI_2);
        let v = m * Vec3::new(1.0, 0.0, 0.0);
        assert!((v.y() - 1.0).abs() < 1e-15 && v.x().abs() < 1e-15);
    }
}
