//! Quaternion and rotation-matrix algebra.
//!
//! Component order is `(w, x, y, z)` everywhere in this crate: `w` is the
//! scalar part, `(x, y, z)` the vector part. A unit quaternion `q` rotates a
//! vector `v` as `q ⊗ (0, v) ⊗ q*`; for attitude quaternions the convention is
//! body → global, so `v_global = q.rotate(v_body)`.
//!
//! Sign canonicalization (`w >= 0`) happens only when extracting from a
//! rotation matrix and inside metrics. Filters keep whatever hemisphere their
//! state is in and align measurements explicitly.

use std::fmt;
use std::ops::{Mul, Neg};

use nalgebra::{Matrix3, Vector3, Vector4};

use crate::error::{Error, Result};

/// Orthonormality tolerance accepted when converting a matrix to a quaternion.
pub const ROTATION_INPUT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Default for Quaternion {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.w, self.x, self.y, self.z)
    }
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    /// Pure quaternion `(0, v)`.
    pub fn pure(v: &Vector3<f64>) -> Self {
        Self::new(0.0, v.x, v.y, v.z)
    }

    pub fn from_vector4(v: &Vector4<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_vector4(&self) -> Vector4<f64> {
        Vector4::new(self.w, self.x, self.y, self.z)
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn dot(&self, other: &Quaternion) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    /// Hamilton product `self ⊗ rhs`:
    /// `[s_a s_b − a·b, s_a b + s_b a + a × b]`.
    pub fn multiply(&self, rhs: &Quaternion) -> Quaternion {
        let a = self.vector();
        let b = rhs.vector();
        let s = self.w * rhs.w - a.dot(&b);
        let v = b * self.w + a * rhs.w + a.cross(&b);
        Quaternion::new(s, v.x, v.y, v.z)
    }

    pub fn conjugate(&self) -> Quaternion {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn normalize(&self) -> Result<Quaternion> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scale(1.0 / n))
    }

    /// Rotation about a unit axis. A non-unit (but non-zero) axis is normalized.
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Result<Quaternion> {
        let n = axis.norm();
        if !(n > 1e-12) {
            return Err(Error::ZeroAxis);
        }
        let (s, c) = (0.5 * angle).sin_cos();
        let u = axis / n;
        Ok(Quaternion::new(c, s * u.x, s * u.y, s * u.z))
    }

    /// Exponential map of a rotation vector (axis · angle). Exact identity for
    /// a zero vector.
    pub fn from_rotation_vector(v: &Vector3<f64>) -> Quaternion {
        let angle = v.norm();
        if angle < 1e-12 {
            // second-order accurate small-angle form
            let half = v * 0.5;
            return Quaternion::new(1.0 - 0.5 * half.norm_squared(), half.x, half.y, half.z);
        }
        let (s, c) = (0.5 * angle).sin_cos();
        let u = v * (s / angle);
        Quaternion::new(c, u.x, u.y, u.z)
    }

    /// Rotation vector (axis · angle) with angle in `[0, π]`.
    pub fn to_rotation_vector(&self) -> Vector3<f64> {
        let q = if self.w < 0.0 { -*self } else { *self };
        let vn = q.vector().norm();
        if vn < 1e-12 {
            return q.vector() * 2.0;
        }
        let angle = 2.0 * vn.atan2(q.w);
        q.vector() * (angle / vn)
    }

    /// Rotate `v` by this (unit) quaternion.
    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.multiply(&Quaternion::pure(v)).multiply(&self.conjugate()).vector()
    }

    pub fn to_rotation(&self) -> RotationMatrix {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        let m = Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        );
        RotationMatrix(m)
    }

    /// Rotation angle between two unit quaternions, `2·acos(|a·b|)`, in `[0, π]`.
    ///
    /// Evaluated as `2·atan2(|r_v|, |r_w|)` with `r = a* ⊗ b`, which keeps
    /// full precision near zero.
    pub fn angular_distance(&self, other: &Quaternion) -> f64 {
        let r = self.conjugate().multiply(other);
        2.0 * r.vector().norm().atan2(r.w.abs())
    }

    /// Same rotation with `w >= 0`; when `w == 0` the first non-zero vector
    /// component is made positive.
    pub fn canonical(&self) -> Quaternion {
        const EPS: f64 = 1e-12;
        if self.w < -EPS {
            return -*self;
        }
        if self.w.abs() <= EPS {
            for c in [self.x, self.y, self.z] {
                if c.abs() > EPS {
                    return if c < 0.0 { -*self } else { *self };
                }
            }
        }
        *self
    }

    /// `self` or `-self`, whichever lies in the same hemisphere as `reference`.
    pub fn aligned_to(&self, reference: &Quaternion) -> Quaternion {
        if self.dot(reference) < 0.0 {
            -*self
        } else {
            *self
        }
    }

    /// Spherical linear interpolation along the shorter arc. `t = 0` returns
    /// `a` and `t = 1` returns `b` (hemisphere-aligned) exactly.
    pub fn slerp(a: &Quaternion, b: &Quaternion, t: f64) -> Quaternion {
        let b = b.aligned_to(a);
        if t == 0.0 {
            return *a;
        }
        if t == 1.0 {
            return b;
        }
        let cos_theta = a.dot(&b).min(1.0);
        if cos_theta > 0.9995 {
            let lerp = Quaternion::new(
                a.w + t * (b.w - a.w),
                a.x + t * (b.x - a.x),
                a.y + t * (b.y - a.y),
                a.z + t * (b.z - a.z),
            );
            return lerp.normalize().unwrap_or(*a);
        }
        let theta = cos_theta.acos();
        let sin_theta = theta.sin();
        let wa = ((1.0 - t) * theta).sin() / sin_theta;
        let wb = (t * theta).sin() / sin_theta;
        Quaternion::new(
            wa * a.w + wb * b.w,
            wa * a.x + wb * b.x,
            wa * a.y + wb * b.y,
            wa * a.z + wb * b.z,
        )
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        self.multiply(&rhs)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// A 3×3 rotation matrix (orthonormal, det +1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Matrix3<f64>);

impl Default for RotationMatrix {
    fn default() -> Self {
        Self::identity()
    }
}

impl RotationMatrix {
    pub fn identity() -> Self {
        RotationMatrix(Matrix3::identity())
    }

    /// Accepts `m` if it is a rotation within `tol` (max abs entry of `mᵀm − I`
    /// and `|det − 1|`).
    pub fn from_matrix(m: Matrix3<f64>, tol: f64) -> Result<Self> {
        let r = RotationMatrix(m);
        let err = r.orthonormality_error();
        if !(err <= tol) {
            return Err(Error::NotOrthonormal(err));
        }
        Ok(r)
    }

    /// Wraps `m` without checking. Callers own the invariant.
    pub fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        RotationMatrix(m)
    }

    /// Row-major nine numbers.
    pub fn from_row_slice(v: &[f64; 9], tol: f64) -> Result<Self> {
        Self::from_matrix(Matrix3::from_row_slice(v), tol)
    }

    pub fn to_row_array(&self) -> [f64; 9] {
        let m = &self.0;
        [m[(0, 0)], m[(0, 1)], m[(0, 2)], m[(1, 0)], m[(1, 1)], m[(1, 2)], m[(2, 0)], m[(2, 1)], m[(2, 2)]]
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        RotationMatrix(self.0.transpose())
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    pub fn orthonormality_error(&self) -> f64 {
        let e = (self.0.transpose() * self.0 - Matrix3::identity()).abs().max();
        e.max((self.0.determinant() - 1.0).abs())
    }

    /// Nearest rotation in the Frobenius sense (polar factor via SVD).
    pub fn reorthonormalize(&self) -> Self {
        let svd = self.0.svd(true, true);
        let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut r = u * v_t;
        if r.determinant() < 0.0 {
            let mut u = u;
            u.column_mut(2).neg_mut();
            r = u * v_t;
        }
        RotationMatrix(r)
    }

    /// Quaternion extraction, branching on the largest of the trace and the
    /// diagonal entries. The result is canonicalized (`w >= 0`).
    pub fn to_quaternion(&self) -> Result<Quaternion> {
        let err = self.orthonormality_error();
        if !(err <= ROTATION_INPUT_TOL) {
            return Err(Error::NotOrthonormal(err));
        }
        let m = &self.0;
        let (m00, m11, m22) = (m[(0, 0)], m[(1, 1)], m[(2, 2)]);
        let trace = m00 + m11 + m22;
        let q = if trace >= m00 && trace >= m11 && trace >= m22 {
            let s = (1.0 + trace).sqrt() * 2.0;
            Quaternion::new(
                0.25 * s,
                (m[(2, 1)] - m[(1, 2)]) / s,
                (m[(0, 2)] - m[(2, 0)]) / s,
                (m[(1, 0)] - m[(0, 1)]) / s,
            )
        } else if m00 >= m11 && m00 >= m22 {
            let s = (1.0 + m00 - m11 - m22).sqrt() * 2.0;
            Quaternion::new(
                (m[(2, 1)] - m[(1, 2)]) / s,
                0.25 * s,
                (m[(0, 1)] + m[(1, 0)]) / s,
                (m[(0, 2)] + m[(2, 0)]) / s,
            )
        } else if m11 >= m22 {
            let s = (1.0 + m11 - m00 - m22).sqrt() * 2.0;
            Quaternion::new(
                (m[(0, 2)] - m[(2, 0)]) / s,
                (m[(0, 1)] + m[(1, 0)]) / s,
                0.25 * s,
                (m[(1, 2)] + m[(2, 1)]) / s,
            )
        } else {
            let s = (1.0 + m22 - m00 - m11).sqrt() * 2.0;
            Quaternion::new(
                (m[(1, 0)] - m[(0, 1)]) / s,
                (m[(0, 2)] + m[(2, 0)]) / s,
                (m[(1, 2)] + m[(2, 1)]) / s,
                0.25 * s,
            )
        };
        Ok(q.normalize()?.canonical())
    }
}

impl Mul for RotationMatrix {
    type Output = RotationMatrix;
    fn mul(self, rhs: RotationMatrix) -> RotationMatrix {
        RotationMatrix(self.0 * rhs.0)
    }
}

/// Skew-symmetric cross-product matrix `[v]×`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}
