use super::mat::Mat3;
use super::vec::Vec3;
use crate::scalar::{sc, Scalar};

/// Quaternion in (w, x, y, z) order. Rotations use the normalized form;
/// the raw storage may drift off unit norm during optimization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quat<T> {
    pub w: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Quat<T> {
    pub const fn new(w: T, x: T, y: T, z: T) -> Self {
        Self { w, x, y, z }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::zero())
    }

    pub fn norm(self) -> T {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        Self::new(self.w / n, self.x / n, self.y / n, self.z / n)
    }

    pub fn dot(self, rhs: Self) -> T {
        self.w * rhs.w + self.x * rhs.x + self.y * rhs.y + self.z * rhs.z
    }

    pub fn scaled(self, s: T) -> Self {
        Self::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    /// Hamilton product `self * rhs` (applies `rhs` first).
    pub fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.w * rhs.w - self.x * rhs.x - self.y * rhs.y - self.z * rhs.z,
            self.w * rhs.x + self.x * rhs.w + self.y * rhs.z - self.z * rhs.y,
            self.w * rhs.y - self.x * rhs.z + self.y * rhs.w + self.z * rhs.x,
            self.w * rhs.z + self.x * rhs.y - self.y * rhs.x + self.z * rhs.w,
        )
    }

    /// Rotation matrix of the normalized quaternion.
    pub fn to_matrix(self) -> Mat3<T> {
        let q = self.normalized();
        let two = sc::<T>(2.0);
        let (w, x, y, z) = (q.w, q.x, q.y, q.z);
        Mat3::new(
            T::one() - two * (y * y + z * z),
            two * (x * y - w * z),
            two * (x * z + w * y),
            two * (x * y + w * z),
            T::one() - two * (x * x + z * z),
            two * (y * z - w * x),
            two * (x * z - w * y),
            two * (y * z + w * x),
            T::one() - two * (x * x + y * y),
        )
    }

    /// Quaternion for a rotation matrix (Shepperd's method).
    pub fn from_matrix(r: &Mat3<T>) -> Self {
        let m = &r.m;
        let trace = r.trace();
        let half = sc::<T>(0.5);
        let quarter = sc::<T>(0.25);
        let q = if trace > T::zero() {
            let s = (trace + T::one()).sqrt() * sc(2.0);
            Self::new(
                quarter * s,
                (m[2][1] - m[1][2]) / s,
                (m[0][2] - m[2][0]) / s,
                (m[1][0] - m[0][1]) / s,
            )
        } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
            let s = (T::one() + m[0][0] - m[1][1] - m[2][2]).sqrt() * sc(2.0);
            Self::new(
                (m[2][1] - m[1][2]) / s,
                quarter * s,
                (m[0][1] + m[1][0]) / s,
                (m[0][2] + m[2][0]) / s,
            )
        } else if m[1][1] > m[2][2] {
            let s = (T::one() + m[1][1] - m[0][0] - m[2][2]).sqrt() * sc(2.0);
            Self::new(
                (m[0][2] - m[2][0]) / s,
                (m[0][1] + m[1][0]) / s,
                quarter * s,
                (m[1][2] + m[2][1]) / s,
            )
        } else {
            let s = (T::one() + m[2][2] - m[0][0] - m[1][1]).sqrt() * sc(2.0);
            Self::new(
                (m[1][0] - m[0][1]) / s,
                (m[0][2] + m[2][0]) / s,
                (m[1][2] + m[2][1]) / s,
                quarter * s,
            )
        };
        let _ = half;
        q.normalized()
    }

    /// Rotation from yaw (about +z) then pitch (about +y).
    pub fn from_yaw_pitch(yaw: T, pitch: T) -> Self {
        let half = sc::<T>(0.5);
        let qz = Self::new((yaw * half).cos(), T::zero(), T::zero(), (yaw * half).sin());
        let qy = Self::new((pitch * half).cos(), T::zero(), (pitch * half).sin(), T::zero());
        qz.mul(qy).normalized()
    }

    pub fn rotate(self, v: Vec3<T>) -> Vec3<T> {
        self.to_matrix().mul_vec(v)
    }

    /// Spherical linear interpolation; `t` in [0, 1].
    pub fn slerp(self, other: Self, t: T) -> Self {
        let a = self.normalized();
        let mut b = other.normalized();
        let mut cos = a.dot(b);
        if cos < T::zero() {
            b = b.scaled(-T::one());
            cos = -cos;
        }
        let near_one = sc::<T>(1.0 - 1e-9);
        if cos > near_one {
            // nearly parallel: linear interpolation avoids division by sin ~ 0
            return Self::new(
                a.w + (b.w - a.w) * t,
                a.x + (b.x - a.x) * t,
                a.y + (b.y - a.y) * t,
                a.z + (b.z - a.z) * t,
            )
            .normalized();
        }
        let theta = cos.acos();
        let sin = theta.sin();
        let wa = ((T::one() - t) * theta).sin() / sin;
        let wb = (t * theta).sin() / sin;
        Self::new(
            a.w * wa + b.w * wb,
            a.x * wa + b.x * wb,
            a.y * wa + b.y * wb,
            a.z * wa + b.z * wb,
        )
        .normalized()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn identity_matrix() {
        let q: Quat<f64> = Quat::identity();
        let r = q.to_matrix();
        assert!(r.is_rotation(1e-12));
        assert!((r.trace() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn yaw_90_rotates_x_to_y() {
        let q = Quat::<f64>::from_yaw_pitch(FRAC_PI_2, 0.0);
        let v = q.rotate(Vec3::new(1.0, 0.0, 0.0));
        assert!((v.x).abs() < 1e-12);
        assert!((v.y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matrix_roundtrip() {
        let q = Quat::<f64>::new(0.3, -0.5, 0.7, 0.2).normalized();
        let r = q.to_matrix();
        let q2 = Quat::from_matrix(&r);
        // q and -q encode the same rotation
        let sign = if q.dot(q2) < 0.0 { -1.0 } else { 1.0 };
        assert!((q.w - sign * q2.w).abs() < 1e-12);
        assert!((q.x - sign * q2.x).abs() < 1e-12);
        assert!((q.y - sign * q2.y).abs() < 1e-12);
        assert!((q.z - sign * q2.z).abs() < 1e-12);
    }

    #[test]
    fn slerp_endpoints_and_midpoint() {
        let a = Quat::<f64>::from_yaw_pitch(0.0, 0.0);
        let b = Quat::<f64>::from_yaw_pitch(FRAC_PI_2, 0.0);
        let s0 = a.slerp(b, 0.0);
        let s1 = a.slerp(b, 1.0);
        let sm = a.slerp(b, 0.5);
        assert!(s0.dot(a).abs() > 1.0 - 1e-12);
        assert!(s1.dot(b).abs() > 1.0 - 1e-12);
        let expect = Quat::<f64>::from_yaw_pitch(FRAC_PI_2 / 2.0, 0.0);
        assert!(sm.dot(expect).abs() > 1.0 - 1e-12);
    }
}
