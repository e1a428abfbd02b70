use std::ops::{Add, Mul, Sub};

use super::vec::{Vec2, Vec3};
use crate::scalar::Scalar;

/// Row-major 2x2 matrix (screen-space covariances, conics).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat2<T> {
    pub m: [[T; 2]; 2],
}

/// Row-major 3x3 matrix (rotations, world covariances, intrinsics).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3<T> {
    pub m: [[T; 3]; 3],
}

/// Row-major 2x3 matrix (projection Jacobians).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat2x3<T> {
    pub m: [[T; 3]; 2],
}

impl<T: Scalar> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Self { m: [[a, b], [c, d]] }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn det(&self) -> T {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == T::zero() || !d.is_finite() {
            return None;
        }
        Some(Self::new(
            self.m[1][1] / d,
            -self.m[0][1] / d,
            -self.m[1][0] / d,
            self.m[0][0] / d,
        ))
    }

    pub fn mul_vec(&self, v: Vec2<T>) -> Vec2<T> {
        Vec2::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y,
            self.m[1][0] * v.x + self.m[1][1] * v.y,
        )
    }

    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1]
    }

    /// Largest eigenvalue of a symmetric 2x2 matrix.
    pub fn max_eigenvalue_sym(&self) -> T {
        let half = T::from_f64_c(0.5);
        let mid = half * self.trace();
        let det = self.det();
        let disc = (mid * mid - det).max(T::zero()).sqrt();
        mid + disc
    }
}

impl<T: Scalar> Add for Mat2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for r in 0..2 {
            for c in 0..2 {
                out.m[r][c] += rhs.m[r][c];
            }
        }
        out
    }
}

impl<T: Scalar> Mat3<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(a: T, b: T, c: T, d: T, e: T, f: T, g: T, h: T, i: T) -> Self {
        Self {
            m: [[a, b, c], [d, e, f], [g, h, i]],
        }
    }

    pub fn zero() -> Self {
        Self { m: [[T::zero(); 3]; 3] }
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            m.m[i][i] = T::one();
        }
        m
    }

    pub fn from_rows(r0: Vec3<T>, r1: Vec3<T>, r2: Vec3<T>) -> Self {
        Self {
            m: [r0.to_array(), r1.to_array(), r2.to_array()],
        }
    }

    pub fn from_diagonal(d: Vec3<T>) -> Self {
        let mut m = Self::zero();
        m.m[0][0] = d.x;
        m.m[1][1] = d.y;
        m.m[2][2] = d.z;
        m
    }

    pub fn from_row_major(a: &[T; 9]) -> Self {
        Self {
            m: [[a[0], a[1], a[2]], [a[3], a[4], a[5]], [a[6], a[7], a[8]]],
        }
    }

    pub fn to_row_major(&self) -> [T; 9] {
        let m = &self.m;
        [
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        ]
    }

    pub fn row(&self, r: usize) -> Vec3<T> {
        Vec3::from_array(self.m[r])
    }

    pub fn col(&self, c: usize) -> Vec3<T> {
        Vec3::new(self.m[0][c], self.m[1][c], self.m[2][c])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        Self::new(
            m[0][0], m[1][0], m[2][0], m[0][1], m[1][1], m[2][1], m[0][2], m[1][2], m[2][2],
        )
    }

    pub fn mul_vec(&self, v: Vec3<T>) -> Vec3<T> {
        Vec3::new(
            self.row(0).dot(v),
            self.row(1).dot(v),
            self.row(2).dot(v),
        )
    }

    pub fn det(&self) -> T {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    /// Frobenius inner product `<A, B> = sum(A .* B)`.
    pub fn frobenius_dot(&self, rhs: &Self) -> T {
        let mut acc = T::zero();
        for r in 0..3 {
            for c in 0..3 {
                acc += self.m[r][c] * rhs.m[r][c];
            }
        }
        acc
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = *self;
        for r in 0..3 {
            for c in 0..3 {
                out.m[r][c] *= s;
            }
        }
        out
    }

    /// Checks orthogonality (`R R^T = I`) and `det = +1` within `tol`.
    pub fn is_rotation(&self, tol: T) -> bool {
        let gram = *self * self.transpose();
        let id = Self::identity();
        let mut max_dev = T::zero();
        for r in 0..3 {
            for c in 0..3 {
                max_dev = max_dev.max((gram.m[r][c] - id.m[r][c]).abs());
            }
        }
        max_dev <= tol && (self.det() - T::one()).abs() <= tol
    }
}

impl<T: Scalar> Mul for Mat3<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for r in 0..3 {
            for c in 0..3 {
                let mut acc = T::zero();
                for k in 0..3 {
                    acc += self.m[r][k] * rhs.m[k][c];
                }
                out.m[r][c] = acc;
            }
        }
        out
    }
}

impl<T: Scalar> Add for Mat3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for r in 0..3 {
            for c in 0..3 {
                out.m[r][c] += rhs.m[r][c];
            }
        }
        out
    }
}

impl<T: Scalar> Sub for Mat3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut out = self;
        for r in 0..3 {
            for c in 0..3 {
                out.m[r][c] -= rhs.m[r][c];
            }
        }
        out
    }
}

impl<T: Scalar> Mat2x3<T> {
    pub fn zero() -> Self {
        Self { m: [[T::zero(); 3]; 2] }
    }

    pub fn row(&self, r: usize) -> Vec3<T> {
        Vec3::from_array(self.m[r])
    }

    pub fn mul_vec(&self, v: Vec3<T>) -> Vec2<T> {
        Vec2::new(self.row(0).dot(v), self.row(1).dot(v))
    }

    /// `self * rhs` where `rhs` is 3x3, yielding 2x3.
    pub fn mul_mat3(&self, rhs: &Mat3<T>) -> Self {
        let mut out = Self::zero();
        for r in 0..2 {
            for c in 0..3 {
                let mut acc = T::zero();
                for k in 0..3 {
                    acc += self.m[r][k] * rhs.m[k][c];
                }
                out.m[r][c] = acc;
            }
        }
        out
    }

    /// `self * sigma * self^T` for 3x3 `sigma`, yielding 2x2.
    pub fn sandwich_sym(&self, sigma: &Mat3<T>) -> Mat2<T> {
        let s = self.mul_mat3(sigma);
        let mut out = Mat2::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.m[r][c] = s.row(r).dot(self.row(c));
            }
        }
        out
    }

    /// `v^T * self` for a 2-vector, yielding a 3-vector (`self^T * v`).
    pub fn transpose_mul_vec(&self, v: Vec2<T>) -> Vec3<T> {
        self.row(0) * v.x + self.row(1) * v.y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::sc;

    #[test]
    fn mat3_inverse_like_identities() {
        let r: Mat3<f64> = Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert!(r.is_rotation(1e-12));
        let i = r * r.transpose();
        assert!((i.trace() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn mat2_inverse() {
        let a: Mat2<f64> = Mat2::new(4.0, 1.0, 1.0, 3.0);
        let inv = a.inverse().unwrap();
        let v = Vec2::new(2.0, -1.0);
        let round = a.mul_vec(inv.mul_vec(v));
        assert!((round.x - v.x).abs() < 1e-12);
        assert!((round.y - v.y).abs() < 1e-12);
    }

    #[test]
    fn mat2_max_eigenvalue() {
        let a: Mat2<f64> = Mat2::new(3.0, 1.0, 1.0, 3.0);
        assert!((a.max_eigenvalue_sym() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn sandwich_matches_manual() {
        let j: Mat2x3<f64> = Mat2x3 {
            m: [[1.0, 0.0, 2.0], [0.0, 1.0, -1.0]],
        };
        let sigma = Mat3::from_diagonal(Vec3::new(sc(2.0), sc(3.0), sc(4.0)));
        let v = j.sandwich_sym(&sigma);
        // rows: (1,0,2) and (0,1,-1); V = J S J^T
        assert!((v.m[0][0] - (2.0 + 16.0)).abs() < 1e-12);
        assert!((v.m[0][1] - (-8.0)).abs() < 1e-12);
        assert!((v.m[1][0] - (-8.0)).abs() < 1e-12);
        assert!((v.m[1][1] - (3.0 + 4.0)).abs() < 1e-12);
    }
}
