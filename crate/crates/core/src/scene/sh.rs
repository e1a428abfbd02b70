//! Real spherical harmonics up to degree 3 for view-dependent color.
//!
//! Ordering is the usual one for splatting pipelines:
//! degree 0, then `Y_1^{-1..1}`, `Y_2^{-2..2}`, `Y_3^{-3..3}`.

use crate::math::Vec3;
use crate::scalar::{sc, Scalar};

/// Coefficients per color channel at degree 3.
pub const SH_COEFFS: usize = 16;

/// Degree-0 basis constant; the DC color convention is
/// `color = 0.5 + dc_coeff * SH_C0`.
pub const SH_C0: f64 = 0.282_094_791_773_878_14;

const C1: f64 = 0.488_602_511_902_919_9;
const C2_0: f64 = 1.092_548_430_592_079_2;
const C2_1: f64 = 0.315_391_565_252_520_05;
const C2_2: f64 = 0.546_274_215_296_039_6;
const C3_0: f64 = 0.590_043_589_926_643_5;
const C3_1: f64 = 2.890_611_442_640_554;
const C3_2: f64 = 0.457_045_799_464_465_8;
const C3_3: f64 = 0.373_176_332_590_115_4;
const C3_4: f64 = 1.445_305_721_320_277;
const C3_5: f64 = 0.590_043_589_926_643_5;

/// Basis values at a unit direction.
pub fn sh_basis<T: Scalar>(dir: Vec3<T>) -> [T; SH_COEFFS] {
    let (x, y, z) = (dir.x, dir.y, dir.z);
    let (x2, y2, z2) = (x * x, y * y, z * z);
    let three = sc::<T>(3.0);
    let five = sc::<T>(5.0);
    [
        sc(SH_C0),
        sc::<T>(C1) * y,
        sc::<T>(C1) * z,
        sc::<T>(C1) * x,
        sc::<T>(C2_0) * x * y,
        sc::<T>(C2_0) * y * z,
        sc::<T>(C2_1) * (three * z2 - T::one()),
        sc::<T>(C2_0) * x * z,
        sc::<T>(C2_2) * (x2 - y2),
        sc::<T>(C3_0) * y * (three * x2 - y2),
        sc::<T>(C3_1) * x * y * z,
        sc::<T>(C3_2) * y * (five * z2 - T::one()),
        sc::<T>(C3_3) * z * (five * z2 - three),
        sc::<T>(C3_2) * x * (five * z2 - T::one()),
        sc::<T>(C3_4) * z * (x2 - y2),
        sc::<T>(C3_5) * x * (x2 - three * y2),
    ]
}

/// Basis values and their per-component partials with respect to the
/// (unnormalized) direction. Normalization is chained by the caller.
pub fn sh_basis_and_grad<T: Scalar>(dir: Vec3<T>) -> ([T; SH_COEFFS], [Vec3<T>; SH_COEFFS]) {
    let (x, y, z) = (dir.x, dir.y, dir.z);
    let (x2, y2, z2) = (x * x, y * y, z * z);
    let zero = T::zero();
    let two = sc::<T>(2.0);
    let three = sc::<T>(3.0);
    let five = sc::<T>(5.0);
    let six = sc::<T>(6.0);
    let ten = sc::<T>(10.0);
    let fifteen = sc::<T>(15.0);

    let basis = sh_basis(dir);
    let grads = [
        Vec3::zero(),
        Vec3::new(zero, sc(C1), zero),
        Vec3::new(zero, zero, sc(C1)),
        Vec3::new(sc(C1), zero, zero),
        Vec3::new(sc::<T>(C2_0) * y, sc::<T>(C2_0) * x, zero),
        Vec3::new(zero, sc::<T>(C2_0) * z, sc::<T>(C2_0) * y),
        Vec3::new(zero, zero, sc::<T>(C2_1) * six * z),
        Vec3::new(sc::<T>(C2_0) * z, zero, sc::<T>(C2_0) * x),
        Vec3::new(sc::<T>(C2_2) * two * x, -sc::<T>(C2_2) * two * y, zero),
        Vec3::new(
            sc::<T>(C3_0) * six * x * y,
            sc::<T>(C3_0) * (three * x2 - three * y2),
            zero,
        ),
        Vec3::new(sc::<T>(C3_1) * y * z, sc::<T>(C3_1) * x * z, sc::<T>(C3_1) * x * y),
        Vec3::new(
            zero,
            sc::<T>(C3_2) * (five * z2 - T::one()),
            sc::<T>(C3_2) * y * ten * z,
        ),
        Vec3::new(zero, zero, sc::<T>(C3_3) * (fifteen * z2 - three)),
        Vec3::new(
            sc::<T>(C3_2) * (five * z2 - T::one()),
            zero,
            sc::<T>(C3_2) * x * ten * z,
        ),
        Vec3::new(
            sc::<T>(C3_4) * two * x * z,
            -sc::<T>(C3_4) * two * y * z,
            sc::<T>(C3_4) * (x2 - y2),
        ),
        Vec3::new(
            sc::<T>(C3_5) * (three * x2 - three * y2),
            -sc::<T>(C3_5) * six * x * y,
            zero,
        ),
    ];
    (basis, grads)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dc_is_constant() {
        let a = sh_basis(Vec3::new(1.0f64, 0.0, 0.0));
        let b = sh_basis(Vec3::new(0.0f64, 0.0, 1.0));
        assert_eq!(a[0], b[0]);
        assert!((a[0] - SH_C0).abs() < 1e-15);
    }

    #[test]
    fn degree1_is_linear_in_direction() {
        let d = Vec3::new(0.6f64, 0.0, 0.8);
        let b = sh_basis(d);
        assert!((b[3] - C1 * 0.6).abs() < 1e-15);
        assert!((b[2] - C1 * 0.8).abs() < 1e-15);
        assert!(b[1].abs() < 1e-15);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let d = Vec3::new(0.3f64, -0.4, 0.866_025_4);
        let (_, grads) = sh_basis_and_grad(d);
        let eps = 1e-6;
        for axis in 0..3 {
            let mut dp = d;
            let mut dm = d;
            dp[axis] += eps;
            dm[axis] -= eps;
            let bp = sh_basis(dp);
            let bm = sh_basis(dm);
            for i in 0..SH_COEFFS {
                let fd = (bp[i] - bm[i]) / (2.0 * eps);
                assert!(
                    (grads[i][axis] - fd).abs() < 1e-8,
                    "basis {i} axis {axis}: analytic {} vs fd {fd}",
                    grads[i][axis]
                );
            }
        }
    }
}
