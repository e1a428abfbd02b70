use crate::math::{Mat3, Quat, Vec3};
use crate::scalar::{sc, sigmoid, Scalar};

use super::sh::{sh_basis, SH_COEFFS};

/// One anisotropic 3D Gaussian primitive.
///
/// Covariance is stored factored as rotation + per-axis log standard
/// deviations so it stays positive-definite under optimization; opacity is
/// stored as a pre-sigmoid logit.
#[derive(Clone, Debug, PartialEq)]
pub struct Gaussian<T> {
    /// World-space center (meters).
    pub position: Vec3<T>,
    /// Rotation; re-normalized after every optimizer step.
    pub rotation: Quat<T>,
    /// Per-axis log standard deviations (meters in exp space).
    pub log_scale: Vec3<T>,
    /// Pre-sigmoid opacity.
    pub opacity_logit: T,
    /// Spherical harmonics coefficients, `[channel][coefficient]`.
    pub sh: [[T; SH_COEFFS]; 3],
}

impl<T: Scalar> Gaussian<T> {
    /// Isotropic Gaussian with a flat (degree-0 only) color.
    pub fn isotropic(position: Vec3<T>, scale: T, color: Vec3<T>, opacity: T) -> Self {
        let mut sh = [[T::zero(); SH_COEFFS]; 3];
        let c0 = sc::<T>(super::sh::SH_C0);
        let half = sc::<T>(0.5);
        sh[0][0] = (color.x - half) / c0;
        sh[1][0] = (color.y - half) / c0;
        sh[2][0] = (color.z - half) / c0;
        Self {
            position,
            rotation: Quat::identity(),
            log_scale: Vec3::splat(scale.ln()),
            opacity_logit: crate::scalar::logit(opacity),
            sh,
        }
    }

    /// World-space covariance `R S S^T R^T` with `S = diag(exp(log_scale))`.
    pub fn covariance(&self) -> Mat3<T> {
        let r = self.rotation.to_matrix();
        let two = sc::<T>(2.0);
        let d = Vec3::new(
            (two * self.log_scale.x).exp(),
            (two * self.log_scale.y).exp(),
            (two * self.log_scale.z).exp(),
        );
        let rd = r * Mat3::from_diagonal(d);
        rd * r.transpose()
    }

    /// Per-axis standard deviations in meters.
    pub fn scale(&self) -> Vec3<T> {
        self.log_scale.map(|s| s.exp())
    }

    /// Activated opacity in (0, 1).
    pub fn opacity(&self) -> T {
        sigmoid(self.opacity_logit)
    }

    /// View-dependent color for a unit view direction, clamped to [0, 1]
    /// after the 0.5 DC offset.
    pub fn color(&self, view_dir: Vec3<T>) -> Vec3<T> {
        let basis = sh_basis(view_dir);
        let half = sc::<T>(0.5);
        let mut out = Vec3::splat(half);
        for ch in 0..3 {
            let mut acc = T::zero();
            for (i, b) in basis.iter().enumerate() {
                acc += self.sh[ch][i] * *b;
            }
            out[ch] = (out[ch] + acc).max(T::zero()).min(T::one());
        }
        out
    }

    /// Largest standard deviation (used for world-extent pruning).
    pub fn max_scale(&self) -> T {
        self.scale().max_component()
    }

    pub fn renormalize_rotation(&mut self) {
        self.rotation = self.rotation.normalized();
    }
}

/// `eval_sh` operation: view-dependent color of a Gaussian.
pub fn eval_sh<T: Scalar>(g: &Gaussian<T>, view_dir: Vec3<T>) -> Vec3<T> {
    g.color(view_dir)
}

/// `covariance_of` operation: world covariance of a Gaussian.
pub fn covariance_of<T: Scalar>(g: &Gaussian<T>) -> Mat3<T> {
    g.covariance()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::logit;
    use std::f64::consts::FRAC_PI_2;

    fn unit_gaussian() -> Gaussian<f64> {
        Gaussian::isotropic(Vec3::zero(), 1.0, Vec3::splat(0.5), 0.5)
    }

    #[test]
    fn covariance_identity() {
        let g = unit_gaussian();
        let cov = covariance_of(&g);
        for r in 0..3 {
            for c in 0..3 {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((cov.m[r][c] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn covariance_diagonal_scales() {
        let mut g = unit_gaussian();
        g.log_scale = Vec3::new(2.0f64.ln(), 0.0, 0.0);
        let cov = covariance_of(&g);
        assert!((cov.m[0][0] - 4.0).abs() < 1e-12);
        assert!((cov.m[1][1] - 1.0).abs() < 1e-12);
        assert!((cov.m[2][2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn covariance_rotated_90deg_about_z() {
        // scale (2,1,1) rotated 90 deg about z swaps the x/y variances
        let mut g = unit_gaussian();
        g.log_scale = Vec3::new(2.0f64.ln(), 0.0, 0.0);
        g.rotation = Quat::from_yaw_pitch(FRAC_PI_2, 0.0);
        let cov = covariance_of(&g);
        assert!((cov.m[0][0] - 1.0).abs() < 1e-12);
        assert!((cov.m[1][1] - 4.0).abs() < 1e-12);
        assert!((cov.m[2][2] - 1.0).abs() < 1e-12);
        assert!(cov.m[0][1].abs() < 1e-12);
    }

    #[test]
    fn covariance_invariant_to_quaternion_sign() {
        let mut g = unit_gaussian();
        g.log_scale = Vec3::new(0.3, -0.2, 0.1);
        g.rotation = Quat::new(0.4, -0.3, 0.7, 0.5).normalized();
        let a = g.covariance();
        g.rotation = g.rotation.scaled(-1.0);
        let b = g.covariance();
        for r in 0..3 {
            for c in 0..3 {
                assert!((a.m[r][c] - b.m[r][c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eval_sh_dc_only_is_view_independent() {
        let g = Gaussian::<f64>::isotropic(Vec3::zero(), 1.0, Vec3::new(1.0, 0.0, 0.0), 0.5);
        let a = eval_sh(&g, Vec3::new(1.0, 0.0, 0.0));
        let b = eval_sh(&g, Vec3::new(0.0, 0.0, -1.0).normalized());
        assert!(a.distance(b) < 1e-12);
        assert!((a.x - 1.0).abs() < 1e-12 && a.y.abs() < 1e-12 && a.z.abs() < 1e-12);
    }

    #[test]
    fn eval_sh_all_zero_is_mid_gray() {
        let mut g = unit_gaussian();
        g.sh = [[0.0; SH_COEFFS]; 3];
        let c = eval_sh(&g, Vec3::new(0.0, 0.0, 1.0));
        assert!((c.x - 0.5).abs() < 1e-15);
        assert!((c.y - 0.5).abs() < 1e-15);
        assert!((c.z - 0.5).abs() < 1e-15);
    }

    #[test]
    fn eval_sh_degree1_symmetric_about_dc() {
        // Y_1^0 is proportional to z: +z and -z directions move the color
        // symmetrically around the DC value.
        let mut g = unit_gaussian();
        g.sh = [[0.0; SH_COEFFS]; 3];
        g.sh[0][2] = 0.2; // z-aligned degree-1 coefficient, red channel
        let up = eval_sh(&g, Vec3::new(0.0, 0.0, 1.0));
        let dn = eval_sh(&g, Vec3::new(0.0, 0.0, -1.0));
        assert!((up.x + dn.x - 1.0).abs() < 1e-12, "symmetric about 0.5");
        assert!((up.x - dn.x).abs() > 0.1, "directions must differ");
    }

    #[test]
    fn activation_roundtrips() {
        let g = Gaussian::<f64>::isotropic(Vec3::zero(), 0.25, Vec3::splat(0.5), 0.1);
        assert!((g.opacity() - 0.1).abs() < 1e-12);
        assert!((g.scale().x - 0.25).abs() < 1e-12);
        assert_eq!(g.opacity_logit, logit(0.1));
    }
}
