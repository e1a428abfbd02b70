use crate::error::{Error, Result};
use crate::math::{Mat3, Vec2, Vec3};
use crate::scalar::{sc, Scalar};

/// One calibrated pinhole view at a timestep.
///
/// Extrinsics map world to camera: `x_cam = R x_world + T`. The camera
/// center in world coordinates is `-R^T T`.
#[derive(Clone, Debug, PartialEq)]
pub struct CameraView<T> {
    /// Upper-triangular intrinsics (pixels).
    pub intrinsics: Mat3<T>,
    /// World-to-camera rotation.
    pub rotation: Mat3<T>,
    /// World-to-camera translation (meters).
    pub translation: Vec3<T>,
    pub width: u32,
    pub height: u32,
    pub camera_id: String,
    pub timestep: i64,
    /// Multi-camera fusion weight (>= 0).
    pub fusion_weight: T,
}

impl<T: Scalar> CameraView<T> {
    pub fn validate(&self) -> Result<()> {
        let tol = sc::<T>(1e-6);
        if !self.rotation.is_rotation(tol) {
            return Err(Error::validation(
                format!("camera {}.R", self.camera_id),
                "not orthogonal with determinant +1 within 1e-6",
            ));
        }
        let k = &self.intrinsics.m;
        if k[0][0] <= T::zero() || k[1][1] <= T::zero() {
            return Err(Error::validation(
                format!("camera {}.K", self.camera_id),
                "focal entries must be positive",
            ));
        }
        if k[1][0] != T::zero() || k[2][0] != T::zero() || k[2][1] != T::zero() {
            return Err(Error::validation(
                format!("camera {}.K", self.camera_id),
                "lower-triangular part must be zero",
            ));
        }
        if !self.translation.is_finite() {
            return Err(Error::validation(
                format!("camera {}.T", self.camera_id),
                "translation must be finite",
            ));
        }
        if self.fusion_weight < T::zero() {
            return Err(Error::validation(
                format!("camera {}.fusion_weight", self.camera_id),
                "must be non-negative",
            ));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::validation(
                format!("camera {}.resolution", self.camera_id),
                "must be positive",
            ));
        }
        Ok(())
    }

    pub fn fx(&self) -> T {
        self.intrinsics.m[0][0]
    }

    pub fn fy(&self) -> T {
        self.intrinsics.m[1][1]
    }

    pub fn cx(&self) -> T {
        self.intrinsics.m[0][2]
    }

    pub fn cy(&self) -> T {
        self.intrinsics.m[1][2]
    }

    pub fn skew(&self) -> T {
        self.intrinsics.m[0][1]
    }

    /// Camera center in world coordinates.
    pub fn center(&self) -> Vec3<T> {
        -(self.rotation.transpose().mul_vec(self.translation))
    }

    /// World point into the camera frame.
    pub fn to_camera(&self, p: Vec3<T>) -> Vec3<T> {
        self.rotation.mul_vec(p) + self.translation
    }

    /// Continuous pixel coordinates of a camera-frame point (depth > 0).
    pub fn project_camera_point(&self, t: Vec3<T>) -> Vec2<T> {
        let u = (self.fx() * t.x + self.skew() * t.y) / t.z + self.cx();
        let v = self.fy() * t.y / t.z + self.cy();
        Vec2::new(u, v)
    }

    /// Projects a world point; returns pixel coordinates and camera depth.
    pub fn project(&self, p: Vec3<T>) -> (Vec2<T>, T) {
        let t = self.to_camera(p);
        (self.project_camera_point(t), t.z)
    }

    /// Inverse of [`project`]: world point at pixel `(u, v)` and depth `z`.
    pub fn back_project(&self, uv: Vec2<T>, depth: T) -> Vec3<T> {
        let y = (uv.y - self.cy()) * depth / self.fy();
        let x = ((uv.x - self.cx()) * depth - self.skew() * y) / self.fx();
        let cam = Vec3::new(x, y, depth);
        self.rotation.transpose().mul_vec(cam - self.translation)
    }

    /// True when a continuous pixel coordinate falls inside the image.
    pub fn in_bounds(&self, uv: Vec2<T>) -> bool {
        uv.x >= T::zero()
            && uv.y >= T::zero()
            && uv.x < T::from_u32(self.width).unwrap()
            && uv.y < T::from_u32(self.height).unwrap()
    }

    /// Copy with intrinsics shifted to a sub-rectangle of the image.
    pub fn cropped(&self, x0: u32, y0: u32, w: u32, h: u32) -> Self {
        let mut out = self.clone();
        out.intrinsics.m[0][2] = self.cx() - T::from_u32(x0).unwrap();
        out.intrinsics.m[1][2] = self.cy() - T::from_u32(y0).unwrap();
        out.width = w;
        out.height = h;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn simple_camera() -> CameraView<f64> {
        CameraView {
            intrinsics: Mat3::new(100.0, 0.0, 50.0, 0.0, 100.0, 50.0, 0.0, 0.0, 1.0),
            rotation: Mat3::identity(),
            translation: Vec3::zero(),
            width: 100,
            height: 100,
            camera_id: "cam".into(),
            timestep: 0,
            fusion_weight: 1.0,
        }
    }

    #[test]
    fn optical_axis_hits_principal_point() {
        let cam = simple_camera();
        let (uv, depth) = cam.project(Vec3::new(0.0, 0.0, 7.0));
        assert_eq!(depth, 7.0);
        assert!((uv.x - 50.0).abs() < 1e-12);
        assert!((uv.y - 50.0).abs() < 1e-12);
    }

    #[test]
    fn pinhole_arithmetic() {
        let cam = simple_camera();
        let (uv, _) = cam.project(Vec3::new(1.0, 0.0, 2.0));
        assert!((uv.x - 100.0).abs() < 1e-12);
        assert!((uv.y - 50.0).abs() < 1e-12);
    }

    #[test]
    fn back_project_roundtrip() {
        let mut cam = simple_camera();
        cam.rotation = Mat3::new(0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        cam.translation = Vec3::new(0.5, -2.0, 4.0);
        let p = Vec3::new(0.3, 1.2, 5.0);
        let (uv, depth) = cam.project(p);
        let q = cam.back_project(uv, depth);
        assert!(q.distance(p) < 1e-10);
    }

    #[test]
    fn non_orthogonal_rotation_rejected() {
        let mut cam = simple_camera();
        cam.rotation.m[0][1] = 0.1;
        let err = cam.validate().unwrap_err();
        assert!(err.to_string().contains(".R"));
    }

    #[test]
    fn center_is_inverse_translation() {
        let mut cam = simple_camera();
        cam.translation = Vec3::new(1.0, 2.0, 3.0);
        let c = cam.center();
        assert!(c.distance(Vec3::new(-1.0, -2.0, -3.0)) < 1e-12);
    }
}
