use crate::math::Vec2;
use crate::scalar::Scalar;
use crate::scene::{CameraView, Gaussian};

/// Multi-camera color fusion weights.
///
/// For every Gaussian observed by more than one camera of a timestep the
/// per-camera supervision weight is proportional to the inverse of the
/// Gaussian's camera-frame depth (the closer camera resolves it with more
/// pixels), normalized to sum one. Gaussians seen by a single camera get
/// weight one there. Returned as `[camera][gaussian]` weights; zero means
/// not observed.
pub fn fuse_multicam_color<T: Scalar>(
    gaussians: &[Gaussian<T>],
    cams: &[&CameraView<T>],
    near_clip: T,
) -> Vec<Vec<T>> {
    let mut weights: Vec<Vec<T>> = cams
        .iter()
        .map(|_| vec![T::zero(); gaussians.len()])
        .collect();
    for (gi, g) in gaussians.iter().enumerate() {
        let mut inv_depths: Vec<(usize, T)> = Vec::with_capacity(cams.len());
        for (ci, cam) in cams.iter().enumerate() {
            let t = cam.to_camera(g.position);
            if t.z <= near_clip {
                continue;
            }
            let uv = cam.project_camera_point(t);
            if cam.in_bounds(Vec2::new(uv.x, uv.y)) {
                inv_depths.push((ci, T::one() / t.z));
            }
        }
        match inv_depths.len() {
            0 => {}
            1 => weights[inv_depths[0].0][gi] = T::one(),
            _ => {
                let sum: T = inv_depths.iter().map(|&(_, w)| w).sum();
                for (ci, w) in inv_depths {
                    weights[ci][gi] = w / sum;
                }
            }
        }
    }
    weights
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{Mat3, Vec3};

    fn camera_at(z_shift: f64, id: &str) -> CameraView<f64> {
        CameraView {
            intrinsics: Mat3::new(60.0, 0.0, 32.0, 0.0, 60.0, 32.0, 0.0, 0.0, 1.0),
            rotation: Mat3::identity(),
            translation: Vec3::new(0.0, 0.0, z_shift),
            width: 64,
            height: 64,
            camera_id: id.into(),
            timestep: 0,
            fusion_weight: 1.0,
        }
    }

    fn gaussian_at(z: f64) -> Gaussian<f64> {
        Gaussian::isotropic(Vec3::new(0.0, 0.0, z), 0.1, Vec3::splat(0.5), 0.5)
    }

    #[test]
    fn equidistant_cameras_split_evenly() {
        let a = camera_at(0.0, "a");
        let b = camera_at(0.0, "b");
        let gs = vec![gaussian_at(4.0)];
        let w = fuse_multicam_color(&gs, &[&a, &b], 0.2);
        assert!((w[0][0] - 0.5).abs() < 1e-12);
        assert!((w[1][0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn inverse_depth_weighting() {
        // depths 2 m and 6 m -> weights 0.75 / 0.25
        let near = camera_at(0.0, "near");
        let far = camera_at(-4.0, "far"); // shifts camera back: depth 6... z + T
        let gs = vec![gaussian_at(6.0)];
        // near camera: depth 6; far camera: depth 2
        let w = fuse_multicam_color(&gs, &[&near, &far], 0.2);
        assert!((w[0][0] - 0.25).abs() < 1e-12, "depth-6 camera gets 1/6 share");
        assert!((w[1][0] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn single_visible_camera_gets_full_weight() {
        let a = camera_at(0.0, "a");
        let mut b = camera_at(0.0, "b");
        b.rotation = Mat3::new(-1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0); // faces away
        let gs = vec![gaussian_at(4.0)];
        let w = fuse_multicam_color(&gs, &[&a, &b], 0.2);
        assert_eq!(w[0][0], 1.0);
        assert_eq!(w[1][0], 0.0);
    }
}
