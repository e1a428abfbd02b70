use std::collections::HashMap;

use crate::math::Vec2;
use crate::scalar::Scalar;
use crate::scene::{CameraView, ImageBuf};

use super::PriorPointCloud;

/// Projects cloud points into a camera. Returns `(point index, pixel uv,
/// camera-frame depth)` for points with positive depth that land inside
/// the image; `uv` is continuous (before rounding).
pub fn project_points<T: Scalar>(
    cloud: &PriorPointCloud<T>,
    cam: &CameraView<T>,
) -> Vec<(usize, Vec2<T>, T)> {
    let mut out = Vec::new();
    for (i, p) in cloud.points.iter().enumerate() {
        let (uv, depth) = cam.project(p.position);
        if depth > T::zero() && cam.in_bounds(uv) {
            out.push((i, uv, depth));
        }
    }
    out
}

/// Assigns each point the bilinear color at its projection in the camera
/// whose image plane it is closest to, subject to per-pixel occlusion:
/// when several points round to the same pixel, only the nearest one is
/// matched there; the others fall back to their next-best camera.
pub fn colorize<T: Scalar>(
    mut cloud: PriorPointCloud<T>,
    views: &[(&CameraView<T>, &ImageBuf<T>)],
) -> PriorPointCloud<T> {
    // candidate (depth, camera slot, uv) per point, over cameras where the
    // point wins its rounded pixel
    let mut candidates: Vec<Vec<(T, usize, Vec2<T>)>> = vec![Vec::new(); cloud.len()];

    for (slot, (cam, _)) in views.iter().enumerate() {
        let projected = project_points(&cloud, cam);
        // nearest point per rounded pixel
        let mut winner: HashMap<(u32, u32), (usize, T, Vec2<T>)> = HashMap::new();
        for (idx, uv, depth) in projected {
            let key = (
                uv.x.to_f64_c().floor() as u32,
                uv.y.to_f64_c().floor() as u32,
            );
            match winner.get(&key) {
                Some(&(_, best, _)) if best <= depth => {}
                _ => {
                    winner.insert(key, (idx, depth, uv));
                }
            }
        }
        for (idx, depth, uv) in winner.into_values() {
            candidates[idx].push((depth, slot, uv));
        }
    }

    for (i, point) in cloud.points.iter_mut().enumerate() {
        let best = candidates[i]
            .iter()
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        if let Some(&(_, slot, uv)) = best {
            let (cam, img) = views[slot];
            point.color = Some(img.sample_bilinear(uv.x, uv.y));
            point.source_camera = Some(cam.camera_id.clone());
        }
    }
    cloud
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{Mat3, Vec3};
    use crate::prior::PriorPoint;

    fn camera_at(x: f64, id: &str) -> CameraView<f64> {
        CameraView {
            intrinsics: Mat3::new(100.0, 0.0, 50.0, 0.0, 100.0, 50.0, 0.0, 0.0, 1.0),
            rotation: Mat3::identity(),
            translation: Vec3::new(-x, 0.0, 0.0),
            width: 100,
            height: 100,
            camera_id: id.into(),
            timestep: 0,
            fusion_weight: 1.0,
        }
    }

    fn cloud_of(positions: Vec<Vec3<f64>>) -> PriorPointCloud<f64> {
        PriorPointCloud {
            points: positions
                .into_iter()
                .map(|p| PriorPoint {
                    position: p,
                    color: None,
                    source_camera: None,
                    timestep: 0,
                })
                .collect(),
            depth_range: (0.0, 1.0),
        }
    }

    #[test]
    fn axis_point_projects_to_principal_point() {
        let cloud = cloud_of(vec![Vec3::new(0.0, 0.0, 5.0)]);
        let cam = camera_at(0.0, "c");
        let proj = project_points(&cloud, &cam);
        assert_eq!(proj.len(), 1);
        assert!((proj[0].1.x - 50.0).abs() < 1e-12);
        assert!((proj[0].1.y - 50.0).abs() < 1e-12);
        assert!((proj[0].2 - 5.0).abs() < 1e-12);
    }

    #[test]
    fn behind_camera_excluded() {
        let cloud = cloud_of(vec![Vec3::new(0.0, 0.0, -5.0)]);
        let proj = project_points(&cloud, &camera_at(0.0, "c"));
        assert!(proj.is_empty());
    }

    #[test]
    fn pinhole_example() {
        let cloud = cloud_of(vec![Vec3::new(1.0, 0.0, 2.0)]);
        let mut cam = camera_at(0.0, "c");
        cam.width = 200;
        let proj = project_points(&cloud, &cam);
        assert_eq!(proj.len(), 1);
        assert!((proj[0].1.x - 100.0).abs() < 1e-12);
        assert!((proj[0].1.y - 50.0).abs() < 1e-12);
    }

    #[test]
    fn pixel_on_boundary_excluded() {
        // u = 100 is outside a 100-wide image
        let cloud = cloud_of(vec![Vec3::new(1.0, 0.0, 2.0)]);
        let proj = project_points(&cloud, &camera_at(0.0, "c"));
        assert!(proj.is_empty());
    }

    #[test]
    fn uniform_wall_colors_all_points_red() {
        let img = ImageBuf::filled(100, 100, Vec3::new(1.0, 0.0, 0.0));
        let cam = camera_at(0.0, "c");
        let cloud = cloud_of(vec![
            Vec3::new(0.0, 0.0, 4.0),
            Vec3::new(0.5, 0.5, 4.0),
            Vec3::new(-0.5, -0.3, 4.0),
        ]);
        let out = colorize(cloud, &[(&cam, &img)]);
        for p in &out.points {
            let c = p.color.unwrap();
            assert!(c.distance(Vec3::new(1.0, 0.0, 0.0)) < 1e-9);
        }
    }

    #[test]
    fn nearest_plane_camera_wins() {
        // two colocated-axis cameras at different depths to the point
        let img_near = ImageBuf::filled(100, 100, Vec3::new(0.0, 1.0, 0.0));
        let img_far = ImageBuf::filled(100, 100, Vec3::new(1.0, 0.0, 0.0));
        let near = camera_at(0.0, "near"); // depth 2 below
        let mut far = camera_at(0.0, "far"); // depth 5
        far.translation.z = -3.0; // moves camera back along -z? x_cam = x + T
        let cloud = cloud_of(vec![Vec3::new(0.0, 0.0, 5.0)]);
        // near camera: depth 5; far camera: depth 2
        let out = colorize(cloud, &[(&near, &img_near), (&far, &img_far)]);
        assert_eq!(out.points[0].source_camera.as_deref(), Some("far"));
        assert!(out.points[0].color.unwrap().x > 0.9);
    }

    #[test]
    fn occluded_point_falls_back_or_drops() {
        // both points project to the same pixel; only the nearer one may
        // take this camera's color
        let img = ImageBuf::filled(100, 100, Vec3::new(1.0, 1.0, 1.0));
        let cam = camera_at(0.0, "c");
        let cloud = cloud_of(vec![Vec3::new(0.0, 0.0, 2.0), Vec3::new(0.0, 0.0, 4.0)]);
        let out = colorize(cloud, &[(&cam, &img)]);
        assert!(out.points[0].color.is_some());
        assert!(out.points[1].color.is_none());
        let kept = out.drop_uncolored();
        assert_eq!(kept.len(), 1);
    }
}
