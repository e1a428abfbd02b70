use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::scalar::Scalar;
use crate::scene::{CameraView, ObjectBox};

use super::kdtree::KdTree;
use super::{PriorPoint, PriorPointCloud};

/// Removes points that fall inside any object box (inflated by `margin`)
/// at the point's source timestep.
pub fn remove_dynamic_points<T: Scalar>(
    mut cloud: PriorPointCloud<T>,
    boxes: &[&ObjectBox<T>],
    margin: T,
) -> PriorPointCloud<T> {
    if boxes.is_empty() {
        return cloud;
    }
    cloud.points.retain(|p| {
        !boxes
            .iter()
            .any(|b| b.timestep == p.timestep && b.contains(p.position, margin))
    });
    cloud
}

/// Downsamples to at most one point per voxel: the centroid of member
/// positions, with colors averaged over colored members.
pub fn voxel_filter<T: Scalar>(
    cloud: PriorPointCloud<T>,
    voxel_size: T,
) -> Result<PriorPointCloud<T>> {
    if voxel_size <= T::zero() {
        return Err(Error::parameter("voxel_size", "must be positive"));
    }

    struct Cell<T> {
        pos_sum: Vec3<T>,
        count: usize,
        color_sum: Vec3<T>,
        color_count: usize,
        timestep: i64,
        source_camera: Option<String>,
    }

    let mut cells: BTreeMap<(i64, i64, i64), Cell<T>> = BTreeMap::new();
    for p in &cloud.points {
        let key = (
            (p.position.x / voxel_size).floor().to_f64_c() as i64,
            (p.position.y / voxel_size).floor().to_f64_c() as i64,
            (p.position.z / voxel_size).floor().to_f64_c() as i64,
        );
        let cell = cells.entry(key).or_insert_with(|| Cell {
            pos_sum: Vec3::zero(),
            count: 0,
            color_sum: Vec3::zero(),
            color_count: 0,
            timestep: p.timestep,
            source_camera: p.source_camera.clone(),
        });
        cell.pos_sum += p.position;
        cell.count += 1;
        if let Some(c) = p.color {
            cell.color_sum += c;
            cell.color_count += 1;
        }
        cell.timestep = cell.timestep.min(p.timestep);
    }

    let points = cells
        .into_values()
        .map(|cell| {
            let n = T::from_usize(cell.count).unwrap();
            PriorPoint {
                position: cell.pos_sum / n,
                color: (cell.color_count > 0)
                    .then(|| cell.color_sum / T::from_usize(cell.color_count).unwrap()),
                source_camera: cell.source_camera,
                timestep: cell.timestep,
            }
        })
        .collect();

    Ok(PriorPointCloud {
        points,
        depth_range: cloud.depth_range,
    })
}

/// Removes isolated far points. Points whose depth (distance to the
/// nearest camera center) exceeds the median are dropped when their mean
/// k-NN distance exceeds `mean + sigma_scale * stddev` of that statistic
/// over the far set; near points pass unchanged.
pub fn adaptive_depth_filter<T: Scalar>(
    cloud: PriorPointCloud<T>,
    cams: &[&CameraView<T>],
    k_neighbors: usize,
    sigma_scale: T,
) -> Result<PriorPointCloud<T>> {
    if cloud.is_empty() {
        return Err(Error::EmptyPrior);
    }
    if k_neighbors >= cloud.len() {
        return Err(Error::parameter(
            "k_neighbors",
            format!("{} must be below the point count {}", k_neighbors, cloud.len()),
        ));
    }

    let centers: Vec<Vec3<T>> = cams.iter().map(|c| c.center()).collect();
    let depth_of = |p: Vec3<T>| -> T {
        let mut best = T::infinity();
        for c in &centers {
            best = best.min(p.distance(*c));
        }
        best
    };

    let depths: Vec<T> = cloud.points.iter().map(|p| depth_of(p.position)).collect();
    let mut sorted = depths.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let median = sorted[sorted.len() / 2];

    let far: Vec<usize> = (0..cloud.len()).filter(|&i| depths[i] > median).collect();
    if far.is_empty() {
        return Ok(cloud);
    }

    let tree = KdTree::build(cloud.positions());
    let knn_mean: Vec<T> = far
        .iter()
        .map(|&i| {
            let nn = tree.knn(cloud.points[i].position, k_neighbors, Some(i));
            let sum: T = nn.iter().map(|&(_, d2)| d2.sqrt()).sum();
            sum / T::from_usize(nn.len().max(1)).unwrap()
        })
        .collect();

    let n = T::from_usize(knn_mean.len()).unwrap();
    let mean = knn_mean.iter().copied().sum::<T>() / n;
    let var = knn_mean.iter().map(|&m| (m - mean) * (m - mean)).sum::<T>() / n;
    let threshold = mean + sigma_scale * var.sqrt();

    let mut drop = vec![false; cloud.len()];
    for (slot, &i) in far.iter().enumerate() {
        if knn_mean[slot] > threshold {
            drop[i] = true;
        }
    }

    let points = cloud
        .points
        .into_iter()
        .enumerate()
        .filter_map(|(i, p)| (!drop[i]).then_some(p))
        .collect();
    Ok(PriorPointCloud {
        points,
        depth_range: cloud.depth_range,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Mat3;
    use std::collections::HashMap;

    fn cloud_of(positions: Vec<Vec3<f64>>) -> PriorPointCloud<f64> {
        PriorPointCloud {
            points: positions
                .into_iter()
                .map(|p| PriorPoint {
                    position: p,
                    color: Some(Vec3::splat(0.5)),
                    source_camera: None,
                    timestep: 0,
                })
                .collect(),
            depth_range: (0.0, 10.0),
        }
    }

    fn axis_box(center: Vec3<f64>, he: Vec3<f64>) -> ObjectBox<f64> {
        ObjectBox {
            object_id: "o".into(),
            timestep: 0,
            center,
            half_extents: he,
            yaw: 0.0,
            pitch: 0.0,
            masks: HashMap::new(),
        }
    }

    #[test]
    fn no_boxes_is_identity() {
        let cloud = cloud_of(vec![Vec3::new(1.0, 2.0, 3.0)]);
        let out = remove_dynamic_points(cloud, &[], 0.1);
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn enclosing_box_empties_cloud() {
        let cloud = cloud_of(vec![Vec3::zero(), Vec3::new(0.5, 0.0, 0.0)]);
        let b = axis_box(Vec3::zero(), Vec3::splat(10.0));
        let out = remove_dynamic_points(cloud, &[&b], 0.1);
        assert_eq!(out.len(), 0);
    }

    #[test]
    fn half_covering_box_keeps_outside_half() {
        // points on a line x = -4.5..4.5; box covers x < 0
        let pts: Vec<Vec3<f64>> = (0..10)
            .map(|i| Vec3::new(-4.5 + i as f64, 0.0, 0.0))
            .collect();
        let cloud = cloud_of(pts);
        let b = axis_box(Vec3::new(-2.5, 0.0, 0.0), Vec3::new(2.5, 1.0, 1.0));
        let out = remove_dynamic_points(cloud, &[&b], 0.0);
        assert_eq!(out.len(), 5);
        assert!(out.points.iter().all(|p| p.position.x > 0.0));
    }

    #[test]
    fn box_at_other_timestep_ignored() {
        let cloud = cloud_of(vec![Vec3::zero()]);
        let mut b = axis_box(Vec3::zero(), Vec3::splat(1.0));
        b.timestep = 5;
        let out = remove_dynamic_points(cloud, &[&b], 0.1);
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn voxel_collapses_to_centroid() {
        let cloud = cloud_of(vec![
            Vec3::new(0.1, 0.1, 0.1),
            Vec3::new(0.2, 0.2, 0.2),
            Vec3::new(0.3, 0.3, 0.3),
        ]);
        let out = voxel_filter(cloud, 1.0).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out.points[0].position.distance(Vec3::splat(0.2)) < 1e-12);
    }

    #[test]
    fn spaced_grid_passes_through() {
        let pts: Vec<Vec3<f64>> = (0..27)
            .map(|i| {
                Vec3::new(
                    (i % 3) as f64 + 0.5,
                    ((i / 3) % 3) as f64 + 0.5,
                    (i / 9) as f64 + 0.5,
                )
            })
            .collect();
        let out = voxel_filter(cloud_of(pts.clone()), 1.0).unwrap();
        assert_eq!(out.len(), 27);
    }

    #[test]
    fn voxel_filter_is_idempotent() {
        let pts: Vec<Vec3<f64>> = (0..200)
            .map(|i| {
                let f = i as f64;
                Vec3::new((f * 0.37).sin() * 5.0, (f * 0.73).cos() * 5.0, f * 0.01)
            })
            .collect();
        let once = voxel_filter(cloud_of(pts), 0.5).unwrap();
        let twice = voxel_filter(once.clone(), 0.5).unwrap();
        assert_eq!(once.len(), twice.len());
        for (a, b) in once.points.iter().zip(twice.points.iter()) {
            assert!(a.position.distance(b.position) < 1e-12);
        }
    }

    #[test]
    fn non_positive_voxel_size_rejected() {
        let cloud = cloud_of(vec![Vec3::zero()]);
        assert!(voxel_filter(cloud, 0.0).is_err());
    }

    fn camera_at_origin() -> CameraView<f64> {
        CameraView {
            intrinsics: Mat3::new(100.0, 0.0, 50.0, 0.0, 100.0, 50.0, 0.0, 0.0, 1.0),
            rotation: Mat3::identity(),
            translation: Vec3::zero(),
            width: 100,
            height: 100,
            camera_id: "c".into(),
            timestep: 0,
            fusion_weight: 1.0,
        }
    }

    #[test]
    fn uniform_far_cloud_unchanged() {
        // near grid plus a far ring; by symmetry every ring point has the
        // same k-NN statistic, so none can exceed mean + sigma * stddev
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                pts.push(Vec3::new(i as f64 * 0.2, j as f64 * 0.2, 4.0));
            }
        }
        for i in 0..100 {
            let theta = i as f64 / 100.0 * std::f64::consts::TAU;
            pts.push(Vec3::new(1.0 + 2.0 * theta.cos(), 2.0 * theta.sin(), 20.0));
        }
        let cam = camera_at_origin();
        let n = pts.len();
        let out = adaptive_depth_filter(cloud_of(pts), &[&cam], 4, 2.0).unwrap();
        assert_eq!(out.len(), n);
    }

    #[test]
    fn isolated_far_point_removed() {
        let mut pts = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                pts.push(Vec3::new(i as f64 * 0.2, j as f64 * 0.2, 4.0));
                pts.push(Vec3::new(i as f64 * 0.2, j as f64 * 0.2, 20.0));
            }
        }
        pts.push(Vec3::new(100.0, 100.0, 100.0));
        let cam = camera_at_origin();
        let n = pts.len();
        let out = adaptive_depth_filter(cloud_of(pts), &[&cam], 4, 2.0).unwrap();
        assert_eq!(out.len(), n - 1);
        assert!(out
            .points
            .iter()
            .all(|p| p.position.distance(Vec3::splat(100.0)) > 1.0));
    }

    #[test]
    fn k_too_large_rejected() {
        let cloud = cloud_of(vec![Vec3::zero(), Vec3::new(1.0, 0.0, 0.0)]);
        let cam = camera_at_origin();
        assert!(adaptive_depth_filter(cloud, &[&cam], 2, 2.0).is_err());
    }
}
