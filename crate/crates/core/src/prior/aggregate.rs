use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::scalar::Scalar;
use crate::scene::LidarSweep;

use super::{distance_to_polyline, PriorPoint, PriorPointCloud};

/// Stitches multi-frame sweeps into one world-frame cloud. The sensor
/// trajectory doubles as the ego polyline for the depth range.
pub fn aggregate_sweeps<T: Scalar>(sweeps: &[LidarSweep<T>]) -> Result<PriorPointCloud<T>> {
    if sweeps.is_empty() {
        return Err(Error::NoLidarData);
    }
    let mut ordered: Vec<&LidarSweep<T>> = sweeps.iter().collect();
    ordered.sort_by_key(|s| s.timestep);

    let polyline: Vec<Vec3<T>> = ordered.iter().map(|s| s.sensor_pose.translation).collect();

    let total: usize = ordered.iter().map(|s| s.points.len()).sum();
    let mut points = Vec::with_capacity(total);
    let mut dmin = T::infinity();
    let mut dmax = T::neg_infinity();
    for sweep in &ordered {
        for p in &sweep.points {
            let world = sweep.sensor_pose.apply(*p);
            let d = distance_to_polyline(world, &polyline);
            dmin = dmin.min(d);
            dmax = dmax.max(d);
            points.push(PriorPoint {
                position: world,
                color: None,
                source_camera: None,
                timestep: sweep.timestep,
            });
        }
    }
    if points.is_empty() {
        return Err(Error::NoLidarData);
    }
    Ok(PriorPointCloud {
        points,
        depth_range: (dmin, dmax),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{Mat3, Rigid};

    fn sweep(points: Vec<Vec3<f64>>, timestep: i64, pose: Rigid<f64>) -> LidarSweep<f64> {
        LidarSweep { points, timestep, sensor_pose: pose }
    }

    #[test]
    fn identity_poses_pass_points_through() {
        let pts: Vec<Vec3<f64>> = (0..100)
            .map(|i| Vec3::new(i as f64 * 0.1, 1.0, 2.0))
            .collect();
        let sweeps = vec![
            sweep(pts.clone(), 0, Rigid::identity()),
            sweep(pts.clone(), 1, Rigid::identity()),
        ];
        let cloud = aggregate_sweeps(&sweeps).unwrap();
        assert_eq!(cloud.len(), 200);
        assert!(cloud.points[0].position.distance(pts[0]) < 1e-12);
        assert!(cloud.points[100].position.distance(pts[0]) < 1e-12);
    }

    #[test]
    fn translation_shifts_points() {
        let pose = Rigid::new(Mat3::identity(), Vec3::new(10.0, 0.0, 0.0));
        let sweeps = vec![sweep(vec![Vec3::new(1.0, 2.0, 3.0)], 0, pose)];
        let cloud = aggregate_sweeps(&sweeps).unwrap();
        assert!(cloud.points[0].position.distance(Vec3::new(11.0, 2.0, 3.0)) < 1e-12);
    }

    #[test]
    fn empty_input_is_error() {
        assert!(matches!(
            aggregate_sweeps::<f64>(&[]),
            Err(Error::NoLidarData)
        ));
    }

    #[test]
    fn depth_range_spans_distances_to_trajectory() {
        let sweeps = vec![
            sweep(vec![Vec3::new(0.0, 2.0, 0.0)], 0, Rigid::identity()),
            sweep(
                vec![Vec3::new(10.0, 5.0, 0.0)],
                1,
                Rigid::new(Mat3::identity(), Vec3::new(10.0, 0.0, 0.0)),
            ),
        ];
        let cloud = aggregate_sweeps(&sweeps).unwrap();
        // second point lands at (20, 5, 0); trajectory is the segment
        // (0,0,0)-(10,0,0), so its distance is sqrt(100 + 25)
        assert!((cloud.depth_range.0 - 2.0).abs() < 1e-12);
        assert!((cloud.depth_range.1 - 125.0f64.sqrt()).abs() < 1e-12);
    }
}
