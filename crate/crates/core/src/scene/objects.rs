use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::math::{Quat, Rigid, Vec3};
use crate::scalar::Scalar;

use super::image::Mask;

/// One LiDAR sweep in the sensor frame plus its sensor-to-world pose.
#[derive(Clone, Debug)]
pub struct LidarSweep<T> {
    pub points: Vec<Vec3<T>>,
    pub timestep: i64,
    pub sensor_pose: Rigid<T>,
}

impl<T: Scalar> LidarSweep<T> {
    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::validation(
                    format!("lidar[t={}].points[{}]", self.timestep, i),
                    "coordinates must be finite",
                ));
            }
        }
        Ok(())
    }
}

/// Oriented bounding box of one object at one timestep.
#[derive(Clone, Debug)]
pub struct ObjectBox<T> {
    pub object_id: String,
    pub timestep: i64,
    /// Box center in world coordinates.
    pub center: Vec3<T>,
    pub half_extents: Vec3<T>,
    /// Yaw about world +z, then pitch about +y (radians).
    pub yaw: T,
    pub pitch: T,
    /// Optional per-camera masks, keyed by camera id.
    pub masks: HashMap<String, Mask>,
}

impl<T: Scalar> ObjectBox<T> {
    pub fn validate(&self) -> Result<()> {
        if self.half_extents.min_component() <= T::zero() {
            return Err(Error::validation(
                format!("object {}.half_extents", self.object_id),
                "must be strictly positive",
            ));
        }
        if !self.center.is_finite() {
            return Err(Error::validation(
                format!("object {}.center", self.object_id),
                "must be finite",
            ));
        }
        Ok(())
    }

    pub fn orientation(&self) -> Quat<T> {
        Quat::from_yaw_pitch(self.yaw, self.pitch)
    }

    /// Object-to-world rigid transform.
    pub fn pose(&self) -> Rigid<T> {
        Rigid::new(self.orientation().to_matrix(), self.center)
    }

    /// True when the world point lies inside the box inflated by `margin`.
    pub fn contains(&self, p: Vec3<T>, margin: T) -> bool {
        let local = self.pose().inverse().apply(p);
        local.x.abs() <= self.half_extents.x + margin
            && local.y.abs() <= self.half_extents.y + margin
            && local.z.abs() <= self.half_extents.z + margin
    }

    /// The eight world-space corners.
    pub fn corners(&self) -> [Vec3<T>; 8] {
        let pose = self.pose();
        let he = self.half_extents;
        let mut out = [Vec3::zero(); 8];
        let mut i = 0;
        for &sx in &[-T::one(), T::one()] {
            for &sy in &[-T::one(), T::one()] {
                for &sz in &[-T::one(), T::one()] {
                    out[i] = pose.apply(Vec3::new(sx * he.x, sy * he.y, sz * he.z));
                    i += 1;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn make_box() -> ObjectBox<f64> {
        ObjectBox {
            object_id: "car".into(),
            timestep: 0,
            center: Vec3::new(10.0, 0.0, 0.0),
            half_extents: Vec3::new(2.0, 1.0, 0.5),
            yaw: 0.0,
            pitch: 0.0,
            masks: HashMap::new(),
        }
    }

    #[test]
    fn contains_respects_margin() {
        let b = make_box();
        assert!(b.contains(Vec3::new(11.9, 0.0, 0.0), 0.0));
        assert!(!b.contains(Vec3::new(12.1, 0.0, 0.0), 0.0));
        assert!(b.contains(Vec3::new(12.05, 0.0, 0.0), 0.1));
    }

    #[test]
    fn yaw_rotates_box() {
        let mut b = make_box();
        b.yaw = FRAC_PI_2;
        // after 90 deg yaw the long axis points along +y
        assert!(b.contains(Vec3::new(10.0, 1.9, 0.0), 0.0));
        assert!(!b.contains(Vec3::new(11.5, 0.0, 0.0), 0.0));
    }

    #[test]
    fn degenerate_extent_rejected() {
        let mut b = make_box();
        b.half_extents.y = 0.0;
        assert!(b.validate().is_err());
    }
}
