//! LiDAR prior: the colored, filtered static point cloud used to
//! initialize Gaussians and supervise their positions.

mod aggregate;
mod colorize;
mod filter;
mod init;
pub mod kdtree;

pub use aggregate::aggregate_sweeps;
pub use colorize::{colorize, project_points};
pub use filter::{adaptive_depth_filter, remove_dynamic_points, voxel_filter};
pub use init::init_gaussians;
pub use kdtree::KdTree;

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::scalar::{sc, Scalar};
use crate::scene::{CameraView, ImageBuf, ObjectBox, SceneDataset};

/// One prior point: world position, optional sampled color, the camera it
/// was colorized from, and the sweep timestep it came from.
#[derive(Clone, Debug)]
pub struct PriorPoint<T> {
    pub position: Vec3<T>,
    pub color: Option<Vec3<T>>,
    pub source_camera: Option<String>,
    pub timestep: i64,
}

/// Aggregated static point cloud in the world frame.
#[derive(Clone, Debug)]
pub struct PriorPointCloud<T> {
    pub points: Vec<PriorPoint<T>>,
    /// Min/max distance of points from the ego trajectory polyline.
    pub depth_range: (T, T),
}

impl<T: Scalar> PriorPointCloud<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn positions(&self) -> Vec<Vec3<T>> {
        self.points.iter().map(|p| p.position).collect()
    }

    /// Drops points that were never assigned a color.
    pub fn drop_uncolored(mut self) -> Self {
        self.points.retain(|p| p.color.is_some());
        self
    }
}

/// Settings for the full prior-building pipeline.
#[derive(Clone, Debug)]
pub struct PriorSettings<T> {
    /// Inflation margin for dynamic-box removal (meters).
    pub box_margin: T,
    /// Voxel size for downsampling; `None` skips the voxel filter.
    pub voxel_size: Option<T>,
    /// `(k_neighbors, sigma_scale)` for adaptive outlier removal; `None`
    /// skips the stage.
    pub adaptive: Option<(usize, T)>,
    /// Drop points not visible in any camera after colorization.
    pub drop_uncolored: bool,
}

impl<T: Scalar> Default for PriorSettings<T> {
    fn default() -> Self {
        Self {
            box_margin: sc(0.1),
            voxel_size: Some(sc(0.15)),
            adaptive: Some((8, sc(2.0))),
            drop_uncolored: true,
        }
    }
}

/// Runs the full prior pipeline: aggregate, remove dynamic points,
/// colorize from training views, voxel-downsample, adaptive filter.
pub fn build_prior<T: Scalar>(
    dataset: &SceneDataset<T>,
    settings: &PriorSettings<T>,
) -> Result<PriorPointCloud<T>> {
    let cloud = aggregate_sweeps(&dataset.sweeps)?;
    let boxes: Vec<&ObjectBox<T>> = dataset.boxes.iter().collect();
    let cloud = remove_dynamic_points(cloud, &boxes, settings.box_margin);

    let train: Vec<(&CameraView<T>, &ImageBuf<T>)> = dataset
        .train_views()
        .into_iter()
        .map(|v| (&v.camera, &v.image))
        .collect();
    let mut cloud = colorize(cloud, &train);
    if settings.drop_uncolored {
        cloud = cloud.drop_uncolored();
    }
    if cloud.is_empty() {
        return Err(Error::EmptyPrior);
    }

    if let Some(size) = settings.voxel_size {
        cloud = voxel_filter(cloud, size)?;
    }
    if let Some((k, sigma)) = settings.adaptive {
        let cams: Vec<&CameraView<T>> = dataset.views.iter().map(|v| &v.camera).collect();
        if k < cloud.len() {
            cloud = adaptive_depth_filter(cloud, &cams, k, sigma)?;
        }
    }
    Ok(cloud)
}

/// Distance from a point to a polyline (ego trajectory).
pub(crate) fn distance_to_polyline<T: Scalar>(p: Vec3<T>, polyline: &[Vec3<T>]) -> T {
    match polyline.len() {
        0 => T::zero(),
        1 => p.distance(polyline[0]),
        _ => {
            let mut best = T::infinity();
            for seg in polyline.windows(2) {
                best = best.min(distance_to_segment(p, seg[0], seg[1]));
            }
            best
        }
    }
}

fn distance_to_segment<T: Scalar>(p: Vec3<T>, a: Vec3<T>, b: Vec3<T>) -> T {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == T::zero() {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len_sq).max(T::zero()).min(T::one());
    p.distance(a + ab * t)
}
