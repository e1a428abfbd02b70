use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::scalar::{sc, Scalar};
use crate::scene::Gaussian;

use super::kdtree::KdTree;
use super::PriorPointCloud;

const MIN_POINTS: usize = 4;
const INITIAL_OPACITY: f64 = 0.1;
const SCALE_CLAMP: (f64, f64) = (1e-3, 5.0);

/// One Gaussian per prior point: DC color from the point color, isotropic
/// scale set to the distance to the 3rd nearest neighbor (clamped),
/// identity rotation, low initial opacity.
pub fn init_gaussians<T: Scalar>(cloud: &PriorPointCloud<T>) -> Result<Vec<Gaussian<T>>> {
    if cloud.len() < MIN_POINTS {
        return Err(Error::InsufficientPriorPoints {
            got: cloud.len(),
            need: MIN_POINTS,
        });
    }
    let tree = KdTree::build(cloud.positions());
    let lo = sc::<T>(SCALE_CLAMP.0);
    let hi = sc::<T>(SCALE_CLAMP.1);
    let opacity = sc::<T>(INITIAL_OPACITY);
    let gray = Vec3::splat(sc::<T>(0.5));

    let gaussians = cloud
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let nn = tree.knn(p.position, 3, Some(i));
            let third = nn.last().map(|&(_, d2)| d2.sqrt()).unwrap_or(lo);
            let scale = third.max(lo).min(hi);
            Gaussian::isotropic(p.position, scale, p.color.unwrap_or(gray), opacity)
        })
        .collect();
    Ok(gaussians)
}
