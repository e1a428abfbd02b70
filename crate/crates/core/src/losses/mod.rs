//! The three training losses and their gradients: tile structural
//! similarity, power-law robust photometric error, and nearest-point
//! LiDAR position supervision.

mod lidar;
mod robust;
pub mod ssim;
mod tssim;

pub use lidar::{lidar_loss, lidar_loss_with_tree};
pub use robust::{robust_kernel, robust_loss};
pub use tssim::tssim_loss;

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::prior::{KdTree, PriorPointCloud};
use crate::scalar::{sc, Scalar};
use crate::scene::{Gaussian, ImageBuf};

/// Loss weights and kernel constants.
#[derive(Clone, Debug)]
pub struct LossConfig<T> {
    /// Edge length of the SSIM tiles (pixels).
    pub tssim_tile: usize,
    /// Shape parameter of the robust kernel, in (0, 1].
    pub kappa: T,
    pub lambda_tssim: T,
    pub lambda_robust: T,
    pub lambda_lidar: T,
    /// SSIM stabilization constants.
    pub c1: T,
    pub c2: T,
}

impl<T: Scalar> Default for LossConfig<T> {
    fn default() -> Self {
        Self {
            tssim_tile: 32,
            kappa: sc(0.5),
            lambda_tssim: sc(0.2),
            lambda_robust: sc(0.8),
            lambda_lidar: sc(0.1),
            c1: sc(0.01 * 0.01),
            c2: sc(0.03 * 0.03),
        }
    }
}

impl<T: Scalar> LossConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.kappa <= T::zero() || self.kappa > T::one() {
            return Err(Error::parameter("kappa", "must lie in (0, 1]"));
        }
        let weights = [self.lambda_tssim, self.lambda_robust, self.lambda_lidar];
        if weights.iter().any(|w| *w < T::zero()) {
            return Err(Error::parameter("lambda", "weights must be non-negative"));
        }
        if weights.iter().all(|w| *w == T::zero()) {
            return Err(Error::parameter("lambda", "at least one weight must be positive"));
        }
        Ok(())
    }
}

/// Value and gradients of the weighted total loss.
#[derive(Clone, Debug)]
pub struct TotalLoss<T> {
    pub total: T,
    pub tssim: T,
    pub robust: T,
    pub lidar: T,
    /// Weighted gradient with respect to the rendered image.
    pub image_grad: ImageBuf<T>,
    /// Weighted gradient with respect to each Gaussian position.
    pub position_grads: Vec<Vec3<T>>,
}

/// Weighted sum of the three losses. Image-space gradients flow through
/// the renderer's backward pass; position gradients add directly.
pub fn total_loss<T: Scalar>(
    rendered: &ImageBuf<T>,
    target: &ImageBuf<T>,
    gaussians: &[Gaussian<T>],
    prior: Option<&PriorPointCloud<T>>,
    cfg: &LossConfig<T>,
) -> Result<TotalLoss<T>> {
    let tree = match prior {
        Some(p) if cfg.lambda_lidar > T::zero() => {
            if p.is_empty() {
                return Err(Error::EmptyPrior);
            }
            Some(KdTree::build(p.positions()))
        }
        _ => None,
    };
    total_loss_with_tree(rendered, target, gaussians, tree.as_ref(), cfg)
}

/// Variant taking a prebuilt nearest-neighbor tree over the prior.
pub fn total_loss_with_tree<T: Scalar>(
    rendered: &ImageBuf<T>,
    target: &ImageBuf<T>,
    gaussians: &[Gaussian<T>],
    tree: Option<&KdTree<T>>,
    cfg: &LossConfig<T>,
) -> Result<TotalLoss<T>> {
    cfg.validate()?;

    let mut image_grad = ImageBuf::new(rendered.width, rendered.height);
    let mut total = T::zero();

    let mut tssim = T::zero();
    if cfg.lambda_tssim > T::zero() {
        let (l, g) = tssim_loss(rendered, target, cfg)?;
        tssim = l;
        total += cfg.lambda_tssim * l;
        for (o, v) in image_grad.data.iter_mut().zip(g.data.iter()) {
            *o += cfg.lambda_tssim * *v;
        }
    }

    let mut robust = T::zero();
    if cfg.lambda_robust > T::zero() {
        let (l, g) = robust_loss(rendered, target, cfg)?;
        robust = l;
        total += cfg.lambda_robust * l;
        for (o, v) in image_grad.data.iter_mut().zip(g.data.iter()) {
            *o += cfg.lambda_robust * *v;
        }
    }

    let mut lidar = T::zero();
    let mut position_grads = vec![Vec3::zero(); gaussians.len()];
    if cfg.lambda_lidar > T::zero() {
        let tree = tree.ok_or(Error::EmptyPrior)?;
        let (l, g) = lidar_loss_with_tree(gaussians, tree);
        lidar = l;
        total += cfg.lambda_lidar * l;
        for (o, v) in position_grads.iter_mut().zip(g.iter()) {
            *o += *v * cfg.lambda_lidar;
        }
    }

    Ok(TotalLoss {
        total,
        tssim,
        robust,
        lidar,
        image_grad,
        position_grads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::PriorPoint;

    fn textured(w: usize, h: usize, phase: f64) -> ImageBuf<f64> {
        let mut img = ImageBuf::new(w, h);
        for y in 0..h {
            for x in 0..w {
                let v = ((x as f64 * 0.9 + phase).sin() * 0.25 + 0.5).clamp(0.0, 1.0);
                img.set(x, y, Vec3::new(v, 1.0 - v, v * 0.5));
            }
        }
        img
    }

    fn prior_of(positions: Vec<Vec3<f64>>) -> PriorPointCloud<f64> {
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
    fn robust_only_identical_images_hit_floor() {
        let img = textured(8, 8, 0.0);
        let cfg = LossConfig {
            lambda_tssim: 0.0,
            lambda_robust: 1.0,
            lambda_lidar: 0.0,
            ..LossConfig::default()
        };
        let out = total_loss(&img, &img.clone(), &[], None, &cfg).unwrap();
        let floor = (1e-6f64).powf(cfg.kappa * 0.5);
        assert!((out.total - floor).abs() < 1e-12);
    }

    #[test]
    fn tssim_only_equals_component() {
        let a = textured(16, 16, 0.3);
        let b = textured(16, 16, 1.1);
        let cfg = LossConfig {
            lambda_tssim: 1.0,
            lambda_robust: 0.0,
            lambda_lidar: 0.0,
            ..LossConfig::default()
        };
        let out = total_loss(&a, &b, &[], None, &cfg).unwrap();
        let (l, _) = tssim_loss(&a, &b, &cfg).unwrap();
        assert_eq!(out.total, l);
    }

    #[test]
    fn total_is_weighted_sum_of_components() {
        let a = textured(16, 16, 0.0);
        let b = textured(16, 16, 0.8);
        let gs = vec![Gaussian::isotropic(
            Vec3::new(0.4, 0.0, 0.0),
            0.1,
            Vec3::splat(0.5),
            0.5,
        )];
        let prior = prior_of(vec![Vec3::zero()]);
        let cfg = LossConfig::default();
        let out = total_loss(&a, &b, &gs, Some(&prior), &cfg).unwrap();
        let expect =
            cfg.lambda_tssim * out.tssim + cfg.lambda_robust * out.robust + cfg.lambda_lidar * out.lidar;
        assert!((out.total - expect).abs() < 1e-12);

        // gradients are the weighted sums of component gradients
        let (_, gt) = tssim_loss(&a, &b, &cfg).unwrap();
        let (_, gr) = robust_loss(&a, &b, &cfg).unwrap();
        for i in 0..out.image_grad.data.len() {
            let expect = cfg.lambda_tssim * gt.data[i] + cfg.lambda_robust * gr.data[i];
            assert!((out.image_grad.data[i] - expect).abs() < 1e-12);
        }
        let (_, gl) = lidar_loss(&gs, &prior).unwrap();
        assert!(out.position_grads[0].distance(gl[0] * cfg.lambda_lidar) < 1e-15);
    }

    #[test]
    fn empty_prior_with_lidar_weight_is_error() {
        let a = textured(4, 4, 0.0);
        let cfg = LossConfig::default();
        let err = total_loss(&a, &a.clone(), &[], Some(&prior_of(vec![])), &cfg).unwrap_err();
        assert!(matches!(err, Error::EmptyPrior));
    }

    #[test]
    fn config_validation() {
        let mut cfg = LossConfig::<f64>::default();
        cfg.kappa = 0.0;
        assert!(cfg.validate().is_err());
        cfg.kappa = 1.0;
        assert!(cfg.validate().is_ok());
        cfg.lambda_tssim = 0.0;
        cfg.lambda_robust = 0.0;
        cfg.lambda_lidar = 0.0;
        assert!(cfg.validate().is_err());
    }
}
