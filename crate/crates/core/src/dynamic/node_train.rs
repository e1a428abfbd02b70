use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::losses::LossConfig;
use crate::math::Vec3;
use crate::optim::TrainConfig;
use crate::raster::RenderSettings;
use crate::scalar::{sc, Scalar};
use crate::scene::{Gaussian, SceneDataset};
use crate::train::{FitOptions, FitView, Fitter};

use super::extract::{extract_object_views, ObjectView};
use super::node::DynamicNode;

/// Minimum object views required for a node fit.
pub const MIN_OBJECT_VIEWS: usize = 2;

/// Random initialization inside the canonical box.
fn random_node_gaussians<T: Scalar>(
    half_extents: Vec3<T>,
    count: usize,
    rng: &mut ChaCha12Rng,
) -> Vec<Gaussian<T>> {
    let diag = half_extents.norm().to_f64_c();
    // neighbor spacing for a uniform box sample, used as initial scale
    let volume = 8.0 * half_extents.x.to_f64_c() * half_extents.y.to_f64_c() * half_extents.z.to_f64_c();
    let spacing = (volume / count.max(1) as f64).cbrt().clamp(1e-3, diag);
    (0..count)
        .map(|_| {
            let p = Vec3::new(
                sc::<T>(rng.gen_range(-1.0..1.0)) * half_extents.x,
                sc::<T>(rng.gen_range(-1.0..1.0)) * half_extents.y,
                sc::<T>(rng.gen_range(-1.0..1.0)) * half_extents.z,
            );
            Gaussian::isotropic(p, sc(spacing), Vec3::splat(sc(0.5)), sc(0.1))
        })
        .collect()
}

/// Fits one dynamic node from its masked object views: random in-box
/// initialization, optimized in the canonical frame on masked pixels
/// only, position learning rate on the dynamic schedule.
pub fn train_node<T: Scalar>(
    dataset: &SceneDataset<T>,
    object_id: &str,
    cfg: &TrainConfig,
    loss_cfg: &LossConfig<T>,
    settings: &RenderSettings<T>,
    iters: usize,
    seed: u64,
) -> Result<DynamicNode<T>> {
    let views = extract_object_views(dataset, object_id)?;
    train_node_from_views(dataset, object_id, &views, cfg, loss_cfg, settings, iters, seed)
}

#[allow(clippy::too_many_arguments)]
pub fn train_node_from_views<T: Scalar>(
    dataset: &SceneDataset<T>,
    object_id: &str,
    views: &[ObjectView<T>],
    cfg: &TrainConfig,
    loss_cfg: &LossConfig<T>,
    settings: &RenderSettings<T>,
    iters: usize,
    seed: u64,
) -> Result<DynamicNode<T>> {
    if views.len() < MIN_OBJECT_VIEWS {
        return Err(Error::InsufficientObjectViews {
            got: views.len(),
            need: MIN_OBJECT_VIEWS,
        });
    }
    let boxes = dataset.boxes_for(object_id);
    let half_extents = boxes[0].half_extents;

    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x6f13);
    let init = random_node_gaussians(half_extents, cfg.dynamic_init_points, &mut rng);

    let mut loss_cfg = loss_cfg.clone();
    loss_cfg.lambda_lidar = T::zero(); // geometric prior does not apply in the box frame
    if loss_cfg.lambda_tssim == T::zero() && loss_cfg.lambda_robust == T::zero() {
        loss_cfg.lambda_robust = T::one();
    }

    let extent = half_extents.norm() * sc::<T>(2.0);
    let mut node_cfg = cfg.clone();
    // object-scale pruning: the world-size cap measures against the box
    node_cfg.world_size_cap_factor = cfg.world_size_cap_factor.max(0.5);
    node_cfg.total_iters = iters.max(1);

    let mut fitter = Fitter::new(
        init,
        node_cfg.clone(),
        loss_cfg,
        settings.clone(),
        extent,
        {
            // dynamic schedule spans this node's own iteration budget
            let mut s = node_cfg.dynamic_schedule::<T>();
            s.steps = iters.max(1);
            s
        },
        seed,
    );

    let fit_views: Vec<FitView<T>> = views
        .iter()
        .map(|v| FitView {
            camera: v.camera.clone(),
            target: v.target.clone(),
            mask: Some(v.mask.clone()),
        })
        .collect();

    let fit_opts = FitOptions {
        iters,
        densify: true,
        opacity_reset: cfg.reset_opacity_on_nodes,
        multicam_fusion: false,
        frozen_below: 0,
        bound_half_extents: Some(half_extents),
        eval_every: 0,
    };
    fitter.run(&fit_views, &fit_opts, |_, _| {})?;

    let first_t = boxes[0].timestep;
    let d_ref = views
        .iter()
        .filter(|v| v.timestep == first_t)
        .map(|v| v.distance)
        .fold(T::infinity(), T::min);

    let mut node = DynamicNode {
        object_id: object_id.to_string(),
        gaussians: fitter.gaussians,
        poses: boxes.iter().map(|b| (b.timestep, b.pose())).collect(),
        half_extents,
        d_ref: d_ref.is_finite().then_some(d_ref),
        hold_single_pose: false,
    };
    node.prune_to_bounds();
    Ok(node)
}
