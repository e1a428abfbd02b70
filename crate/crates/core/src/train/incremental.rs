use std::collections::HashMap;

use crate::dynamic::project_box_mask;
use crate::error::{Error, Result};
use crate::losses::LossConfig;
use crate::optim::TrainConfig;
use crate::prior::{init_gaussians, PriorPoint, PriorPointCloud};
use crate::raster::RenderSettings;
use crate::scalar::{sc, Scalar};
use crate::scene::{Gaussian, Mask, SceneDataset, SceneView};

use super::bins::BinSchedule;
use super::{FitOptions, FitView, Fitter};

/// Inflation applied to projected boxes when masking dynamic pixels out
/// of static supervision.
const BOX_MASK_INFLATE: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct StaticOptions {
    /// Total iterations across all bins (split by view share).
    pub iters: usize,
    /// Keep previous-bin Gaussians frozen while training later bins.
    pub frozen_prev: bool,
    pub multicam_fusion: bool,
    pub seed: u64,
    pub eval_every: usize,
    /// Attach the LiDAR position loss (requires a non-empty prior).
    pub use_lidar_loss: bool,
    /// Exclude dynamic-object pixels from supervision.
    pub mask_dynamic: bool,
}

impl Default for StaticOptions {
    fn default() -> Self {
        Self {
            iters: 0, // 0 = use TrainConfig::total_iters
            frozen_prev: false,
            multicam_fusion: true,
            seed: 0,
            eval_every: 0,
            use_lidar_loss: true,
            mask_dynamic: true,
        }
    }
}

pub struct StaticOutcome<T> {
    pub fitter: Fitter<T>,
    /// Gaussian count after each bin.
    pub per_bin_counts: Vec<usize>,
}

/// Supervision mask for one view: everything except dynamic-object
/// pixels (dataset masks when present, else projected 10%-inflated box
/// hulls). `None` when the view sees no objects.
pub fn build_static_masks<T: Scalar>(
    dataset: &SceneDataset<T>,
    view: &SceneView<T>,
) -> Option<Mask> {
    let boxes = dataset.boxes_at(view.camera.timestep);
    if boxes.is_empty() {
        return None;
    }
    let w = view.image.width;
    let h = view.image.height;
    let mut mask = Mask::new(w, h, true);
    let mut touched = false;
    for b in boxes {
        let object_mask = match b.masks.get(&view.camera.camera_id) {
            Some(m) => Some(m.clone()),
            None => project_box_mask(b, &view.camera, sc(BOX_MASK_INFLATE)),
        };
        if let Some(om) = object_mask {
            for y in 0..h {
                for x in 0..w {
                    if om.get(x, y) {
                        mask.set(x, y, false);
                        touched = true;
                    }
                }
            }
        }
    }
    touched.then_some(mask)
}

fn subset_cloud<T: Scalar>(cloud: &PriorPointCloud<T>, idx: &[usize]) -> PriorPointCloud<T> {
    PriorPointCloud {
        points: idx.iter().map(|&i| cloud.points[i].clone()).collect::<Vec<PriorPoint<T>>>(),
        depth_range: cloud.depth_range,
    }
}

/// Incremental static training: bins are trained strictly in order, each
/// initialized from the prior points of its newly covered region, and
/// supervised by its own views plus the previous bin's overlap views.
#[allow(clippy::too_many_arguments)]
pub fn train_static<T: Scalar>(
    dataset: &SceneDataset<T>,
    prior: &PriorPointCloud<T>,
    schedule: &BinSchedule<T>,
    cfg: TrainConfig,
    loss_cfg: LossConfig<T>,
    settings: RenderSettings<T>,
    opts: &StaticOptions,
    mut on_bin: impl FnMut(usize, &Fitter<T>),
    mut on_eval: impl FnMut(usize, &[Gaussian<T>]),
) -> Result<StaticOutcome<T>> {
    let total_iters = if opts.iters > 0 { opts.iters } else { cfg.total_iters };
    let extent = dataset.camera_extent();

    // per-bin view lists: own timesteps plus the previous bin's overlap
    // tail, train split only, with dynamic pixels masked out
    let arc_of: HashMap<i64, T> = schedule.arc_by_timestep.iter().copied().collect();
    let mut bin_views: Vec<Vec<FitView<T>>> = Vec::with_capacity(schedule.len());
    for (bi, bin) in schedule.bins.iter().enumerate() {
        let mut timesteps: Vec<i64> = bin.timesteps.clone();
        if bi > 0 {
            if let Some((lo, hi)) = schedule.bins[bi - 1].overlap_with_next {
                for &t in &schedule.bins[bi - 1].timesteps {
                    let a = arc_of[&t];
                    if a >= lo && a <= hi {
                        timesteps.push(t);
                    }
                }
            }
        }
        let mut views = Vec::new();
        for v in dataset.train_views() {
            if timesteps.contains(&v.camera.timestep) {
                views.push(FitView {
                    camera: v.camera.clone(),
                    target: v.image.clone(),
                    mask: opts.mask_dynamic.then(|| build_static_masks(dataset, v)).flatten(),
                });
            }
        }
        if views.is_empty() {
            return Err(Error::EmptyBin { index: bi });
        }
        bin_views.push(views);
    }
    let total_views: usize = bin_views.iter().map(|v| v.len()).sum();

    // first bin: prior points of its (extended) interval
    let point_parts = schedule.partition_prior_points(prior);
    let first = subset_cloud(prior, &point_parts[0]);
    if first.len() < 4 {
        return Err(Error::InsufficientPriorPoints { got: first.len(), need: 4 });
    }
    let init = init_gaussians(&first)?;

    let mut fitter = Fitter::new(
        init,
        cfg.clone(),
        loss_cfg,
        settings,
        extent,
        cfg.static_schedule::<T>(extent),
        opts.seed,
    );
    if opts.use_lidar_loss && fitter.loss_cfg.lambda_lidar > T::zero() {
        fitter.prior_tree = Some(crate::prior::KdTree::build(prior.positions()));
    } else {
        fitter.loss_cfg.lambda_lidar = T::zero();
    }

    let mut per_bin_counts = Vec::with_capacity(schedule.len());
    for (bi, views) in bin_views.iter().enumerate() {
        if bi > 0 {
            // append Gaussians for the newly covered region
            let part = subset_cloud(prior, &point_parts[bi]);
            if part.len() >= 4 {
                let frozen_count = fitter.gaussians.len();
                fitter.append(init_gaussians(&part)?);
                let _ = frozen_count;
            } else if !part.is_empty() {
                log::warn!("bin {bi}: only {} prior points, skipping init", part.len());
            }
        }
        let frozen_below = if opts.frozen_prev && bi > 0 {
            per_bin_counts.last().copied().unwrap_or(0)
        } else {
            0
        };
        let bin_iters =
            ((total_iters as f64) * (views.len() as f64) / (total_views as f64)).round() as usize;
        let fit_opts = FitOptions {
            iters: bin_iters.max(1),
            densify: true,
            opacity_reset: true,
            multicam_fusion: opts.multicam_fusion,
            frozen_below,
            bound_half_extents: None,
            eval_every: opts.eval_every,
        };
        fitter.run(views, &fit_opts, &mut on_eval)?;
        per_bin_counts.push(fitter.gaussians.len());
        on_bin(bi, &fitter);
    }

    Ok(StaticOutcome { fitter, per_bin_counts })
}
