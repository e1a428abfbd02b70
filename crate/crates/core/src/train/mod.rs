//! Training orchestration: the shared per-view fit loop, bin
//! partitioning, incremental static training and multi-camera fusion
//! weights.

mod bins;
mod fusion;
mod incremental;

pub use bins::{partition_bins, Bin, BinCount, BinSchedule, DEFAULT_OVERLAP_FRAC};
pub use fusion::fuse_multicam_color;
pub use incremental::{build_static_masks, train_static, StaticOptions, StaticOutcome};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand::seq::SliceRandom;

use crate::error::Result;
use crate::losses::{total_loss_with_tree, LossConfig};
use crate::math::Vec3;
use crate::optim::{densify_and_prune, reset_opacity, step, OptimizerState, TrainConfig};
use crate::prior::KdTree;
use crate::raster::{render, render_backward, RenderSettings, NO_CONTRIBUTOR};
use crate::scalar::Scalar;
use crate::scene::{CameraView, Gaussian, ImageBuf, Mask};

/// One supervision view: camera, target image, and the supervised pixels
/// (`None` supervises everything).
#[derive(Clone, Debug)]
pub struct FitView<T> {
    pub camera: CameraView<T>,
    pub target: ImageBuf<T>,
    pub mask: Option<Mask>,
}

/// One row of the per-iteration loss log.
#[derive(Clone, Copy, Debug)]
pub struct LossRow {
    pub iter: usize,
    pub tssim: f64,
    pub robust: f64,
    pub lidar: f64,
    pub total: f64,
}

/// Knobs for one fit run.
#[derive(Clone, Debug)]
pub struct FitOptions<T> {
    pub iters: usize,
    pub densify: bool,
    pub opacity_reset: bool,
    pub multicam_fusion: bool,
    /// Gradients for Gaussians below this index are dropped (frozen
    /// previous-bin mode).
    pub frozen_below: usize,
    /// Prune Gaussians outside 1.5x these half extents at densify
    /// intervals (node training).
    pub bound_half_extents: Option<Vec3<T>>,
    /// Invoke the eval callback every this many iterations (0 = never).
    pub eval_every: usize,
}

impl<T: Scalar> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            iters: 1000,
            densify: true,
            opacity_reset: true,
            multicam_fusion: true,
            frozen_below: 0,
            bound_half_extents: None,
            eval_every: 0,
        }
    }
}

/// Owns the Gaussians being optimized plus every piece of optimizer
/// state; checkpointing serializes this.
pub struct Fitter<T> {
    pub gaussians: Vec<Gaussian<T>>,
    pub state: OptimizerState<T>,
    pub cfg: TrainConfig,
    pub loss_cfg: LossConfig<T>,
    pub settings: RenderSettings<T>,
    /// Scene (or object) extent driving densification thresholds.
    pub extent: T,
    pub prior_tree: Option<KdTree<T>>,
    pub rng: ChaCha12Rng,
    pub loss_log: Vec<LossRow>,
}

impl<T: Scalar> Fitter<T> {
    pub fn new(
        gaussians: Vec<Gaussian<T>>,
        cfg: TrainConfig,
        loss_cfg: LossConfig<T>,
        settings: RenderSettings<T>,
        extent: T,
        position_schedule: crate::optim::ExpSchedule<T>,
        seed: u64,
    ) -> Self {
        let state = OptimizerState::new(gaussians.len(), position_schedule);
        Self {
            gaussians,
            state,
            cfg,
            loss_cfg,
            settings,
            extent,
            prior_tree: None,
            rng: ChaCha12Rng::seed_from_u64(seed),
            loss_log: Vec::new(),
        }
    }

    /// Appends freshly initialized Gaussians (zeroed optimizer moments).
    pub fn append(&mut self, extra: Vec<Gaussian<T>>) {
        let n = extra.len();
        self.gaussians.extend(extra);
        self.state.grow(n);
    }

    /// Drops Gaussians outside `1.5 * half_extents` (canonical frame),
    /// keeping optimizer slots aligned.
    fn prune_outside_bounds(&mut self, half_extents: Vec3<T>) {
        let bound = half_extents * crate::scalar::sc::<T>(crate::dynamic::NODE_BOUND_FACTOR);
        let keep: Vec<bool> = self
            .gaussians
            .iter()
            .map(|g| {
                g.position.x.abs() <= bound.x
                    && g.position.y.abs() <= bound.y
                    && g.position.z.abs() <= bound.z
            })
            .collect();
        if keep.iter().all(|&k| k) {
            return;
        }
        let mut gi = 0;
        self.gaussians.retain(|_| {
            let k = keep[gi];
            gi += 1;
            k
        });
        let mut si = 0;
        self.state.slots.retain(|_| {
            let k = keep[si];
            si += 1;
            k
        });
        let mut ai = 0;
        self.state.grad2d_accum.retain(|_| {
            let k = keep[ai];
            ai += 1;
            k
        });
        let mut ci = 0;
        self.state.grad2d_count.retain(|_| {
            let k = keep[ci];
            ci += 1;
            k
        });
    }

    /// Runs `opts.iters` optimization iterations over the given views.
    /// `on_eval` fires every `eval_every` iterations and at the end.
    pub fn run(
        &mut self,
        views: &[FitView<T>],
        opts: &FitOptions<T>,
        mut on_eval: impl FnMut(usize, &[Gaussian<T>]),
    ) -> Result<()> {
        if views.is_empty() || opts.iters == 0 {
            return Ok(());
        }
        // masked targets precomputed once: unsupervised pixels are zeroed
        // on both sides so they carry no residual
        let masked_targets: Vec<ImageBuf<T>> = views
            .iter()
            .map(|v| match &v.mask {
                None => v.target.clone(),
                Some(m) => {
                    let mut t = v.target.clone();
                    for y in 0..t.height {
                        for x in 0..t.width {
                            if !m.get(x, y) {
                                t.set(x, y, Vec3::zero());
                            }
                        }
                    }
                    t
                }
            })
            .collect();

        // camera groups per timestep for fusion weighting
        let mut order: Vec<usize> = (0..views.len()).collect();
        let mut cursor = views.len(); // triggers an initial shuffle

        let densify_stop = self.cfg.densify_stop_iter();
        for _ in 0..opts.iters {
            if cursor >= order.len() {
                order.shuffle(&mut self.rng);
                cursor = 0;
            }
            let vi = order[cursor];
            cursor += 1;
            let view = &views[vi];

            let out = render(&self.gaussians, &view.camera, &self.settings);

            let mut rendered = out.image.clone();
            if let Some(m) = &view.mask {
                for y in 0..rendered.height {
                    for x in 0..rendered.width {
                        if !m.get(x, y) {
                            rendered.set(x, y, Vec3::zero());
                        }
                    }
                }
            }

            let loss = total_loss_with_tree(
                &rendered,
                &masked_targets[vi],
                &self.gaussians,
                self.prior_tree.as_ref(),
                &self.loss_cfg,
            )?;

            let mut image_grad = loss.image_grad;
            if let Some(m) = &view.mask {
                for y in 0..image_grad.height {
                    for x in 0..image_grad.width {
                        if !m.get(x, y) {
                            image_grad.set(x, y, Vec3::zero());
                        }
                    }
                }
            }

            if opts.multicam_fusion {
                let peers: Vec<&CameraView<T>> = views
                    .iter()
                    .map(|v| &v.camera)
                    .filter(|c| c.timestep == view.camera.timestep)
                    .collect();
                if peers.len() > 1 {
                    let slot = peers
                        .iter()
                        .position(|c| c.camera_id == view.camera.camera_id)
                        .unwrap_or(0);
                    let weights =
                        fuse_multicam_color(&self.gaussians, &peers, self.settings.near_clip);
                    for y in 0..image_grad.height {
                        for x in 0..image_grad.width {
                            let dom = out.dominant[y * image_grad.width + x];
                            if dom != NO_CONTRIBUTOR {
                                let w = weights[slot][dom as usize];
                                if w > T::zero() {
                                    let g = image_grad.get(x, y);
                                    image_grad.set(x, y, g * w);
                                }
                            }
                        }
                    }
                }
            }

            let mut grads =
                render_backward(&self.gaussians, &view.camera, &image_grad, &self.settings);
            for (g, p) in grads.grads.iter_mut().zip(loss.position_grads.iter()) {
                g.position += *p;
            }
            if opts.frozen_below > 0 {
                for g in grads.grads.iter_mut().take(opts.frozen_below) {
                    *g = crate::raster::GaussianGrad::zeroed();
                }
            }

            step(&mut self.gaussians, &grads, &mut self.state, &self.cfg)?;

            let iter = self.state.iteration;
            self.loss_log.push(LossRow {
                iter,
                tssim: loss.tssim.to_f64_c(),
                robust: loss.robust.to_f64_c(),
                lidar: loss.lidar.to_f64_c(),
                total: loss.total.to_f64_c(),
            });

            if opts.densify
                && iter >= self.cfg.densify_start
                && iter <= densify_stop
                && iter % self.cfg.densify_interval == 0
            {
                densify_and_prune(
                    &mut self.gaussians,
                    &mut self.state,
                    &self.cfg,
                    self.extent,
                    &mut self.rng,
                );
                if let Some(he) = opts.bound_half_extents {
                    self.prune_outside_bounds(he);
                }
            }

            if opts.opacity_reset
                && iter % self.cfg.opacity_reset_interval == 0
                && iter <= densify_stop
            {
                reset_opacity(&mut self.gaussians);
            }

            if opts.eval_every > 0 && iter % opts.eval_every == 0 {
                on_eval(iter, &self.gaussians);
            }
        }
        on_eval(self.state.iteration, &self.gaussians);
        Ok(())
    }

    /// Writes the loss log as CSV (`iter,l_tssim,l_robust,l_lidar,total`).
    pub fn write_loss_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut text = String::from("iter,l_tssim,l_robust,l_lidar,total\n");
        for row in &self.loss_log {
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                row.iter, row.tssim, row.robust, row.lidar, row.total
            ));
        }
        std::fs::write(path, text).map_err(|e| crate::error::Error::io(path, e))
    }
}
