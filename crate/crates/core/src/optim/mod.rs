//! Gradient-descent training machinery: adaptive-moment updates with
//! scheduled learning rates, opacity resets, and densify/prune control.

mod adam;
mod densify;
mod schedule;

pub use adam::{adam_update, AdamSlot};
pub use densify::{densify_and_prune, DensifyStats};
pub use schedule::ExpSchedule;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::GaussianGradients;
use crate::scalar::{logit, sc, Scalar};
use crate::scene::sh::SH_COEFFS;
use crate::scene::Gaussian;

/// Training hyperparameters. Serialized next to checkpoints so runs are
/// reproducible from their sidecar alone.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainConfig {
    pub total_iters: usize,
    pub densify_grad_threshold: f64,
    pub opacity_reset_interval: usize,
    pub densify_interval: usize,
    pub densify_start: usize,
    /// Densification stops after this fraction of `total_iters`.
    pub densify_stop_fraction: f64,
    /// Static position learning rate (init, final); scaled by the scene
    /// extent, decayed exponentially over `total_iters`.
    pub static_position_lr: (f64, f64),
    /// Dynamic-node position learning rate (init, final), unscaled.
    pub dynamic_position_lr: (f64, f64),
    pub sh_dc_lr: f64,
    pub sh_rest_lr: f64,
    pub opacity_lr: f64,
    pub scale_lr: f64,
    pub rotation_lr: f64,
    /// Clone-vs-split threshold as a fraction of the scene extent.
    pub percent_dense: f64,
    pub prune_opacity: f64,
    /// Gaussians larger than this fraction of the scene extent are
    /// pruned.
    pub world_size_cap_factor: f64,
    /// Random initial points per dynamic object node.
    pub dynamic_init_points: usize,
    /// Iterations for one dynamic node fit.
    pub dynamic_iters: usize,
    pub max_gaussians: usize,
    /// Apply opacity resets to dynamic-node Gaussians as well.
    pub reset_opacity_on_nodes: bool,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            total_iters: 50_000,
            densify_grad_threshold: 0.001,
            opacity_reset_interval: 900,
            densify_interval: 100,
            densify_start: 500,
            densify_stop_fraction: 0.5,
            static_position_lr: (1.6e-4, 1.6e-6),
            dynamic_position_lr: (1.6e-3, 1.6e-6),
            sh_dc_lr: 2.5e-3,
            sh_rest_lr: 2.5e-3 / 20.0,
            opacity_lr: 5e-2,
            scale_lr: 5e-3,
            rotation_lr: 1e-3,
            percent_dense: 0.01,
            prune_opacity: 0.005,
            world_size_cap_factor: 0.1,
            dynamic_init_points: 3000,
            dynamic_iters: 2000,
            max_gaussians: 400_000,
            reset_opacity_on_nodes: false,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-15,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("total_iters", self.total_iters),
            ("opacity_reset_interval", self.opacity_reset_interval),
            ("densify_interval", self.densify_interval),
            ("dynamic_init_points", self.dynamic_init_points),
        ] {
            if v == 0 {
                return Err(Error::parameter(name, "must be positive"));
            }
        }
        for (name, (a, b)) in [
            ("static_position_lr", self.static_position_lr),
            ("dynamic_position_lr", self.dynamic_position_lr),
        ] {
            if a <= 0.0 || b <= 0.0 || a < b {
                return Err(Error::parameter(name, "needs positive start >= end"));
            }
        }
        Ok(())
    }

    /// Position schedule for the static field, scaled by scene extent.
    pub fn static_schedule<T: Scalar>(&self, scene_extent: T) -> ExpSchedule<T> {
        ExpSchedule::new(
            sc::<T>(self.static_position_lr.0) * scene_extent,
            sc::<T>(self.static_position_lr.1) * scene_extent,
            self.total_iters,
        )
    }

    /// Position schedule for dynamic object nodes.
    pub fn dynamic_schedule<T: Scalar>(&self) -> ExpSchedule<T> {
        ExpSchedule::new(
            sc(self.dynamic_position_lr.0),
            sc(self.dynamic_position_lr.1),
            self.total_iters,
        )
    }

    pub fn densify_stop_iter(&self) -> usize {
        (self.total_iters as f64 * self.densify_stop_fraction) as usize
    }
}

/// Optimizer state: per-Gaussian moments, the iteration counter, and the
/// densification statistics. Slot count always tracks the live Gaussian
/// list.
#[derive(Clone, Debug)]
pub struct OptimizerState<T> {
    pub slots: Vec<AdamSlot<T>>,
    pub iteration: usize,
    /// Schedule driving the position learning rate.
    pub position_schedule: ExpSchedule<T>,
    /// Accumulated screen-space gradient magnitude per Gaussian.
    pub grad2d_accum: Vec<T>,
    /// Number of renders each Gaussian contributed to since the last
    /// densification.
    pub grad2d_count: Vec<u32>,
}

impl<T: Scalar> OptimizerState<T> {
    pub fn new(n: usize, position_schedule: ExpSchedule<T>) -> Self {
        Self {
            slots: vec![AdamSlot::zeroed(); n],
            iteration: 0,
            position_schedule,
            grad2d_accum: vec![T::zero(); n],
            grad2d_count: vec![0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Appends zeroed slots for newly created Gaussians.
    pub fn grow(&mut self, extra: usize) {
        self.slots.extend((0..extra).map(|_| AdamSlot::zeroed()));
        self.grad2d_accum.extend(std::iter::repeat(T::zero()).take(extra));
        self.grad2d_count.extend(std::iter::repeat(0).take(extra));
    }

    pub fn reset_densify_stats(&mut self) {
        self.grad2d_accum.iter_mut().for_each(|v| *v = T::zero());
        self.grad2d_count.iter_mut().for_each(|v| *v = 0);
    }
}

/// One adaptive-moment step over every parameter group. Quaternions are
/// re-normalized afterwards; densification statistics accumulate from the
/// gradients' screen-space magnitudes.
pub fn step<T: Scalar>(
    gaussians: &mut [Gaussian<T>],
    grads: &GaussianGradients<T>,
    state: &mut OptimizerState<T>,
    cfg: &TrainConfig,
) -> Result<()> {
    if gaussians.len() != grads.len() || gaussians.len() != state.len() {
        return Err(Error::Other(format!(
            "shape mismatch: {} gaussians, {} grads, {} slots",
            gaussians.len(),
            grads.len(),
            state.len()
        )));
    }
    for (name, bad) in [
        ("position", grads.grads.iter().any(|g| !g.position.is_finite())),
        ("rotation", grads.grads.iter().any(|g| g.rotation.iter().any(|v| !v.is_finite()))),
        ("log_scale", grads.grads.iter().any(|g| !g.log_scale.is_finite())),
        ("opacity", grads.grads.iter().any(|g| !g.opacity_logit.is_finite())),
        ("sh", grads.grads.iter().any(|g| g.sh.iter().flatten().any(|v| !v.is_finite()))),
    ] {
        if bad {
            return Err(Error::NonFiniteGradient(name.into()));
        }
    }

    state.iteration += 1;
    let t = state.iteration as i32;
    let beta1 = sc::<T>(cfg.beta1);
    let beta2 = sc::<T>(cfg.beta2);
    let eps = sc::<T>(cfg.adam_eps);
    let bias1 = T::one() - beta1.powi(t);
    let bias2 = T::one() - beta2.powi(t);

    let lr_pos = state.position_schedule.value(state.iteration - 1);
    let lr_rot = sc::<T>(cfg.rotation_lr);
    let lr_scale = sc::<T>(cfg.scale_lr);
    let lr_opacity = sc::<T>(cfg.opacity_lr);
    let lr_dc = sc::<T>(cfg.sh_dc_lr);
    let lr_rest = sc::<T>(cfg.sh_rest_lr);

    for (i, g) in gaussians.iter_mut().enumerate() {
        let gr = &grads.grads[i];
        let slot = &mut state.slots[i];

        for k in 0..3 {
            adam_update(
                &mut g.position[k],
                gr.position[k],
                &mut slot.m_position[k],
                &mut slot.v_position[k],
                lr_pos,
                beta1,
                beta2,
                eps,
                bias1,
                bias2,
            );
        }
        let qref: [&mut T; 4] = [
            &mut g.rotation.w,
            &mut g.rotation.x,
            &mut g.rotation.y,
            &mut g.rotation.z,
        ];
        for (k, q) in qref.into_iter().enumerate() {
            adam_update(
                q,
                gr.rotation[k],
                &mut slot.m_rotation[k],
                &mut slot.v_rotation[k],
                lr_rot,
                beta1,
                beta2,
                eps,
                bias1,
                bias2,
            );
        }
        for k in 0..3 {
            adam_update(
                &mut g.log_scale[k],
                gr.log_scale[k],
                &mut slot.m_log_scale[k],
                &mut slot.v_log_scale[k],
                lr_scale,
                beta1,
                beta2,
                eps,
                bias1,
                bias2,
            );
        }
        adam_update(
            &mut g.opacity_logit,
            gr.opacity_logit,
            &mut slot.m_opacity,
            &mut slot.v_opacity,
            lr_opacity,
            beta1,
            beta2,
            eps,
            bias1,
            bias2,
        );
        for ch in 0..3 {
            for k in 0..SH_COEFFS {
                let lr = if k == 0 { lr_dc } else { lr_rest };
                adam_update(
                    &mut g.sh[ch][k],
                    gr.sh[ch][k],
                    &mut slot.m_sh[ch][k],
                    &mut slot.v_sh[ch][k],
                    lr,
                    beta1,
                    beta2,
                    eps,
                    bias1,
                    bias2,
                );
            }
        }
        g.renormalize_rotation();

        if gr.visible {
            state.grad2d_accum[i] += gr.grad2d_norm;
            state.grad2d_count[i] += 1;
        }
    }
    Ok(())
}

/// Clamps every opacity down to at most 0.01 in activation space.
pub fn reset_opacity<T: Scalar>(gaussians: &mut [Gaussian<T>]) {
    let cap = sc::<T>(0.01);
    let cap_logit = logit(cap);
    for g in gaussians.iter_mut() {
        if g.opacity() > cap {
            g.opacity_logit = cap_logit;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec3;
    use crate::raster::GaussianGradients;

    fn setup(n: usize) -> (Vec<Gaussian<f64>>, OptimizerState<f64>, TrainConfig) {
        let gaussians: Vec<Gaussian<f64>> = (0..n)
            .map(|i| {
                Gaussian::isotropic(
                    Vec3::new(i as f64, 0.0, 5.0),
                    0.2,
                    Vec3::splat(0.5),
                    0.5,
                )
            })
            .collect();
        let cfg = TrainConfig::default();
        let state = OptimizerState::new(n, cfg.dynamic_schedule::<f64>());
        (gaussians, state, cfg)
    }

    #[test]
    fn zero_gradients_only_advance_iteration() {
        let (mut gs, mut state, cfg) = setup(3);
        let before = gs.clone();
        let grads = GaussianGradients::zeroed(3);
        step(&mut gs, &grads, &mut state, &cfg).unwrap();
        assert_eq!(state.iteration, 1);
        for (a, b) in gs.iter().zip(before.iter()) {
            assert!(a.position.distance(b.position) < 1e-15);
            assert_eq!(a.opacity_logit, b.opacity_logit);
        }
    }

    #[test]
    fn constant_gradient_moves_against_sign() {
        let (mut gs, mut state, cfg) = setup(1);
        let x0 = gs[0].position.x;
        for _ in 0..50 {
            let mut grads = GaussianGradients::zeroed(1);
            grads.grads[0].position = Vec3::new(1.0, 0.0, 0.0);
            step(&mut gs, &grads, &mut state, &cfg).unwrap();
        }
        assert!(gs[0].position.x < x0);
    }

    #[test]
    fn dynamic_schedule_endpoints() {
        let cfg = TrainConfig::default();
        let s = cfg.dynamic_schedule::<f64>();
        assert!((s.value(0) - 1.6e-3).abs() / 1.6e-3 < 0.01);
        assert!((s.value(cfg.total_iters) - 1.6e-6).abs() / 1.6e-6 < 0.01);
    }

    #[test]
    fn non_finite_gradient_names_group() {
        let (mut gs, mut state, cfg) = setup(1);
        let mut grads = GaussianGradients::zeroed(1);
        grads.grads[0].log_scale.y = f64::NAN;
        let err = step(&mut gs, &grads, &mut state, &cfg).unwrap_err();
        assert!(err.to_string().contains("log_scale"));
    }

    #[test]
    fn quaternion_stays_normalized() {
        let (mut gs, mut state, cfg) = setup(1);
        for i in 0..20 {
            let mut grads = GaussianGradients::zeroed(1);
            grads.grads[0].rotation = [0.1 * (i as f64).sin(), 0.2, -0.15, 0.05];
            step(&mut gs, &grads, &mut state, &cfg).unwrap();
            assert!((gs[0].rotation.norm() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn opacity_reset_clamps_down() {
        let mut gs = vec![
            Gaussian::<f64>::isotropic(Vec3::zero(), 0.1, Vec3::splat(0.5), 0.9),
            Gaussian::<f64>::isotropic(Vec3::zero(), 0.1, Vec3::splat(0.5), 0.005),
        ];
        let logit_before = gs[1].opacity_logit;
        reset_opacity(&mut gs);
        assert!((gs[0].opacity() - 0.01).abs() < 1e-12);
        assert_eq!(gs[1].opacity_logit, logit_before);
    }

    #[test]
    fn default_config_pins_published_values() {
        let cfg = TrainConfig::default();
        assert_eq!(cfg.total_iters, 50_000);
        assert_eq!(cfg.densify_grad_threshold, 0.001);
        assert_eq!(cfg.opacity_reset_interval, 900);
        assert_eq!(cfg.dynamic_position_lr, (1.6e-3, 1.6e-6));
        assert_eq!(cfg.dynamic_init_points, 3000);
    }
}
