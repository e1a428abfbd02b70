use rand::Rng;

use crate::math::Vec3;
use crate::scalar::{sc, Scalar};
use crate::scene::Gaussian;

use super::{OptimizerState, TrainConfig};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DensifyStats {
    pub cloned: usize,
    pub split: usize,
    pub pruned: usize,
}

const SPLIT_SCALE_SHRINK: f64 = 1.6;

/// Standard normal sample via Box-Muller.
fn sample_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Densification and pruning pass.
///
/// Gaussians whose mean accumulated screen gradient exceeds the threshold
/// are cloned (small ones) or split into two children with scale / 1.6
/// sampled from the parent distribution (large ones, measured against
/// `percent_dense * extent`). Gaussians with opacity below the prune
/// threshold or world extent above the scene-size cap are removed.
/// Optimizer slots follow the list; new Gaussians get zeroed moments and
/// the statistics reset.
pub fn densify_and_prune<T: Scalar, R: Rng>(
    gaussians: &mut Vec<Gaussian<T>>,
    state: &mut OptimizerState<T>,
    cfg: &TrainConfig,
    extent: T,
    rng: &mut R,
) -> DensifyStats {
    let mut stats = DensifyStats::default();
    let threshold = sc::<T>(cfg.densify_grad_threshold);
    let dense_limit = sc::<T>(cfg.percent_dense) * extent;
    let prune_opacity = sc::<T>(cfg.prune_opacity);
    let world_cap = sc::<T>(cfg.world_size_cap_factor) * extent;
    let allow_growth = gaussians.len() < cfg.max_gaussians;

    let n = gaussians.len();
    let mut keep: Vec<Gaussian<T>> = Vec::with_capacity(n);
    let mut keep_slots = Vec::with_capacity(n);
    let mut born: Vec<Gaussian<T>> = Vec::new();

    for i in 0..n {
        let g = &gaussians[i];
        if g.opacity() < prune_opacity || g.max_scale() > world_cap {
            stats.pruned += 1;
            continue;
        }
        let count = state.grad2d_count[i];
        let mean_grad = if count > 0 {
            state.grad2d_accum[i] / T::from_u32(count).unwrap()
        } else {
            T::zero()
        };
        let over = mean_grad > threshold;

        if over && allow_growth && g.max_scale() > dense_limit {
            // split: two children sampled from the parent, shrunk
            stats.split += 1;
            let rot = g.rotation.to_matrix();
            let scale = g.scale();
            let shrink = sc::<T>(SPLIT_SCALE_SHRINK.ln());
            for _ in 0..2 {
                let local = Vec3::new(
                    sc::<T>(sample_normal(rng)) * scale.x,
                    sc::<T>(sample_normal(rng)) * scale.y,
                    sc::<T>(sample_normal(rng)) * scale.z,
                );
                let mut child = g.clone();
                child.position = g.position + rot.mul_vec(local);
                child.log_scale = g.log_scale - Vec3::splat(shrink);
                born.push(child);
            }
        } else {
            if over && allow_growth {
                // clone in place; gradients separate the copies later
                stats.cloned += 1;
                born.push(g.clone());
            }
            keep.push(g.clone());
            keep_slots.push(state.slots[i].clone());
        }
    }

    let born_count = born.len();
    keep.extend(born);
    *gaussians = keep;
    state.slots = keep_slots;
    state.grow(born_count);
    state.grad2d_accum.truncate(gaussians.len() - born_count);
    state.grad2d_count.truncate(gaussians.len() - born_count);
    state.grad2d_accum.resize(gaussians.len(), T::zero());
    state.grad2d_count.resize(gaussians.len(), 0);
    state.reset_densify_stats();
    debug_assert_eq!(state.slots.len(), gaussians.len());
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::ExpSchedule;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn setup(n: usize, scale: f64) -> (Vec<Gaussian<f64>>, OptimizerState<f64>) {
        let gs: Vec<Gaussian<f64>> = (0..n)
            .map(|i| Gaussian::isotropic(Vec3::new(i as f64, 0.0, 0.0), scale, Vec3::splat(0.5), 0.5))
            .collect();
        let state = OptimizerState::new(n, ExpSchedule::constant(1e-3));
        (gs, state)
    }

    #[test]
    fn below_threshold_only_prunes() {
        let (mut gs, mut state) = setup(4, 0.1);
        gs[2].opacity_logit = crate::scalar::logit(0.001); // below prune
        let cfg = TrainConfig::default();
        let mut rng = StdRng::seed_from_u64(0);
        let stats = densify_and_prune(&mut gs, &mut state, &cfg, 10.0, &mut rng);
        assert_eq!(stats.pruned, 1);
        assert_eq!(stats.cloned + stats.split, 0);
        assert_eq!(gs.len(), 3);
        assert_eq!(state.slots.len(), 3);
    }

    #[test]
    fn large_gaussian_splits_into_two() {
        // extent 10 -> percent_dense limit 0.1; scale 0.5 is "large"
        let (mut gs, mut state) = setup(1, 0.5);
        state.grad2d_accum[0] = 0.01;
        state.grad2d_count[0] = 1;
        let cfg = TrainConfig::default();
        let mut rng = StdRng::seed_from_u64(1);
        let stats = densify_and_prune(&mut gs, &mut state, &cfg, 10.0, &mut rng);
        assert_eq!(stats.split, 1);
        assert_eq!(gs.len(), 2, "parent replaced by two children");
        assert_eq!(state.slots.len(), 2);
        let expect = 0.5 / 1.6;
        for g in &gs {
            assert!((g.scale().x - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn small_gaussian_clones() {
        let (mut gs, mut state) = setup(1, 0.05);
        state.grad2d_accum[0] = 0.01;
        state.grad2d_count[0] = 1;
        let cfg = TrainConfig::default();
        let mut rng = StdRng::seed_from_u64(2);
        let stats = densify_and_prune(&mut gs, &mut state, &cfg, 10.0, &mut rng);
        assert_eq!(stats.cloned, 1);
        assert_eq!(gs.len(), 2);
        assert!(gs[0].position.distance(gs[1].position) < 1e-12);
    }

    #[test]
    fn oversized_world_extent_pruned() {
        let (mut gs, mut state) = setup(2, 0.1);
        gs[1].log_scale = Vec3::splat(3.0f64.ln()); // 3 m > 0.1 * 10
        let cfg = TrainConfig::default();
        let mut rng = StdRng::seed_from_u64(3);
        let stats = densify_and_prune(&mut gs, &mut state, &cfg, 10.0, &mut rng);
        assert_eq!(stats.pruned, 1);
        assert_eq!(gs.len(), 1);
    }

    #[test]
    fn stats_reset_after_pass() {
        let (mut gs, mut state) = setup(3, 0.05);
        state.grad2d_accum.iter_mut().for_each(|v| *v = 0.5);
        state.grad2d_count.iter_mut().for_each(|v| *v = 2);
        let cfg = TrainConfig::default();
        let mut rng = StdRng::seed_from_u64(4);
        densify_and_prune(&mut gs, &mut state, &cfg, 10.0, &mut rng);
        assert!(state.grad2d_accum.iter().all(|&v| v == 0.0));
        assert!(state.grad2d_count.iter().all(|&v| v == 0));
    }
}
