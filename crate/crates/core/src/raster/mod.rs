//! Differentiable forward/backward splatting of Gaussians into per-camera
//! images.
//!
//! The forward pass projects each Gaussian to a screen-space ellipse,
//! bins it into 16x16 pixel tiles, sorts front-to-back by mean depth and
//! alpha-composites per pixel. The backward pass replays the compositing
//! per tile and returns exact analytic gradients for every Gaussian
//! parameter. A naive globally-sorted per-pixel compositor serves as the
//! independent reference for the tile path.

mod backward;
#[cfg(test)]
mod backward_tests;
pub mod check;
mod forward;
mod project;
pub mod reference;

pub use backward::{render_backward, render_backward_refs, GaussianGrad, GaussianGradients};
pub use forward::{render, render_composed, render_refs, RenderOutput, NO_CONTRIBUTOR};
pub use project::{project, ProjectedGaussian};

use crate::math::Vec3;
use crate::scalar::{sc, Scalar};

/// Rasterization constants. The defaults follow the conventions of
/// splat-based pipelines; every cutoff is adjustable.
#[derive(Clone, Debug)]
pub struct RenderSettings<T> {
    /// Cull Gaussians closer than this camera-frame depth (meters).
    pub near_clip: T,
    /// Footprint cutoff in standard deviations: a pixel contributes only
    /// when `d^T cov2d^-1 d <= footprint_sigma^2`.
    pub footprint_sigma: T,
    /// Low-pass term added to both screen-space variances (pixels^2).
    pub lowpass: T,
    /// Upper clamp on per-pixel alpha.
    pub alpha_clamp: T,
    /// Contributions below this alpha are skipped.
    pub alpha_skip: T,
    /// Per-pixel compositing stops once transmittance falls below this.
    pub transmittance_stop: T,
    /// Fill color behind the splats.
    pub background: Vec3<T>,
    /// Tile edge in pixels.
    pub tile_size: usize,
    /// Backward stores per-pixel contributor lists instead of replaying
    /// the forward pass arithmetically.
    pub store_contributors: bool,
}

impl<T: Scalar> Default for RenderSettings<T> {
    fn default() -> Self {
        Self {
            near_clip: sc(0.2),
            footprint_sigma: sc(3.0),
            lowpass: sc(0.3),
            alpha_clamp: sc(0.99),
            alpha_skip: sc(1.0 / 255.0),
            transmittance_stop: sc(1e-4),
            background: Vec3::zero(),
            tile_size: 16,
            store_contributors: false,
        }
    }
}

impl<T: Scalar> RenderSettings<T> {
    /// Settings with the footprint and termination cutoffs disabled, so
    /// the rendered image is a smooth function of the Gaussian parameters
    /// (used by finite-difference checks).
    pub fn without_cutoffs() -> Self {
        Self {
            footprint_sigma: sc(1e4),
            alpha_skip: T::zero(),
            transmittance_stop: T::zero(),
            ..Self::default()
        }
    }
}
