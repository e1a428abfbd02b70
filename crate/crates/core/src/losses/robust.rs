use crate::error::{Error, Result};
use crate::scalar::{sc, Scalar};
use crate::scene::ImageBuf;

use super::LossConfig;

/// Smoothing constant so the power kernel is differentiable at zero
/// residual.
const EPS: f64 = 1e-3;

/// Power-law robust photometric loss: per pixel the residual is the
/// Euclidean norm of the RGB difference and the penalty is
/// `(r^2 + eps^2)^(kappa/2)`, averaged over pixels. `kappa = 1` behaves
/// like a smoothed L1 on the norm; smaller values downweight outliers.
pub fn robust_loss<T: Scalar>(
    rendered: &ImageBuf<T>,
    target: &ImageBuf<T>,
    cfg: &LossConfig<T>,
) -> Result<(T, ImageBuf<T>)> {
    if !rendered.same_shape(target) {
        return Err(Error::ShapeMismatch {
            a: format!("{}x{}", rendered.width, rendered.height),
            b: format!("{}x{}", target.width, target.height),
        });
    }
    let n = T::from_usize(rendered.pixels()).unwrap();
    let eps2 = sc::<T>(EPS * EPS);
    let kappa = cfg.kappa;
    let half = sc::<T>(0.5);

    let mut grad = ImageBuf::new(rendered.width, rendered.height);
    let mut loss = T::zero();
    for y in 0..rendered.height {
        for x in 0..rendered.width {
            let diff = rendered.get(x, y) - target.get(x, y);
            let r2 = diff.norm_sq() + eps2;
            loss += r2.powf(kappa * half);
            // d/d(diff) of (r^2)^(k/2) = k (r^2)^(k/2 - 1) diff
            let coeff = kappa * r2.powf(kappa * half - T::one()) / n;
            grad.set(x, y, diff * coeff);
        }
    }
    Ok((loss / n, grad))
}

/// Convenience for single-pixel residual inspection in tests.
pub fn robust_kernel<T: Scalar>(residual: T, kappa: T) -> T {
    let eps2 = sc::<T>(EPS * EPS);
    (residual * residual + eps2).powf(kappa * sc(0.5))
}
