use crate::math::{Mat2, Mat2x3, Vec2, Vec3};
use crate::scalar::{sc, Scalar};
use crate::scene::{CameraView, Gaussian};

use super::RenderSettings;

/// A Gaussian projected into one camera's screen space.
#[derive(Clone, Debug)]
pub struct ProjectedGaussian<T> {
    /// Pixel-space center.
    pub mean2d: Vec2<T>,
    /// Screen-space covariance after the low-pass clamp (pixels^2).
    pub cov2d: Mat2<T>,
    /// Inverse of `cov2d`.
    pub conic: Mat2<T>,
    /// Camera-frame depth (meters).
    pub depth: T,
    /// View-evaluated color.
    pub color: Vec3<T>,
    /// Activated base opacity in (0, 1).
    pub opacity: T,
    /// Index into the input Gaussian list.
    pub source: usize,
    /// Conservative pixel bounds of the footprint ellipse.
    pub x_min: i64,
    pub x_max: i64,
    pub y_min: i64,
    pub y_max: i64,
}

/// Perspective Jacobian at a camera-frame point for upper-triangular
/// intrinsics: rows are du/dt and dv/dt.
pub(crate) fn projection_jacobian<T: Scalar>(cam: &CameraView<T>, t: Vec3<T>) -> Mat2x3<T> {
    let fx = cam.fx();
    let fy = cam.fy();
    let s = cam.skew();
    let inv_z = T::one() / t.z;
    let inv_z2 = inv_z * inv_z;
    Mat2x3 {
        m: [
            [fx * inv_z, s * inv_z, -(fx * t.x + s * t.y) * inv_z2],
            [T::zero(), fy * inv_z, -fy * t.y * inv_z2],
        ],
    }
}

/// Projects one Gaussian; returns `None` when culled (behind the near
/// plane, footprint off-screen, or opacity below the skip threshold).
pub fn project<T: Scalar>(
    g: &Gaussian<T>,
    cam: &CameraView<T>,
    settings: &RenderSettings<T>,
    source: usize,
) -> Option<ProjectedGaussian<T>> {
    let t = cam.to_camera(g.position);
    if t.z <= settings.near_clip {
        return None;
    }
    let opacity = g.opacity();
    if opacity < settings.alpha_skip {
        return None;
    }

    let mean2d = cam.project_camera_point(t);
    let j = projection_jacobian(cam, t);
    let m = j.mul_mat3(&cam.rotation);
    let mut cov2d = m.sandwich_sym(&g.covariance());
    cov2d.m[0][0] += settings.lowpass;
    cov2d.m[1][1] += settings.lowpass;
    let conic = cov2d.inverse()?;

    let fs = settings.footprint_sigma;
    let half_w = fs * cov2d.m[0][0].max(T::zero()).sqrt();
    let half_h = fs * cov2d.m[1][1].max(T::zero()).sqrt();
    let x_min = (mean2d.x - half_w).to_f64_c().floor() as i64;
    let x_max = (mean2d.x + half_w).to_f64_c().ceil() as i64;
    let y_min = (mean2d.y - half_h).to_f64_c().floor() as i64;
    let y_max = (mean2d.y + half_h).to_f64_c().ceil() as i64;
    if x_max < 0 || y_max < 0 || x_min >= cam.width as i64 || y_min >= cam.height as i64 {
        return None;
    }

    let dir = (g.position - cam.center()).normalized();
    let color = g.color(dir);

    Some(ProjectedGaussian {
        mean2d,
        cov2d,
        conic,
        depth: t.z,
        color,
        opacity,
        source,
        x_min: x_min.max(0),
        x_max: x_max.min(cam.width as i64 - 1),
        y_min: y_min.max(0),
        y_max: y_max.min(cam.height as i64 - 1),
    })
}

/// One pixel's interaction with a projected Gaussian.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PixelEval<T> {
    /// Composited alpha (after clamping).
    pub alpha: T,
    /// Gaussian falloff `exp(-q/2)` before the opacity product.
    pub falloff: T,
    /// Pixel offset from the splat center.
    pub d: Vec2<T>,
    /// True when alpha hit the upper clamp (gradient does not flow).
    pub clamped: bool,
}

/// Evaluates the contribution rule of one Gaussian at one pixel center,
/// applying the footprint and skip cutoffs. Returns `None` when the pixel
/// does not contribute.
#[inline]
pub(crate) fn pixel_eval<T: Scalar>(
    pg: &ProjectedGaussian<T>,
    px: Vec2<T>,
    settings: &RenderSettings<T>,
) -> Option<PixelEval<T>> {
    let d = px - pg.mean2d;
    let q = d.dot(pg.conic.mul_vec(d));
    if q > settings.footprint_sigma * settings.footprint_sigma {
        return None;
    }
    let falloff = (-(sc::<T>(0.5)) * q).exp();
    let raw = pg.opacity * falloff;
    let clamped = raw > settings.alpha_clamp;
    let alpha = if clamped { settings.alpha_clamp } else { raw };
    if alpha < settings.alpha_skip || alpha <= T::zero() {
        return None;
    }
    Some(PixelEval { alpha, falloff, d, clamped })
}

/// Alpha-only variant of [`pixel_eval`] for compositing.
#[inline]
pub(crate) fn pixel_alpha<T: Scalar>(
    pg: &ProjectedGaussian<T>,
    px: Vec2<T>,
    settings: &RenderSettings<T>,
) -> Option<T> {
    pixel_eval(pg, px, settings).map(|e| e.alpha)
}
