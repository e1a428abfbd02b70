//! Finite-difference checking utilities for the renderer and random
//! scene construction for gradient tests.
//!
//! Scenes are sampled away from the non-smooth points of the forward map
//! (alpha clamp, color clamp, footprint boundary), and checks run with
//! [`RenderSettings::without_cutoffs`] so central differences see a
//! smooth function.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::math::{Mat3, Quat, Vec2, Vec3};
use crate::scalar::{logit, sc, Scalar};
use crate::scene::sh::SH_COEFFS;
use crate::scene::{CameraView, Gaussian, ImageBuf};

use super::{render, render_backward, GaussianGradients, RenderSettings};

/// Parameters per Gaussian in the flat indexing used by the checker:
/// position (3), rotation (4), log scale (3), opacity (1), SH (48).
pub const PARAMS_PER_GAUSSIAN: usize = 11 + 3 * SH_COEFFS;

/// Parameter classes reported by [`check_render_gradients`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParamClass {
    Position,
    Rotation,
    LogScale,
    Opacity,
    /// SH coefficients of degree 0..=2 (indices 0..9).
    ShLow,
    /// SH coefficients of degree 3 (indices 9..16).
    ShDegree3,
}

pub fn classify(param: usize) -> ParamClass {
    match param {
        0..=2 => ParamClass::Position,
        3..=6 => ParamClass::Rotation,
        7..=9 => ParamClass::LogScale,
        10 => ParamClass::Opacity,
        _ => {
            let k = (param - 11) % SH_COEFFS;
            if k < 9 {
                ParamClass::ShLow
            } else {
                ParamClass::ShDegree3
            }
        }
    }
}

fn param_mut<T: Scalar>(g: &mut Gaussian<T>, param: usize) -> &mut T {
    match param {
        0 => &mut g.position.x,
        1 => &mut g.position.y,
        2 => &mut g.position.z,
        3 => &mut g.rotation.w,
        4 => &mut g.rotation.x,
        5 => &mut g.rotation.y,
        6 => &mut g.rotation.z,
        7 => &mut g.log_scale.x,
        8 => &mut g.log_scale.y,
        9 => &mut g.log_scale.z,
        10 => &mut g.opacity_logit,
        _ => {
            let k = param - 11;
            &mut g.sh[k / SH_COEFFS][k % SH_COEFFS]
        }
    }
}

pub fn analytic_param<T: Scalar>(grads: &GaussianGradients<T>, gi: usize, param: usize) -> T {
    let g = &grads.grads[gi];
    match param {
        0 => g.position.x,
        1 => g.position.y,
        2 => g.position.z,
        3 => g.rotation[0],
        4 => g.rotation[1],
        5 => g.rotation[2],
        6 => g.rotation[3],
        7 => g.log_scale.x,
        8 => g.log_scale.y,
        9 => g.log_scale.z,
        10 => g.opacity_logit,
        _ => {
            let k = param - 11;
            g.sh[k / SH_COEFFS][k % SH_COEFFS]
        }
    }
}

/// The scalar objective differentiated by `render_backward`.
pub fn scalar_loss<T: Scalar>(
    gaussians: &[Gaussian<T>],
    cam: &CameraView<T>,
    upstream: &ImageBuf<T>,
    settings: &RenderSettings<T>,
) -> T {
    let out = render(gaussians, cam, settings);
    out.image
        .data
        .iter()
        .zip(upstream.data.iter())
        .map(|(&a, &b)| a * b)
        .sum()
}

/// Central finite difference of the scalar loss for one parameter.
pub fn finite_difference<T: Scalar>(
    gaussians: &[Gaussian<T>],
    cam: &CameraView<T>,
    upstream: &ImageBuf<T>,
    settings: &RenderSettings<T>,
    gi: usize,
    param: usize,
    eps: T,
) -> T {
    let mut work = gaussians.to_vec();
    *param_mut(&mut work[gi], param) += eps;
    let fp = scalar_loss(&work, cam, upstream, settings);
    *param_mut(&mut work[gi], param) -= eps + eps;
    let fm = scalar_loss(&work, cam, upstream, settings);
    (fp - fm) / (eps + eps)
}

/// A random scene for gradient checking: Gaussians projected inside the
/// central region of the image, parameters sampled in smooth ranges.
pub struct CheckScene<T> {
    pub gaussians: Vec<Gaussian<T>>,
    pub camera: CameraView<T>,
    pub upstream: ImageBuf<T>,
}

pub fn random_scene<T: Scalar>(seed: u64, n: usize, width: u32, height: u32) -> CheckScene<T> {
    let mut rng = StdRng::seed_from_u64(seed);
    let focal = width as f64 * 1.2;
    let yaw = rng.gen_range(-0.15..0.15);
    let pitch = rng.gen_range(-0.1..0.1);
    let rotation = Quat::<T>::from_yaw_pitch(sc(yaw), sc(pitch)).to_matrix();
    let translation = Vec3::new(
        sc(rng.gen_range(-0.2..0.2)),
        sc(rng.gen_range(-0.2..0.2)),
        sc(rng.gen_range(-0.2..0.2)),
    );
    let camera = CameraView {
        intrinsics: Mat3::new(
            sc(focal),
            T::zero(),
            sc(width as f64 / 2.0),
            T::zero(),
            sc(focal),
            sc(height as f64 / 2.0),
            T::zero(),
            T::zero(),
            T::one(),
        ),
        rotation,
        translation,
        width,
        height,
        camera_id: "check".into(),
        timestep: 0,
        fusion_weight: T::one(),
    };

    let mut gaussians = Vec::with_capacity(n);
    for _ in 0..n {
        let u = rng.gen_range(0.3..0.7) * width as f64;
        let v = rng.gen_range(0.3..0.7) * height as f64;
        let depth = rng.gen_range(1.5..6.0);
        let position = camera.back_project(Vec2::new(sc(u), sc(v)), sc(depth));
        // screen footprint of roughly 0.8..3 pixels sigma
        let sigma_px = rng.gen_range(0.8..3.0);
        let scale = sigma_px * depth / focal;
        let mut g = Gaussian::isotropic(
            position,
            sc(scale * rng.gen_range(0.6..1.4)),
            Vec3::splat(sc(0.5)),
            sc(rng.gen_range(0.15..0.8)),
        );
        g.log_scale = Vec3::new(
            sc((scale * rng.gen_range(0.5..1.5)).ln()),
            sc((scale * rng.gen_range(0.5..1.5)).ln()),
            sc((scale * rng.gen_range(0.5..1.5)).ln()),
        );
        g.rotation = Quat::new(
            sc(rng.gen_range(-1.0..1.0)),
            sc(rng.gen_range(-1.0..1.0)),
            sc(rng.gen_range(-1.0..1.0)),
            sc(rng.gen_range(-1.0..1.0)),
        );
        if g.rotation.norm() < sc(0.3) {
            g.rotation = Quat::identity();
        }
        g.opacity_logit = logit(sc::<T>(rng.gen_range(0.15..0.8)));
        for ch in 0..3 {
            g.sh[ch][0] = sc(rng.gen_range(-0.9..0.9));
            for k in 1..SH_COEFFS {
                g.sh[ch][k] = sc(rng.gen_range(-0.02..0.02));
            }
        }
        gaussians.push(g);
    }

    let mut upstream = ImageBuf::new(width as usize, height as usize);
    for v in upstream.data.iter_mut() {
        *v = sc(rng.gen_range(-1.0..1.0));
    }

    CheckScene { gaussians, camera, upstream }
}

/// Worst relative error per parameter class between `render_backward` and
/// central finite differences. Relative error uses
/// `|a - fd| / max(|a|, |fd|, floor)`.
pub fn check_render_gradients<T: Scalar>(
    scene: &CheckScene<T>,
    settings: &RenderSettings<T>,
    eps: T,
    floor: T,
) -> Vec<(ParamClass, T)> {
    use rayon::prelude::*;

    let grads = render_backward(&scene.gaussians, &scene.camera, &scene.upstream, settings);
    let n = scene.gaussians.len();
    let errors: Vec<(ParamClass, T)> = (0..n * PARAMS_PER_GAUSSIAN)
        .into_par_iter()
        .map(|flat| {
            let gi = flat / PARAMS_PER_GAUSSIAN;
            let param = flat % PARAMS_PER_GAUSSIAN;
            let fd = finite_difference(
                &scene.gaussians,
                &scene.camera,
                &scene.upstream,
                settings,
                gi,
                param,
                eps,
            );
            let an = analytic_param(&grads, gi, param);
            let denom = an.abs().max(fd.abs()).max(floor);
            (classify(param), (an - fd).abs() / denom)
        })
        .collect();

    let classes = [
        ParamClass::Position,
        ParamClass::Rotation,
        ParamClass::LogScale,
        ParamClass::Opacity,
        ParamClass::ShLow,
        ParamClass::ShDegree3,
    ];
    classes
        .iter()
        .map(|&c| {
            let worst = errors
                .iter()
                .filter(|(ec, _)| *ec == c)
                .map(|&(_, e)| e)
                .fold(T::zero(), T::max)
                ;
            (c, worst)
        })
        .collect()
}
