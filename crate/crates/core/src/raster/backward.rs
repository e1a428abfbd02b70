//! Analytic gradients of the rendered image with respect to every
//! Gaussian parameter.
//!
//! Per pixel the compositing is replayed front-to-back, then unwound
//! back-to-front, accumulating gradients with respect to each projected
//! Gaussian's color, alpha, screen mean and screen covariance. A per-
//! Gaussian post-pass chains those through the projection, the covariance
//! factorization and the spherical-harmonics evaluation.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::math::{Mat2, Mat2x3, Mat3, Vec2, Vec3};
use crate::scalar::{sc, Scalar};
use crate::scene::sh::{sh_basis_and_grad, SH_COEFFS};
use crate::scene::{CameraView, Gaussian, ImageBuf};

use super::forward::prepare;
use super::project::{pixel_eval, projection_jacobian};
use super::RenderSettings;

/// Gradients for one Gaussian.
#[derive(Clone, Debug)]
pub struct GaussianGrad<T> {
    pub position: Vec3<T>,
    /// With respect to the raw (unnormalized) quaternion, (w, x, y, z).
    pub rotation: [T; 4],
    pub log_scale: Vec3<T>,
    pub opacity_logit: T,
    pub sh: [[T; SH_COEFFS]; 3],
    /// Screen-space positional gradient magnitude in normalized device
    /// units (the densification statistic).
    pub grad2d_norm: T,
    /// Contributed to at least one pixel of this render.
    pub visible: bool,
}

impl<T: Scalar> GaussianGrad<T> {
    pub fn zeroed() -> Self {
        Self {
            position: Vec3::zero(),
            rotation: [T::zero(); 4],
            log_scale: Vec3::zero(),
            opacity_logit: T::zero(),
            sh: [[T::zero(); SH_COEFFS]; 3],
            grad2d_norm: T::zero(),
            visible: false,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite()
            && self.rotation.iter().all(|v| v.is_finite())
            && self.log_scale.is_finite()
            && self.opacity_logit.is_finite()
            && self.sh.iter().flatten().all(|v| v.is_finite())
    }
}

/// Per-Gaussian partials of the scalar loss `sum(upstream .* image)`.
#[derive(Clone, Debug)]
pub struct GaussianGradients<T> {
    pub grads: Vec<GaussianGrad<T>>,
}

impl<T: Scalar> GaussianGradients<T> {
    pub fn zeroed(n: usize) -> Self {
        Self {
            grads: vec![GaussianGrad::zeroed(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.grads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.is_empty()
    }

    /// Adds another render's gradients (same Gaussian list).
    pub fn accumulate(&mut self, other: &Self) {
        assert_eq!(self.len(), other.len());
        for (a, b) in self.grads.iter_mut().zip(other.grads.iter()) {
            a.position += b.position;
            for k in 0..4 {
                a.rotation[k] += b.rotation[k];
            }
            a.log_scale += b.log_scale;
            a.opacity_logit += b.opacity_logit;
            for ch in 0..3 {
                for k in 0..SH_COEFFS {
                    a.sh[ch][k] += b.sh[ch][k];
                }
            }
            a.grad2d_norm += b.grad2d_norm;
            a.visible |= b.visible;
        }
    }
}

/// Screen-space gradient accumulator for one projected Gaussian.
#[derive(Clone, Copy)]
struct ScreenAcc<T> {
    color: Vec3<T>,
    alpha_base: T,
    mean2d: Vec2<T>,
    cov2d: Mat2<T>,
    hits: u32,
}

impl<T: Scalar> ScreenAcc<T> {
    fn zero() -> Self {
        Self {
            color: Vec3::zero(),
            alpha_base: T::zero(),
            mean2d: Vec2::zero(),
            cov2d: Mat2::zero(),
            hits: 0,
        }
    }

    fn add(&mut self, other: &Self) {
        self.color += other.color;
        self.alpha_base += other.alpha_base;
        self.mean2d += other.mean2d;
        self.cov2d = self.cov2d + other.cov2d;
        self.hits += other.hits;
    }
}

/// Exact gradients of `sum(upstream .* image)` for `render` with the same
/// settings. The upstream buffer has the camera's resolution.
pub fn render_backward<T: Scalar>(
    gaussians: &[Gaussian<T>],
    cam: &CameraView<T>,
    upstream: &ImageBuf<T>,
    settings: &RenderSettings<T>,
) -> GaussianGradients<T> {
    let refs: Vec<&Gaussian<T>> = gaussians.iter().collect();
    render_backward_refs(&refs, cam, upstream, settings)
}

pub fn render_backward_refs<T: Scalar>(
    gaussians: &[&Gaussian<T>],
    cam: &CameraView<T>,
    upstream: &ImageBuf<T>,
    settings: &RenderSettings<T>,
) -> GaussianGradients<T> {
    assert_eq!(upstream.width, cam.width as usize);
    assert_eq!(upstream.height, cam.height as usize);

    let scene = prepare(gaussians, cam, settings);
    let ts = settings.tile_size.max(1);
    let width = cam.width as usize;
    let height = cam.height as usize;

    // per-tile sparse accumulation, merged in tile order so the result is
    // deterministic regardless of thread scheduling
    let tile_accs: Vec<HashMap<u32, ScreenAcc<T>>> = (0..scene.tiles.len())
        .into_par_iter()
        .map(|ti| {
            let tx = ti % scene.tiles_x;
            let ty = ti / scene.tiles_x;
            let x0 = tx * ts;
            let y0 = ty * ts;
            let w = ts.min(width - x0);
            let h = ts.min(height - y0);
            let list = &scene.tiles[ti];
            let mut acc: HashMap<u32, ScreenAcc<T>> = HashMap::new();
            let mut stored: Vec<(u32, super::project::PixelEval<T>, T)> = Vec::new();
            let half = sc::<T>(0.5);
            for py in 0..h {
                for px in 0..w {
                    let pixel = Vec2::new(
                        T::from_usize(x0 + px).unwrap() + half,
                        T::from_usize(y0 + py).unwrap() + half,
                    );
                    let up = upstream.get(x0 + px, y0 + py);
                    if up == Vec3::zero() {
                        continue;
                    }
                    if settings.store_contributors {
                        backward_pixel_stored(
                            &scene, list, pixel, up, settings, &mut acc, &mut stored,
                        );
                    } else {
                        backward_pixel_replay(&scene, list, pixel, up, settings, &mut acc);
                    }
                }
            }
            acc
        })
        .collect();

    // dense screen-space accumulators per projected Gaussian
    let mut dense: Vec<ScreenAcc<T>> = vec![ScreenAcc::zero(); scene.projected.len()];
    for tile in tile_accs {
        for (pi, a) in tile {
            dense[pi as usize].add(&a);
        }
    }

    // chain screen-space gradients to Gaussian parameters
    let per_projected: Vec<(usize, GaussianGrad<T>)> = scene
        .projected
        .par_iter()
        .zip(dense.par_iter())
        .filter(|(_, acc)| acc.hits > 0)
        .map(|(pg, acc)| {
            let g = gaussians[pg.source];
            (pg.source, chain_to_parameters(g, cam, pg.depth, acc))
        })
        .collect();

    let mut out = GaussianGradients::zeroed(gaussians.len());
    for (source, grad) in per_projected {
        out.grads[source] = grad;
    }
    out
}

/// Backward for one pixel, replaying the forward compositing twice
/// (transmittance recovered by division on the reverse sweep).
fn backward_pixel_replay<T: Scalar>(
    scene: &super::forward::PreparedScene<T>,
    list: &[u32],
    pixel: Vec2<T>,
    up: Vec3<T>,
    settings: &RenderSettings<T>,
    acc: &mut HashMap<u32, ScreenAcc<T>>,
) {
    // forward: final transmittance and the last contributing position
    let mut trans = T::one();
    let mut last: Option<usize> = None;
    for (pos, &pi) in list.iter().enumerate() {
        let pg = &scene.projected[pi as usize];
        let Some(ev) = pixel_eval(pg, pixel, settings) else {
            continue;
        };
        last = Some(pos);
        trans *= T::one() - ev.alpha;
        if trans < settings.transmittance_stop {
            break;
        }
    }
    let Some(last) = last else { return };

    // reverse: unwind transmittance and suffix sums
    let mut suffix = trans * up.dot(settings.background);
    let mut t_next = trans;
    for pos in (0..=last).rev() {
        let pi = list[pos];
        let pg = &scene.projected[pi as usize];
        let Some(ev) = pixel_eval(pg, pixel, settings) else {
            continue;
        };
        let t_i = t_next / (T::one() - ev.alpha);
        accumulate_contribution(pg, &ev, t_i, suffix, up, acc, pi);
        suffix += t_i * ev.alpha * up.dot(pg.color);
        t_next = t_i;
    }
}

/// Backward for one pixel using a stored contributor list (exact prefix
/// transmittances, no division).
fn backward_pixel_stored<T: Scalar>(
    scene: &super::forward::PreparedScene<T>,
    list: &[u32],
    pixel: Vec2<T>,
    up: Vec3<T>,
    settings: &RenderSettings<T>,
    acc: &mut HashMap<u32, ScreenAcc<T>>,
    stored: &mut Vec<(u32, super::project::PixelEval<T>, T)>,
) {
    stored.clear();
    let mut trans = T::one();
    for &pi in list.iter() {
        let pg = &scene.projected[pi as usize];
        let Some(ev) = pixel_eval(pg, pixel, settings) else {
            continue;
        };
        stored.push((pi, ev, trans));
        trans *= T::one() - ev.alpha;
        if trans < settings.transmittance_stop {
            break;
        }
    }
    let mut suffix = trans * up.dot(settings.background);
    for &(pi, ev, t_i) in stored.iter().rev() {
        let pg = &scene.projected[pi as usize];
        accumulate_contribution(pg, &ev, t_i, suffix, up, acc, pi);
        suffix += t_i * ev.alpha * up.dot(pg.color);
    }
}

#[inline]
fn accumulate_contribution<T: Scalar>(
    pg: &super::project::ProjectedGaussian<T>,
    ev: &super::project::PixelEval<T>,
    t_i: T,
    suffix: T,
    up: Vec3<T>,
    acc: &mut HashMap<u32, ScreenAcc<T>>,
    pi: u32,
) {
    let slot = acc.entry(pi).or_insert_with(ScreenAcc::zero);
    slot.hits += 1;
    // dL/dcolor = upstream * (transmittance * alpha)
    slot.color += up * (t_i * ev.alpha);
    if ev.clamped {
        return;
    }
    let dl_dalpha = t_i * up.dot(pg.color) - suffix / (T::one() - ev.alpha);
    // alpha = opacity * falloff; falloff = exp(-q/2)
    slot.alpha_base += dl_dalpha * ev.falloff;
    let dl_dpower = dl_dalpha * ev.alpha;
    let ld = pg.conic.mul_vec(ev.d);
    slot.mean2d += ld * dl_dpower;
    // dL/dcov2d = (dL/dP) * 0.5 * (conic d)(conic d)^T
    let half = sc::<T>(0.5);
    let s = dl_dpower * half;
    slot.cov2d.m[0][0] += s * ld.x * ld.x;
    slot.cov2d.m[0][1] += s * ld.x * ld.y;
    slot.cov2d.m[1][0] += s * ld.y * ld.x;
    slot.cov2d.m[1][1] += s * ld.y * ld.y;
}

/// Chains one Gaussian's screen-space gradient accumulators through the
/// projection, covariance factorization, opacity activation and SH color.
fn chain_to_parameters<T: Scalar>(
    g: &Gaussian<T>,
    cam: &CameraView<T>,
    _depth: T,
    acc: &ScreenAcc<T>,
) -> GaussianGrad<T> {
    let mut out = GaussianGrad::zeroed();
    out.visible = true;
    let two = sc::<T>(2.0);

    // opacity: alpha_base = sigmoid(logit)
    let a = g.opacity();
    out.opacity_logit = acc.alpha_base * a * (T::one() - a);

    // color: c = clamp(0.5 + sum sh * basis), dir = (p - center)/r
    let rel = g.position - cam.center();
    let r = rel.norm();
    let dir = rel / r;
    let (basis, basis_grad) = sh_basis_and_grad(dir);
    let half = sc::<T>(0.5);
    let mut dl_ddir = Vec3::zero();
    for ch in 0..3 {
        let mut raw = half;
        for k in 0..SH_COEFFS {
            raw += g.sh[ch][k] * basis[k];
        }
        if raw <= T::zero() || raw >= T::one() {
            continue; // clamped channel: no gradient
        }
        let gch = acc.color[ch];
        for k in 0..SH_COEFFS {
            out.sh[ch][k] = gch * basis[k];
            dl_ddir += basis_grad[k] * (gch * g.sh[ch][k]);
        }
    }
    // ddir/dposition = (I - dir dir^T)/r
    out.position += (dl_ddir - dir * dir.dot(dl_ddir)) / r;

    // geometry: mean2d and cov2d back to position / rotation / scale
    let t = cam.to_camera(g.position);
    let j = projection_jacobian(cam, t);
    let m = j.mul_mat3(&cam.rotation);
    let sigma = g.covariance();

    // dL/dSigma = M^T G2 M
    let g2 = acc.cov2d;
    let mut g3 = Mat3::zero();
    for av in 0..3 {
        for bv in 0..3 {
            let mut s = T::zero();
            for rr in 0..2 {
                for cc in 0..2 {
                    s += m.m[rr][av] * g2.m[rr][cc] * m.m[cc][bv];
                }
            }
            g3.m[av][bv] = s;
        }
    }

    // dL/dM = 2 G2 M Sigma
    let m_sigma = m.mul_mat3(&sigma);
    let mut dl_dm = Mat2x3::zero();
    for rr in 0..2 {
        for cc in 0..3 {
            let mut s = T::zero();
            for k in 0..2 {
                s += g2.m[rr][k] * m_sigma.m[k][cc];
            }
            dl_dm.m[rr][cc] = two * s;
        }
    }

    // dL/dJ = dL/dM R^T
    let rt = cam.rotation.transpose();
    let mut dl_dj = Mat2x3::zero();
    for rr in 0..2 {
        for cc in 0..3 {
            let mut s = T::zero();
            for k in 0..3 {
                s += dl_dm.m[rr][k] * rt.m[k][cc];
            }
            dl_dj.m[rr][cc] = s;
        }
    }

    // J entries as functions of the camera-frame point:
    //   J00 = fx/z   J01 = sk/z   J02 = -(fx tx + sk ty)/z^2
    //   J11 = fy/z   J12 = -fy ty / z^2
    let fx = cam.fx();
    let fy = cam.fy();
    let sk = cam.skew();
    let z = t.z;
    let inv_z2 = T::one() / (z * z);
    let inv_z3 = inv_z2 / z;
    let a0 = dl_dj.m[0];
    let b0 = dl_dj.m[1];
    let mut dl_dt = Vec3::new(
        -a0[2] * fx * inv_z2,
        -a0[2] * sk * inv_z2 - b0[2] * fy * inv_z2,
        -a0[0] * fx * inv_z2 - a0[1] * sk * inv_z2
            + a0[2] * two * (fx * t.x + sk * t.y) * inv_z3
            - b0[1] * fy * inv_z2
            + b0[2] * two * fy * t.y * inv_z3,
    );

    // mean2d path shares the same Jacobian
    dl_dt += j.transpose_mul_vec(acc.mean2d);
    out.position += rt.mul_vec(dl_dt);

    // Sigma = R D R^T with D = diag(exp(2 s_i))
    let rot = g.rotation.normalized();
    let r3 = rot.to_matrix();
    let d_diag = Vec3::new(
        (two * g.log_scale.x).exp(),
        (two * g.log_scale.y).exp(),
        (two * g.log_scale.z).exp(),
    );
    for i in 0..3 {
        let col = r3.col(i);
        let quad = col.dot(g3.mul_vec(col));
        out.log_scale[i] = two * d_diag[i] * quad;
    }

    // dL/dR3 = 2 G3 R3 D
    let r3d = r3 * Mat3::from_diagonal(d_diag);
    let dl_dr3 = (g3 * r3d).scale(two);

    // dR/dq for the normalized quaternion (w, x, y, z)
    let (w, x, y, z) = (rot.w, rot.x, rot.y, rot.z);
    let zero = T::zero();
    let dr_dq = [
        Mat3::new(zero, -z, y, z, zero, -x, -y, x, zero),
        Mat3::new(zero, y, z, y, -two * x, -w, z, w, -two * x),
        Mat3::new(-two * y, x, w, x, zero, z, -w, z, -two * y),
        Mat3::new(-two * z, -w, x, w, -two * z, y, x, y, zero),
    ];
    let mut dl_dqhat = [T::zero(); 4];
    for (k, d) in dr_dq.iter().enumerate() {
        dl_dqhat[k] = dl_dr3.frobenius_dot(&d.scale(two));
    }
    // through normalization q_hat = q/|q|
    let qn = g.rotation.norm();
    let qh = [rot.w, rot.x, rot.y, rot.z];
    let dot: T = (0..4).map(|k| qh[k] * dl_dqhat[k]).sum();
    for k in 0..4 {
        out.rotation[k] = (dl_dqhat[k] - qh[k] * dot) / qn;
    }

    // densification statistic: screen gradient in NDC units
    let gx = acc.mean2d.x * T::from_u32(cam.width).unwrap() * half;
    let gy = acc.mean2d.y * T::from_u32(cam.height).unwrap() * half;
    out.grad2d_norm = (gx * gx + gy * gy).sqrt();

    out
}
