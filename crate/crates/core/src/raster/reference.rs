//! Naive per-pixel reference compositor.
//!
//! Projects every Gaussian, sorts the whole list once by depth, then
//! composites every pixel against every Gaussian in that order with no
//! tiling or binning. It exists as the independent check of the tile
//! rasterizer's compositing path and is not used by training.

use crate::math::{Vec2, Vec3};
use crate::scalar::{sc, Scalar};
use crate::scene::{CameraView, Gaussian, ImageBuf};

use super::project::{pixel_alpha, project};
use super::{RenderOutput, RenderSettings};
use crate::raster::forward::NO_CONTRIBUTOR;

pub fn render_reference<T: Scalar>(
    gaussians: &[Gaussian<T>],
    cam: &CameraView<T>,
    settings: &RenderSettings<T>,
) -> RenderOutput<T> {
    let mut projected: Vec<_> = gaussians
        .iter()
        .enumerate()
        .filter_map(|(i, g)| project(g, cam, settings, i))
        .collect();
    projected.sort_by(|a, b| {
        a.depth
            .partial_cmp(&b.depth)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.source.cmp(&b.source))
    });

    let width = cam.width as usize;
    let height = cam.height as usize;
    let mut out = RenderOutput {
        image: ImageBuf::new(width, height),
        final_transmittance: vec![T::one(); width * height],
        depth_map: vec![T::zero(); width * height],
        contributing: vec![0; width * height],
        dominant: vec![NO_CONTRIBUTOR; width * height],
    };

    let half = sc::<T>(0.5);
    for y in 0..height {
        for x in 0..width {
            let pixel = Vec2::new(
                T::from_usize(x).unwrap() + half,
                T::from_usize(y).unwrap() + half,
            );
            let mut trans = T::one();
            let mut color = Vec3::zero();
            let mut depth_acc = T::zero();
            let mut count = 0u32;
            let mut dom = NO_CONTRIBUTOR;
            let mut dom_w = T::zero();
            for pg in &projected {
                let Some(alpha) = pixel_alpha(pg, pixel, settings) else {
                    continue;
                };
                let weight = trans * alpha;
                color += pg.color * weight;
                depth_acc += weight * pg.depth;
                count += 1;
                if weight > dom_w {
                    dom_w = weight;
                    dom = pg.source as u32;
                }
                trans *= T::one() - alpha;
                if trans < settings.transmittance_stop {
                    break;
                }
            }
            color += settings.background * trans;
            out.image.set(x, y, color);
            let idx = y * width + x;
            out.final_transmittance[idx] = trans;
            let opaque = T::one() - trans;
            out.depth_map[idx] = if opaque > sc(1e-12) {
                depth_acc / opaque
            } else {
                T::zero()
            };
            out.contributing[idx] = count;
            out.dominant[idx] = dom;
        }
    }
    out
}
