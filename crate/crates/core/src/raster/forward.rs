use rayon::prelude::*;

use crate::math::{Vec2, Vec3};
use crate::scalar::{sc, Scalar};
use crate::scene::{CameraView, Gaussian, ImageBuf};

use super::project::{pixel_alpha, project, ProjectedGaussian};
use super::RenderSettings;

/// Sentinel for "no dominant contributor" in [`RenderOutput::dominant`].
pub const NO_CONTRIBUTOR: u32 = u32::MAX;

/// Rendered image plus auxiliary per-pixel buffers.
#[derive(Clone, Debug)]
pub struct RenderOutput<T> {
    pub image: ImageBuf<T>,
    /// Remaining transmittance after compositing, in [0, 1].
    pub final_transmittance: Vec<T>,
    /// Alpha-weighted expected depth (meters); 0 where nothing rendered.
    pub depth_map: Vec<T>,
    /// Number of composited contributions per pixel.
    pub contributing: Vec<u32>,
    /// Source index of the largest single contribution per pixel.
    pub dominant: Vec<u32>,
}

/// Projection, depth ordering, and tile binning shared by the forward and
/// backward passes.
pub(crate) struct PreparedScene<T> {
    pub projected: Vec<ProjectedGaussian<T>>,
    /// Indices into `projected`, ordered per tile front-to-back.
    pub tiles: Vec<Vec<u32>>,
    pub tiles_x: usize,
}

pub(crate) fn prepare<T: Scalar>(
    gaussians: &[&Gaussian<T>],
    cam: &CameraView<T>,
    settings: &RenderSettings<T>,
) -> PreparedScene<T> {
    let mut projected: Vec<ProjectedGaussian<T>> = gaussians
        .par_iter()
        .enumerate()
        .filter_map(|(i, g)| project(g, cam, settings, i))
        .collect();
    // global front-to-back order; ties broken by source index so the
    // composition order is deterministic
    projected.sort_by(|a, b| {
        a.depth
            .partial_cmp(&b.depth)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.source.cmp(&b.source))
    });

    let ts = settings.tile_size.max(1);
    let tiles_x = (cam.width as usize).div_ceil(ts);
    let tiles_y = (cam.height as usize).div_ceil(ts);
    let mut tiles: Vec<Vec<u32>> = vec![Vec::new(); tiles_x * tiles_y];
    for (pi, pg) in projected.iter().enumerate() {
        let tx0 = (pg.x_min as usize) / ts;
        let tx1 = (pg.x_max as usize) / ts;
        let ty0 = (pg.y_min as usize) / ts;
        let ty1 = (pg.y_max as usize) / ts;
        for ty in ty0..=ty1 {
            for tx in tx0..=tx1 {
                tiles[ty * tiles_x + tx].push(pi as u32);
            }
        }
    }
    let _ = tiles_y;
    PreparedScene { projected, tiles, tiles_x }
}

struct TileResult<T> {
    x0: usize,
    y0: usize,
    w: usize,
    h: usize,
    color: Vec<Vec3<T>>,
    trans: Vec<T>,
    depth: Vec<T>,
    count: Vec<u32>,
    dominant: Vec<u32>,
}

/// Renders a list of Gaussian references.
pub fn render_refs<T: Scalar>(
    gaussians: &[&Gaussian<T>],
    cam: &CameraView<T>,
    settings: &RenderSettings<T>,
) -> RenderOutput<T> {
    let scene = prepare(gaussians, cam, settings);
    let width = cam.width as usize;
    let height = cam.height as usize;
    let ts = settings.tile_size.max(1);

    let results: Vec<TileResult<T>> = (0..scene.tiles.len())
        .into_par_iter()
        .map(|ti| {
            let tx = ti % scene.tiles_x;
            let ty = ti / scene.tiles_x;
            let x0 = tx * ts;
            let y0 = ty * ts;
            let w = ts.min(width - x0);
            let h = ts.min(height - y0);
            let mut out = TileResult {
                x0,
                y0,
                w,
                h,
                color: vec![Vec3::zero(); w * h],
                trans: vec![T::one(); w * h],
                depth: vec![T::zero(); w * h],
                count: vec![0; w * h],
                dominant: vec![NO_CONTRIBUTOR; w * h],
            };
            let list = &scene.tiles[ti];
            let half = sc::<T>(0.5);
            for py in 0..h {
                for px in 0..w {
                    let pixel = Vec2::new(
                        T::from_usize(x0 + px).unwrap() + half,
                        T::from_usize(y0 + py).unwrap() + half,
                    );
                    let slot = py * w + px;
                    let mut trans = T::one();
                    let mut color = Vec3::zero();
                    let mut depth_acc = T::zero();
                    let mut count = 0u32;
                    let mut dom = NO_CONTRIBUTOR;
                    let mut dom_w = T::zero();
                    for &pi in list.iter() {
                        let pg = &scene.projected[pi as usize];
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
                    out.color[slot] = color;
                    out.trans[slot] = trans;
                    let opaque = T::one() - trans;
                    out.depth[slot] = if opaque > sc(1e-12) {
                        depth_acc / opaque
                    } else {
                        T::zero()
                    };
                    out.count[slot] = count;
                    out.dominant[slot] = dom;
                }
            }
            out
        })
        .collect();

    let mut output = RenderOutput {
        image: ImageBuf::new(width, height),
        final_transmittance: vec![T::one(); width * height],
        depth_map: vec![T::zero(); width * height],
        contributing: vec![0; width * height],
        dominant: vec![NO_CONTRIBUTOR; width * height],
    };
    for tile in results {
        for py in 0..tile.h {
            for px in 0..tile.w {
                let src = py * tile.w + px;
                let x = tile.x0 + px;
                let y = tile.y0 + py;
                let dst = y * width + x;
                output.image.set(x, y, tile.color[src]);
                output.final_transmittance[dst] = tile.trans[src];
                output.depth_map[dst] = tile.depth[src];
                output.contributing[dst] = tile.count[src];
                output.dominant[dst] = tile.dominant[src];
            }
        }
    }
    output
}

/// Renders a Gaussian list into one camera.
pub fn render<T: Scalar>(
    gaussians: &[Gaussian<T>],
    cam: &CameraView<T>,
    settings: &RenderSettings<T>,
) -> RenderOutput<T> {
    let refs: Vec<&Gaussian<T>> = gaussians.iter().collect();
    render_refs(&refs, cam, settings)
}

/// Renders the static field and world-posed dynamic node lists jointly:
/// identical to rendering the concatenation of all lists, so occlusion
/// emerges from the shared depth sort.
pub fn render_composed<T: Scalar>(
    static_field: &[Gaussian<T>],
    dynamic_nodes: &[&[Gaussian<T>]],
    cam: &CameraView<T>,
    settings: &RenderSettings<T>,
) -> RenderOutput<T> {
    let mut refs: Vec<&Gaussian<T>> = static_field.iter().collect();
    for node in dynamic_nodes {
        refs.extend(node.iter());
    }
    render_refs(&refs, cam, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Mat3;
    use crate::scalar::logit;

    fn camera(width: u32, height: u32, focal: f64) -> CameraView<f64> {
        CameraView {
            intrinsics: Mat3::new(
                focal,
                0.0,
                width as f64 / 2.0,
                0.0,
                focal,
                height as f64 / 2.0,
                0.0,
                0.0,
                1.0,
            ),
            rotation: Mat3::identity(),
            translation: Vec3::zero(),
            width,
            height,
            camera_id: "c".into(),
            timestep: 0,
            fusion_weight: 1.0,
        }
    }

    /// A wide flat Gaussian whose alpha is essentially constant over the
    /// image center, with the given activated opacity.
    fn flat_gaussian(depth: f64, opacity: f64, color: Vec3<f64>) -> Gaussian<f64> {
        let mut g = Gaussian::isotropic(Vec3::new(0.0, 0.0, depth), depth * 2.0, color, 0.5);
        g.opacity_logit = logit(opacity);
        g
    }

    #[test]
    fn empty_scene_is_background() {
        let cam = camera(8, 8, 10.0);
        let mut settings = RenderSettings::default();
        settings.background = Vec3::new(0.2, 0.4, 0.6);
        let out = render::<f64>(&[], &cam, &settings);
        for y in 0..8 {
            for x in 0..8 {
                assert!(out.image.get(x, y).distance(settings.background) < 1e-15);
            }
        }
        assert!(out.final_transmittance.iter().all(|&t| t == 1.0));
        assert!(out.contributing.iter().all(|&c| c == 0));
    }

    #[test]
    fn single_opaque_gaussian_composites_once() {
        let cam = camera(9, 9, 10.0);
        let settings = RenderSettings::default();
        let g = flat_gaussian(2.0, 0.9, Vec3::new(1.0, 0.0, 0.0));
        let out = render(&[g], &cam, &settings);
        // center pixel (4,4) has center (4.5,4.5) = principal point: alpha
        // is exactly 0.9 there
        let c = out.image.get(4, 4);
        assert!((c.x - 0.9).abs() < 1e-9, "got {}", c.x);
        let idx = 4 * 9 + 4;
        assert!((out.final_transmittance[idx] - 0.1).abs() < 1e-9);
        assert!((out.depth_map[idx] - 2.0).abs() < 1e-9);
        assert_eq!(out.dominant[idx], 0);
    }

    #[test]
    fn two_gaussian_alpha_series() {
        // red at depth 1 (alpha .6), blue at depth 2 (alpha .6):
        // pixel = .6 red + .4*.6 blue, transmittance .16
        let cam = camera(9, 9, 10.0);
        let settings = RenderSettings::default();
        let red = flat_gaussian(1.0, 0.6, Vec3::new(1.0, 0.0, 0.0));
        let blue = flat_gaussian(2.0, 0.6, Vec3::new(0.0, 0.0, 1.0));
        let out = render(&[blue, red], &cam, &settings);
        let c = out.image.get(4, 4);
        assert!((c.x - 0.6).abs() < 1e-9);
        assert!(c.y.abs() < 1e-12);
        assert!((c.z - 0.24).abs() < 1e-9);
        let idx = 4 * 9 + 4;
        assert!((out.final_transmittance[idx] - 0.16).abs() < 1e-9);
        assert_eq!(out.contributing[idx], 2);
    }

    #[test]
    fn transmittance_telescopes() {
        let cam = camera(9, 9, 12.0);
        let settings = RenderSettings::default();
        let gs: Vec<Gaussian<f64>> = (0..5)
            .map(|i| flat_gaussian(1.0 + i as f64, 0.3, Vec3::splat(0.5)))
            .collect();
        let out = render(&gs, &cam, &settings);
        // the principal point (4.5, 4.5) is exactly the center of pixel
        // (4,4), so all five alphas are exactly 0.3 there
        let idx = 4 * 9 + 4;
        let expect = (1.0f64 - 0.3).powi(5);
        assert!((out.final_transmittance[idx] - expect).abs() < 1e-9);
    }

    #[test]
    fn composed_equals_concatenated() {
        let cam = camera(12, 12, 12.0);
        let settings = RenderSettings::default();
        let stat = vec![flat_gaussian(3.0, 0.5, Vec3::new(0.3, 0.8, 0.1))];
        let node = vec![flat_gaussian(1.5, 0.7, Vec3::new(0.9, 0.1, 0.2))];
        let composed = render_composed(&stat, &[&node], &cam, &settings);
        let mut concat = stat.clone();
        concat.extend(node.iter().cloned());
        let direct = render(&concat, &cam, &settings);
        assert_eq!(composed.image.data, direct.image.data);
        assert_eq!(composed.final_transmittance, direct.final_transmittance);
    }

    #[test]
    fn output_stays_in_unit_range() {
        let cam = camera(16, 16, 12.0);
        let settings = RenderSettings::default();
        let gs: Vec<Gaussian<f64>> = (0..20)
            .map(|i| {
                let f = i as f64;
                flat_gaussian(
                    1.0 + f * 0.3,
                    0.9,
                    Vec3::new(
                        (f * 0.37).sin().abs(),
                        (f * 0.73).cos().abs(),
                        (f * 0.11).sin().abs(),
                    ),
                )
            })
            .collect();
        let out = render(&gs, &cam, &settings);
        for v in &out.image.data {
            assert!(*v >= 0.0 && *v <= 1.0);
        }
    }
}
