use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scene::ImageBuf;

use super::ssim::{ssim_forward, Channel};
use super::LossConfig;

/// Tile structural-similarity loss: the screen is split into
/// non-overlapping tiles (edge tiles smaller) and the loss is one minus
/// the mean per-tile SSIM, SSIM taken per channel and averaged.
///
/// Returns the loss and its analytic gradient with respect to `rendered`.
pub fn tssim_loss<T: Scalar>(
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
    let ts = cfg.tssim_tile.max(1);
    let tiles_x = rendered.width.div_ceil(ts);
    let tiles_y = rendered.height.div_ceil(ts);
    let z = T::from_usize(tiles_x * tiles_y).unwrap();
    let three = T::from_usize(3).unwrap();

    let mut grad = ImageBuf::new(rendered.width, rendered.height);
    let mut tile_ssim_sum = T::zero();

    for ty in 0..tiles_y {
        for tx in 0..tiles_x {
            let x0 = tx * ts;
            let y0 = ty * ts;
            let w = ts.min(rendered.width - x0);
            let h = ts.min(rendered.height - y0);
            let n_pos = T::from_usize(w * h).unwrap();

            let mut tile_mean = T::zero();
            for ch in 0..3 {
                let mut cx = Channel::new(w, h);
                let mut cy = Channel::new(w, h);
                for yy in 0..h {
                    for xx in 0..w {
                        let i = rendered.idx(x0 + xx, y0 + yy) + ch;
                        cx.data[yy * w + xx] = rendered.data[i];
                        cy.data[yy * w + xx] = target.data[i];
                    }
                }
                let eval = ssim_forward(&cx, &cy, cfg.c1, cfg.c2);
                tile_mean += eval.mean();

                // d(loss)/d(map value) = -1 / (Z * 3 * positions)
                let mut upstream = Channel::new(w, h);
                let g = -(T::one()) / (z * three * n_pos);
                upstream.data.iter_mut().for_each(|v| *v = g);
                let gx = eval.backward(&cx, &cy, &upstream);
                for yy in 0..h {
                    for xx in 0..w {
                        let i = grad.idx(x0 + xx, y0 + yy) + ch;
                        grad.data[i] = gx.data[yy * w + xx];
                    }
                }
            }
            tile_ssim_sum += tile_mean / three;
        }
    }

    let loss = T::one() - tile_ssim_sum / z;
    Ok((loss, grad))
}
