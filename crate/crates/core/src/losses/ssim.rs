//! Windowed SSIM with analytic gradients on single-channel buffers.
//!
//! Local statistics use an 11-tap Gaussian window (sigma 1.5). Near the
//! borders the window is truncated and renormalized, which keeps the map
//! defined on every pixel of arbitrarily small regions (the tile loss
//! runs on tiles smaller than the window).

use crate::scalar::{sc, Scalar};

pub const WINDOW: usize = 11;
const SIGMA: f64 = 1.5;

/// Normalized 11-tap Gaussian kernel.
pub fn gaussian_taps<T: Scalar>() -> [T; WINDOW] {
    let mut taps = [0.0f64; WINDOW];
    let half = (WINDOW / 2) as f64;
    let mut sum = 0.0;
    for (i, t) in taps.iter_mut().enumerate() {
        let d = i as f64 - half;
        *t = (-d * d / (2.0 * SIGMA * SIGMA)).exp();
        sum += *t;
    }
    let mut out = [T::zero(); WINDOW];
    for (o, t) in out.iter_mut().zip(taps.iter()) {
        *o = sc(*t / sum);
    }
    out
}

/// Single-channel buffer view used by the SSIM computations.
#[derive(Clone, Debug)]
pub struct Channel<T> {
    pub width: usize,
    pub height: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Channel<T> {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, data: vec![T::zero(); width * height] }
    }
}

/// 1D renormalization factors: the in-bounds kernel mass at each position.
fn axis_norms<T: Scalar>(len: usize, taps: &[T; WINDOW]) -> Vec<T> {
    let r = WINDOW as i64 / 2;
    (0..len as i64)
        .map(|p| {
            let mut s = T::zero();
            for (k, t) in taps.iter().enumerate() {
                let q = p + k as i64 - r;
                if q >= 0 && q < len as i64 {
                    s += *t;
                }
            }
            s
        })
        .collect()
}

/// Separable truncated correlation with zero padding (no normalization).
fn correlate<T: Scalar>(img: &Channel<T>, taps: &[T; WINDOW]) -> Channel<T> {
    let (w, h) = (img.width, img.height);
    let r = WINDOW as i64 / 2;
    let mut rows = Channel::new(w, h);
    for y in 0..h {
        for x in 0..w as i64 {
            let mut s = T::zero();
            for (k, t) in taps.iter().enumerate() {
                let q = x + k as i64 - r;
                if q >= 0 && q < w as i64 {
                    s += *t * img.data[y * w + q as usize];
                }
            }
            rows.data[y * w + x as usize] = s;
        }
    }
    let mut out = Channel::new(w, h);
    for y in 0..h as i64 {
        for x in 0..w {
            let mut s = T::zero();
            for (k, t) in taps.iter().enumerate() {
                let q = y + k as i64 - r;
                if q >= 0 && q < h as i64 {
                    s += *t * rows.data[q as usize * w + x];
                }
            }
            out.data[y as usize * w + x] = s;
        }
    }
    out
}

/// Renormalized local mean: truncated correlation divided by the local
/// kernel mass.
fn local_mean<T: Scalar>(
    img: &Channel<T>,
    taps: &[T; WINDOW],
    nx: &[T],
    ny: &[T],
) -> Channel<T> {
    let mut out = correlate(img, taps);
    for y in 0..img.height {
        for x in 0..img.width {
            out.data[y * img.width + x] /= nx[x] * ny[y];
        }
    }
    out
}

/// Adjoint of [`local_mean`]: divides by the local mass, then correlates
/// with the (symmetric) kernel under zero padding.
fn local_mean_adjoint<T: Scalar>(
    g: &Channel<T>,
    taps: &[T; WINDOW],
    nx: &[T],
    ny: &[T],
) -> Channel<T> {
    let mut scaled = g.clone();
    for y in 0..g.height {
        for x in 0..g.width {
            scaled.data[y * g.width + x] /= nx[x] * ny[y];
        }
    }
    correlate(&scaled, taps)
}

/// Per-position SSIM map plus everything needed for the backward pass.
pub struct SsimEval<T> {
    pub map: Channel<T>,
    ux: Channel<T>,
    uy: Channel<T>,
    uxx: Channel<T>,
    uyy: Channel<T>,
    uxy: Channel<T>,
    c1: T,
    c2: T,
}

/// Evaluates the SSIM map of `x` against `y` over the full buffers.
pub fn ssim_forward<T: Scalar>(x: &Channel<T>, y: &Channel<T>, c1: T, c2: T) -> SsimEval<T> {
    assert_eq!(x.width, y.width);
    assert_eq!(x.height, y.height);
    let taps = gaussian_taps::<T>();
    let nx = axis_norms(x.width, &taps);
    let ny = axis_norms(x.height, &taps);

    let mut x2 = x.clone();
    let mut y2 = y.clone();
    let mut xy = x.clone();
    for i in 0..x.data.len() {
        x2.data[i] = x.data[i] * x.data[i];
        y2.data[i] = y.data[i] * y.data[i];
        xy.data[i] = x.data[i] * y.data[i];
    }

    let ux = local_mean(x, &taps, &nx, &ny);
    let uy = local_mean(y, &taps, &nx, &ny);
    let uxx = local_mean(&x2, &taps, &nx, &ny);
    let uyy = local_mean(&y2, &taps, &nx, &ny);
    let uxy = local_mean(&xy, &taps, &nx, &ny);

    let two = sc::<T>(2.0);
    let mut map = Channel::new(x.width, x.height);
    for i in 0..map.data.len() {
        let (mx, my) = (ux.data[i], uy.data[i]);
        let n1 = two * mx * my + c1;
        let d1 = mx * mx + my * my + c1;
        let n2 = two * (uxy.data[i] - mx * my) + c2;
        let d2 = (uxx.data[i] - mx * mx) + (uyy.data[i] - my * my) + c2;
        map.data[i] = (n1 / d1) * (n2 / d2);
    }

    SsimEval { map, ux, uy, uxx, uyy, uxy, c1, c2 }
}

impl<T: Scalar> SsimEval<T> {
    pub fn mean(&self) -> T {
        let n = T::from_usize(self.map.data.len()).unwrap();
        self.map.data.iter().copied().sum::<T>() / n
    }

    /// Gradient of `sum(upstream .* map)` with respect to `x`.
    pub fn backward(&self, x: &Channel<T>, y: &Channel<T>, upstream: &Channel<T>) -> Channel<T> {
        let taps = gaussian_taps::<T>();
        let nx = axis_norms(x.width, &taps);
        let ny = axis_norms(x.height, &taps);
        let two = sc::<T>(2.0);

        let len = x.data.len();
        let mut g_ux = Channel::new(x.width, x.height);
        let mut g_uxx = Channel::new(x.width, x.height);
        let mut g_uxy = Channel::new(x.width, x.height);
        for i in 0..len {
            let (mx, my) = (self.ux.data[i], self.uy.data[i]);
            let n1 = two * mx * my + self.c1;
            let d1 = mx * mx + my * my + self.c1;
            let n2 = two * (self.uxy.data[i] - mx * my) + self.c2;
            let d2 = (self.uxx.data[i] - mx * mx) + (self.uyy.data[i] - my * my) + self.c2;
            let l = n1 / d1;
            let cs = n2 / d2;
            let ds_dux =
                (two * my * d1 - two * mx * n1) / (d1 * d1) * cs
                    + l * (-(two * my) * d2 + two * mx * n2) / (d2 * d2);
            let ds_duxx = -l * n2 / (d2 * d2);
            let ds_duxy = l * two / d2;
            let u = upstream.data[i];
            g_ux.data[i] = u * ds_dux;
            g_uxx.data[i] = u * ds_duxx;
            g_uxy.data[i] = u * ds_duxy;
        }

        let a_ux = local_mean_adjoint(&g_ux, &taps, &nx, &ny);
        let a_uxx = local_mean_adjoint(&g_uxx, &taps, &nx, &ny);
        let a_uxy = local_mean_adjoint(&g_uxy, &taps, &nx, &ny);

        let mut out = Channel::new(x.width, x.height);
        for i in 0..len {
            out.data[i] =
                a_ux.data[i] + two * x.data[i] * a_uxx.data[i] + y.data[i] * a_uxy.data[i];
        }
        out
    }
}
