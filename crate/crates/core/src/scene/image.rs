use std::path::Path;

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::scalar::{sc, Scalar};

/// RGB image with channels in [0, 1], stored row-major as `[r, g, b]`
/// triples.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuf<T> {
    pub width: usize,
    pub height: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> ImageBuf<T> {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![T::zero(); width * height * 3],
        }
    }

    pub fn filled(width: usize, height: usize, color: Vec3<T>) -> Self {
        let mut img = Self::new(width, height);
        for px in img.data.chunks_exact_mut(3) {
            px[0] = color.x;
            px[1] = color.y;
            px[2] = color.z;
        }
        img
    }

    #[inline]
    pub fn idx(&self, x: usize, y: usize) -> usize {
        (y * self.width + x) * 3
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Vec3<T> {
        let i = self.idx(x, y);
        Vec3::new(self.data[i], self.data[i + 1], self.data[i + 2])
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: Vec3<T>) {
        let i = self.idx(x, y);
        self.data[i] = c.x;
        self.data[i + 1] = c.y;
        self.data[i + 2] = c.z;
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Bilinear sample at continuous coordinates (pixel centers at +0.5).
    pub fn sample_bilinear(&self, u: T, v: T) -> Vec3<T> {
        let half = sc::<T>(0.5);
        let fu = u - half;
        let fv = v - half;
        let x0f = fu.floor();
        let y0f = fv.floor();
        let ax = fu - x0f;
        let ay = fv - y0f;
        let clamp_x = |i: i64| i.clamp(0, self.width as i64 - 1) as usize;
        let clamp_y = |i: i64| i.clamp(0, self.height as i64 - 1) as usize;
        let x0 = clamp_x(x0f.to_f64().unwrap_or(0.0) as i64);
        let x1 = clamp_x(x0f.to_f64().unwrap_or(0.0) as i64 + 1);
        let y0 = clamp_y(y0f.to_f64().unwrap_or(0.0) as i64);
        let y1 = clamp_y(y0f.to_f64().unwrap_or(0.0) as i64 + 1);
        let one = T::one();
        self.get(x0, y0) * ((one - ax) * (one - ay))
            + self.get(x1, y0) * (ax * (one - ay))
            + self.get(x0, y1) * ((one - ax) * ay)
            + self.get(x1, y1) * (ax * ay)
    }

    /// Rectangular crop; the rectangle must lie inside the image.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Self {
        let mut out = Self::new(w, h);
        for y in 0..h {
            for x in 0..w {
                out.set(x, y, self.get(x0 + x, y0 + y));
            }
        }
        out
    }

    pub fn load_png(path: &Path) -> Result<Self> {
        let img = image::open(path)
            .map_err(|e| Error::load(path, e.to_string()))?
            .to_rgb8();
        let (w, h) = (img.width() as usize, img.height() as usize);
        let scale = sc::<T>(1.0 / 255.0);
        let mut out = Self::new(w, h);
        for (i, v) in img.as_raw().iter().enumerate() {
            out.data[i] = T::from_u8(*v).unwrap() * scale;
        }
        Ok(out)
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let mut raw = Vec::with_capacity(self.data.len());
        for v in &self.data {
            let x = (v.to_f64_c() * 255.0).round().clamp(0.0, 255.0) as u8;
            raw.push(x);
        }
        let img = image::RgbImage::from_raw(self.width as u32, self.height as u32, raw)
            .ok_or_else(|| Error::Other("image buffer size mismatch".into()))?;
        img.save(path).map_err(|e| Error::load(path, e.to_string()))
    }
}

/// Per-pixel boolean mask.
#[derive(Clone, Debug, PartialEq)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize, value: bool) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn load_png(path: &Path) -> Result<Self> {
        let img = image::open(path)
            .map_err(|e| Error::load(path, e.to_string()))?
            .to_luma8();
        Ok(Self {
            width: img.width() as usize,
            height: img.height() as usize,
            data: img.as_raw().iter().map(|&v| v >= 128).collect(),
        })
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let raw: Vec<u8> = self.data.iter().map(|&b| if b { 255 } else { 0 }).collect();
        let img = image::GrayImage::from_raw(self.width as u32, self.height as u32, raw)
            .ok_or_else(|| Error::Other("mask buffer size mismatch".into()))?;
        img.save(path).map_err(|e| Error::load(path, e.to_string()))
    }

    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Self {
        let mut out = Self::new(w, h, false);
        for y in 0..h {
            for x in 0..w {
                out.set(x, y, self.get(x0 + x, y0 + y));
            }
        }
        out
    }
}
