//! Metrics, train/test evaluation and the ablation driver.

pub mod ablate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::ssim::{ssim_forward, Channel};
use crate::scalar::{sc, Scalar};
use crate::scene::ImageBuf;

/// Peak signal-to-noise ratio in dB over all channels; identical images
/// return the +infinity sentinel.
pub fn psnr<T: Scalar>(a: &ImageBuf<T>, b: &ImageBuf<T>) -> Result<T> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch {
            a: format!("{}x{}", a.width, a.height),
            b: format!("{}x{}", b.width, b.height),
        });
    }
    let mut mse = T::zero();
    for (x, y) in a.data.iter().zip(b.data.iter()) {
        let d = *x - *y;
        mse += d * d;
    }
    mse /= T::from_usize(a.data.len()).unwrap();
    if mse == T::zero() {
        return Ok(T::infinity());
    }
    Ok(sc::<T>(10.0) * (T::one() / mse).log10())
}

/// Mean structural similarity on the channel-mean grayscale image
/// (11-tap Gaussian window, c1 = 0.01^2, c2 = 0.03^2).
pub fn ssim<T: Scalar>(a: &ImageBuf<T>, b: &ImageBuf<T>) -> Result<T> {
    if !a.same_shape(b) {
        return Err(Error::ShapeMismatch {
            a: format!("{}x{}", a.width, a.height),
            b: format!("{}x{}", b.width, b.height),
        });
    }
    let third = T::one() / sc::<T>(3.0);
    let gray = |img: &ImageBuf<T>| -> Channel<T> {
        let mut c = Channel::new(img.width, img.height);
        for i in 0..img.pixels() {
            c.data[i] = (img.data[i * 3] + img.data[i * 3 + 1] + img.data[i * 3 + 2]) * third;
        }
        c
    };
    let eval = ssim_forward(&gray(a), &gray(b), sc(0.01 * 0.01), sc(0.03 * 0.03));
    Ok(eval.mean())
}

/// One evaluated image.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricsRow {
    pub camera: String,
    pub timestep: i64,
    pub split: String,
    /// `null` encodes the +infinity sentinel (identical images).
    pub psnr_db: Option<f64>,
    pub ssim: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub config_hash: String,
    pub deterministic: bool,
    /// Omitted in deterministic mode so reports are bit-reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

/// Evaluation report. PSNR/SSIM only; a perceptual metric would require
/// a pretrained network, which this engine deliberately avoids.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricsReport {
    pub note: String,
    pub rows: Vec<MetricsRow>,
    pub mean_psnr_train: Option<f64>,
    pub mean_ssim_train: Option<f64>,
    pub mean_psnr_test: Option<f64>,
    pub mean_ssim_test: Option<f64>,
    pub metadata: RunMetadata,
}

impl MetricsReport {
    pub fn from_rows(rows: Vec<MetricsRow>, metadata: RunMetadata) -> Self {
        let mean = |split: &str, f: &dyn Fn(&MetricsRow) -> Option<f64>| -> Option<f64> {
            let vals: Vec<f64> = rows
                .iter()
                .filter(|r| r.split == split)
                .filter_map(f)
                .filter(|v| v.is_finite())
                .collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        };
        Self {
            note: "metrics: PSNR/SSIM only (no learned perceptual metric)".into(),
            mean_psnr_train: mean("train", &|r| r.psnr_db),
            mean_ssim_train: mean("train", &|r| Some(r.ssim)),
            mean_psnr_test: mean("test", &|r| r.psnr_db),
            mean_ssim_test: mean("test", &|r| Some(r.ssim)),
            rows,
            metadata,
        }
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Renders every view through `render_fn` and scores it against the
/// ground truth.
pub fn evaluate_views<T: Scalar>(
    views: &[&crate::scene::SceneView<T>],
    mut render_fn: impl FnMut(&crate::scene::CameraView<T>) -> ImageBuf<T>,
) -> Result<Vec<MetricsRow>> {
    let mut rows = Vec::with_capacity(views.len());
    for v in views {
        let rendered = render_fn(&v.camera);
        let p = psnr(&rendered, &v.image)?;
        let s = ssim(&rendered, &v.image)?;
        rows.push(MetricsRow {
            camera: v.camera.camera_id.clone(),
            timestep: v.camera.timestep,
            split: if v.is_test { "test".into() } else { "train".into() },
            psnr_db: p.is_finite().then(|| p.to_f64_c()),
            ssim: s.to_f64_c(),
        });
    }
    Ok(rows)
}
