//! Composite Gaussian splatting engine for dynamic multi-camera driving
//! scenes.
//!
//! The scene is decomposed into a static background field, trained
//! incrementally over depth-ordered bins along the ego trajectory, and a
//! graph of per-object dynamic Gaussian nodes posed by their bounding
//! boxes. Both are composed for global rendering through a differentiable
//! CPU tile rasterizer. A LiDAR point prior initializes the static field
//! and supervises Gaussian positions.
//!
//! All numeric code is generic over [`scalar::Scalar`] (`f32` or `f64`);
//! the pipeline default is `f64` via the [`Real`] alias.

pub mod error;
pub mod math;
pub mod scalar;

pub mod dynamic;
pub mod eval;
pub mod losses;
pub mod optim;
pub mod prior;
pub mod raster;
pub mod scene;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default pipeline scalar.
pub type Real = f64;

/// Concrete aliases for the main domain types at the default scalar.
pub type Gaussian64 = scene::Gaussian<f64>;
pub type Gaussian32 = scene::Gaussian<f32>;
pub type CameraView64 = scene::CameraView<f64>;
pub type SceneDataset64 = scene::SceneDataset<f64>;
