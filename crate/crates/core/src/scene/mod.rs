//! Core domain types, the on-disk dataset format, and ingestion of
//! calibrated multi-sensor sequences.

mod camera;
mod dataset;
mod gaussian;
pub mod image;
pub mod manifest;
mod objects;
pub mod ply;
pub mod sh;

pub use camera::CameraView;
pub use dataset::{load_scene, save_scene, SceneDataset, SceneView};
pub use gaussian::{covariance_of, eval_sh, Gaussian};
pub use image::{ImageBuf, Mask};
pub use manifest::{Manifest, SplitPolicy};
pub use objects::{LidarSweep, ObjectBox};
